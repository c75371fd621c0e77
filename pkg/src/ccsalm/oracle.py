"""Brute-force global minimizer by support enumeration.

Every support ``S`` with ``|S| <= kappa`` gets a restricted smooth problem
in the variables ``x_S`` (the rest pinned at zero), solved by the same
augmented Lagrangian loop from the zero vector and a few seeded random
starts.  The best feasible restricted solution is the global answer, up
to the reliability of the local solves.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .certificates import ccm_residual
from .inner import InnerConfig
from .problem import CcopProblem, EvaluationError, RelaxedPoint, feasibility, pair_y_for_x
from .salm import SalmConfig, solve

__all__ = [
    "OracleCapError",
    "OracleConfig",
    "OracleResult",
    "OracleVerdict",
    "SupportResult",
    "Validation",
    "enumerate_supports",
    "permuted",
    "restrict",
    "validate_against_oracle",
]

MAX_N = 20

# Infeasible supports only need to be recognised, not pushed to rho = 1e12,
# and the restricted problems are tiny, so the adaptive step rule pays off.
ORACLE_SALM = SalmConfig(rho_max=1e6, eps_min=1e-7, inner=InnerConfig(max_iters=1000, step_rule="abb"))


class OracleCapError(ValueError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    n_random: int = 5
    seed: int = 0
    start_scale: float = 2.0
    cap: int = MAX_N
    tol_feas: float = 1e-6
    salm: SalmConfig = field(default_factory=lambda: ORACLE_SALM)

    def snapshot(self) -> dict:
        out = {f: getattr(self, f) for f in ("n_random", "seed", "start_scale", "cap", "tol_feas")}
        out["salm"] = self.salm.snapshot()
        return out


@dataclass(frozen=True)
class SupportResult:
    support: tuple[int, ...]
    x: np.ndarray
    objective: float
    feasible: bool
    status: str


@dataclass
class OracleResult:
    best_x: np.ndarray | None
    best_f: float
    best_support: tuple[int, ...] | None
    per_support: list[SupportResult]
    enumerated: int

    def to_dict(self) -> dict:
        return {
            "best_x": None if self.best_x is None else self.best_x.tolist(),
            "best_f": self.best_f,
            "best_support": None if self.best_support is None else list(self.best_support),
            "enumerated": self.enumerated,
            "per_support": [
                {
                    "support": list(r.support),
                    "x": r.x.tolist(),
                    "objective": r.objective,
                    "feasible": r.feasible,
                    "status": r.status,
                }
                for r in self.per_support
            ],
        }


def restrict(prob: CcopProblem, support) -> CcopProblem:
    """The problem in ``x_S`` alone, with a vacuous cardinality bound."""
    idx = np.asarray(sorted(support), dtype=int)
    s = idx.size
    if s == 0:
        raise ValueError("support must be nonempty")
    n = prob.n

    def embed(z):
        x = np.zeros(n)
        x[idx] = z
        return x

    kw = {}
    if prob.m:
        kw["eval_g"] = lambda z: prob.eval_g(embed(z))
        kw["jac_g"] = lambda z: np.asarray(prob.jac_g(embed(z))).reshape(n, prob.m)[idx]
    if prob.p:
        kw["eval_h"] = lambda z: prob.eval_h(embed(z))
        kw["jac_h"] = lambda z: np.asarray(prob.jac_h(embed(z))).reshape(n, prob.p)[idx]
    return CcopProblem(
        n=s,
        kappa=s,
        m=prob.m,
        p=prob.p,
        eval_f=lambda z: prob.eval_f(embed(z)),
        grad_f=lambda z: np.asarray(prob.grad_f(embed(z)))[idx],
        name=f"{prob.name}|S={tuple(int(i) for i in idx)}",
        **kw,
    )


def _ccop_feasible(prob, x, tol_feas, tol_active) -> bool:
    rep = feasibility(prob, RelaxedPoint(x, pair_y_for_x(x, prob.kappa)), tol_active)
    return rep.is_feasible(tol_feas) and rep.viol_l0 == 0


def _solve_support(prob, support, cfg: OracleConfig) -> SupportResult:
    n = prob.n
    if not support:
        x = np.zeros(n)
        try:
            f = prob.f(x)
            ok = _ccop_feasible(prob, x, cfg.tol_feas, cfg.salm.tol_active)
        except EvaluationError:
            f, ok = math.inf, False
        return SupportResult((), x, f, ok, "Evaluated")

    sub = restrict(prob, support)
    rng = np.random.default_rng([cfg.seed, *support])
    starts = [np.zeros(len(support))]
    starts += [rng.uniform(-cfg.start_scale, cfg.start_scale, len(support)) for _ in range(cfg.n_random)]

    best = None
    for z0 in starts:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = solve(sub, z0, cfg.salm)
        except EvaluationError:
            continue
        x = np.zeros(n)
        x[list(support)] = res.pt.x
        f = prob.f(x)
        ok = _ccop_feasible(prob, x, cfg.tol_feas, cfg.salm.tol_active)
        cand = SupportResult(tuple(support), x, f, ok, res.status.value)
        # feasible beats infeasible, then lower objective
        if best is None or (ok, -f) > (best.feasible, -best.objective):
            best = cand
    if best is None:
        return SupportResult(tuple(support), np.zeros(n), math.inf, False, "EvaluationError")
    return best


def enumerate_supports(prob: CcopProblem, cfg: OracleConfig = OracleConfig()) -> OracleResult:
    n = prob.n
    if n > cfg.cap:
        raise OracleCapError(f"oracle enumeration is capped at n <= {cfg.cap}, got n = {n}")
    per = []
    for size in range(prob.kappa + 1):
        for support in itertools.combinations(range(n), size):
            per.append(_solve_support(prob, support, cfg))

    best = None
    for r in per:
        if r.feasible and (best is None or r.objective < best.objective):
            best = r
    if best is None:
        return OracleResult(None, math.inf, None, per, len(per))
    return OracleResult(best.x, best.objective, best.support, per, len(per))


class Validation(str, enum.Enum):
    GLOBAL_MATCH = "GlobalMatch"
    LOCAL_ONLY = "LocalOnly"
    WORSE = "Worse"


@dataclass(frozen=True)
class OracleVerdict:
    kind: Validation
    gap: float
    feasible: bool
    ccm_residual: float


def validate_against_oracle(
    prob: CcopProblem,
    x_candidate,
    oracle: OracleResult,
    tol: float = 1e-6,
    tol_feas: float = 1e-6,
    tol_active: float = 1e-6,
) -> OracleVerdict:
    """Compare a candidate with the enumerated optimum.

    ``gap`` is ``f(x_candidate) - best_f``.  ``LocalOnly`` requires a
    feasible candidate with CC-M residual at most ``tol``.
    """
    x = prob.check_x(x_candidate)
    f = prob.f(x)
    gap = f - oracle.best_f
    ok = _ccop_feasible(prob, x, tol_feas, tol_active)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        resid = ccm_residual(prob, x, tol_active, tol_feas).residual
    if ok and gap <= tol:
        kind = Validation.GLOBAL_MATCH
    elif ok and resid <= tol:
        kind = Validation.LOCAL_ONLY
    else:
        kind = Validation.WORSE
    return OracleVerdict(kind, gap, ok, resid)


def permuted(prob: CcopProblem, perm) -> CcopProblem:
    """The same instance with coordinates relabelled: ``x_new[i] = x_old[perm[i]]``."""
    perm = np.asarray(perm, dtype=int)
    inv = np.argsort(perm)
    n = prob.n

    def back(z):
        return np.asarray(z, dtype=float)[inv]

    kw = {}
    if prob.m:
        kw["eval_g"] = lambda z: prob.eval_g(back(z))
        kw["jac_g"] = lambda z: np.asarray(prob.jac_g(back(z))).reshape(n, prob.m)[perm]
    if prob.p:
        kw["eval_h"] = lambda z: prob.eval_h(back(z))
        kw["jac_h"] = lambda z: np.asarray(prob.jac_h(back(z))).reshape(n, prob.p)[perm]
    return replace(
        prob,
        eval_f=lambda z: prob.eval_f(back(z)),
        grad_f=lambda z: np.asarray(prob.grad_f(back(z)))[perm],
        name=prob.name + "|perm",
        **kw,
    )
