"""Safeguarded augmented Lagrangian method on the relaxed problem."""

from __future__ import annotations

import enum
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .auglag import (
    Multipliers,
    SafeguardBounds,
    penalty_progress,
    project_safeguards,
    update_multipliers,
)
from .certificates import (
    Certificate,
    ccm_residual,
    ccs_from_ccm,
    sequence_diagnostics,
)
from .inner import InnerConfig, InnerStatus, minimize
from .problem import (
    DEFAULT_TOL_ACTIVE,
    CcopProblem,
    FeasibilityReport,
    RelaxedPoint,
    feasibility,
    pair_y_for_x,
    project_to_cardinality,
)

__all__ = ["RunTrace", "SalmConfig", "SalmResult", "SalmStatus", "TraceRow", "penalty_update", "solve"]


class SalmStatus(str, enum.Enum):
    CCM_STATIONARY = "CcmStationary"
    INFEASIBLE = "Infeasible"
    RHO_LIMIT = "RhoLimit"
    OUTER_LIMIT = "OuterLimit"
    INNER_FAILURE = "InnerFailure"


@dataclass(frozen=True)
class SalmConfig:
    rho0: float = 1.0
    tau: float = 2.0
    sigma: float = 10.0
    eps0: float = 1.0
    eps_decay: float = 0.1
    eps_min: float = 1e-9
    bounds: SafeguardBounds = field(default_factory=SafeguardBounds)
    tol_feas: float = 1e-6
    tol_opt: float = 1e-6
    max_outer: int = 200
    rho_max: float = 1e12
    tol_active: float = DEFAULT_TOL_ACTIVE
    inner: InnerConfig = field(default_factory=InnerConfig)
    beta_tol: float = 1e-3
    alpha_tol: float = 1e-12

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError("rho0 must be positive")
        if not (self.tau > 1 and self.sigma > 1):
            raise ValueError("tau and sigma must exceed 1")
        if not (self.eps0 > 0 and self.eps_min > 0 and 0 < self.eps_decay <= 1):
            raise ValueError("epsilon schedule must be positive and nonincreasing")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")

    def eps(self, k: int) -> float:
        """Inner tolerance for outer iteration ``k >= 1``."""
        return max(self.eps_min, self.eps0 * self.eps_decay ** (k - 1))

    def snapshot(self) -> dict:
        out = asdict(self)
        out["inner"]["bb_clip"] = list(self.inner.bb_clip)
        return out


@dataclass(frozen=True)
class TraceRow:
    k: int
    rho: float
    rho_next: float
    progress_ok: bool
    eps: float
    score: float
    viol_g: float
    viol_h: float
    viol_comp: float
    viol_card: float
    viol_box: float
    viol_l0: int
    mult_norm: float
    inner_iters: int
    inner_evals: int
    inner_status: str
    grad_norm: float
    objective: float
    ccm_residual: float
    sign_triggered: int
    sign_negative: int


@dataclass
class RunTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def check_penalty_rule(self, sigma: float) -> bool:
        """Every penalty either stays or grows by ``sigma``, the latter exactly when the progress test fails."""
        for i, row in enumerate(self.rows):
            if i > 0 and row.rho != self.rows[i - 1].rho_next:
                return False
            grow = row.k > 1 and not row.progress_ok
            expected = row.rho * sigma if grow else row.rho
            if row.rho_next != expected:
                return False
        return True


@dataclass
class SalmResult:
    pt: RelaxedPoint
    x_sparse: np.ndarray
    multipliers: Multipliers
    trace: RunTrace
    status: SalmStatus
    certificate: Certificate
    objective: float
    feasibility: FeasibilityReport


def penalty_update(prev_score, cur_score: float, rho: float, tau: float, sigma: float, k: int) -> float:
    """Keep ``rho`` on the first iteration or after sufficient progress, else grow it."""
    if k == 1 or prev_score >= tau * cur_score:
        return rho
    return sigma * rho


def _sign_summary(prob, x, est: Multipliers, beta_tol, alpha_tol):
    gam = est.gam
    pi = max(1.0, est.norm_inf())
    triggered = negative = 0
    for mult, vals, signed in (
        (est.lam, prob.g(x), est.lam),
        (est.mu, prob.h(x), est.mu),
        (gam, x, gam),
    ):
        hot = np.abs(mult) / pi >= beta_tol
        triggered += int(hot.sum())
        negative += int(np.sum(signed[hot] * vals[hot] <= -alpha_tol))
    return triggered, negative


def _ccop_feasible(prob, x_sparse, cfg) -> FeasibilityReport:
    return feasibility(prob, RelaxedPoint(x_sparse, pair_y_for_x(x_sparse, prob.kappa)), cfg.tol_active)


def solve(prob: CcopProblem, x0, cfg: SalmConfig = SalmConfig()) -> SalmResult:
    """Run the safeguarded augmented Lagrangian loop from ``x0``.

    The auxiliary variable starts as the complement indicator of the
    ``kappa`` largest entries of ``x0``.  The run stops once the relaxed
    iterate is feasible and the cardinality projection of ``x`` certifies
    as CC-M stationary; otherwise on penalty blow-up, iteration limit or
    repeated inner failures.
    """
    x = prob.check_x(x0).copy()
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    pt = RelaxedPoint(x, pair_y_for_x(x, prob.kappa))
    bar = project_safeguards(Multipliers.zeros(prob), cfg.bounds)
    rho = cfg.rho0
    trace = RunTrace()
    prev_score = None
    prev_failed = False
    seq = []
    status = SalmStatus.OUTER_LIMIT
    est = bar

    for k in range(1, cfg.max_outer + 1):
        eps_k = cfg.eps(k)
        res = minimize(prob, pt, bar, rho, replace(cfg.inner, eps=eps_k))
        pt = res.pt
        est = update_multipliers(prob, pt, bar, rho)
        prog = penalty_progress(prob, pt, bar, rho)
        rho_next = penalty_update(prev_score, prog.score, rho, cfg.tau, cfg.sigma, k)
        progress_ok = k == 1 or prev_score >= cfg.tau * prog.score

        feas = feasibility(prob, pt, cfg.tol_active)
        x_sparse = project_to_cardinality(pt.x, prob.kappa)
        report = _ccm_quiet(prob, x_sparse, cfg)
        triggered, negative = _sign_summary(prob, pt.x, _scaled_gam(est, pt), cfg.beta_tol, cfg.alpha_tol)
        seq.append((pt.x, est.lam, est.mu, est.gam * pt.y))

        trace.rows.append(
            TraceRow(
                k=k,
                rho=rho,
                rho_next=rho_next,
                progress_ok=progress_ok,
                eps=eps_k,
                score=prog.score,
                viol_g=feas.viol_g,
                viol_h=feas.viol_h,
                viol_comp=feas.viol_comp,
                viol_card=feas.viol_card,
                viol_box=feas.viol_box,
                viol_l0=feas.viol_l0,
                mult_norm=est.norm_inf(),
                inner_iters=res.iters,
                inner_evals=res.f_evals,
                inner_status=res.status.value,
                grad_norm=res.grad_norm,
                objective=prob.f(pt.x),
                ccm_residual=report.residual,
                sign_triggered=triggered,
                sign_negative=negative,
            )
        )

        feasible = feas.is_feasible(cfg.tol_feas)
        if feasible and _ccop_feasible(prob, x_sparse, cfg).is_feasible(cfg.tol_feas) and report.residual <= cfg.tol_opt:
            status = SalmStatus.CCM_STATIONARY
            break
        if res.status is InnerStatus.DIVERGED:
            status = SalmStatus.INNER_FAILURE
            break
        failed = res.status is not InnerStatus.CONVERGED
        if failed and prev_failed and rho_next == rho:
            status = SalmStatus.INNER_FAILURE
            break
        prev_failed = failed
        if rho_next > cfg.rho_max:
            status = SalmStatus.RHO_LIMIT if feasible else SalmStatus.INFEASIBLE
            break

        prev_score = prog.score
        rho = rho_next
        bar = project_safeguards(est, cfg.bounds)

    x_sparse = project_to_cardinality(pt.x, prob.kappa)
    report = _ccm_quiet(prob, x_sparse, cfg)
    diag = sequence_diagnostics(
        prob,
        _zero_support(seq, x_sparse, cfg.tol_active),
        x_sparse,
        tol_active=cfg.tol_active,
        beta_tol=cfg.beta_tol,
        alpha_tol=cfg.alpha_tol,
    )
    cert = Certificate(
        ccm=report,
        ccs_pair=ccs_from_ccm(prob, x_sparse, report, tol_opt=cfg.tol_opt),
        ccam_ok=diag.ccam,
        ccpam_ok=diag.ccpam,
        diagnostics=diag,
    )
    return SalmResult(
        pt=pt,
        x_sparse=x_sparse,
        multipliers=est,
        trace=trace,
        status=status,
        certificate=cert,
        objective=prob.f(x_sparse),
        feasibility=_ccop_feasible(prob, x_sparse, cfg),
    )


def _scaled_gam(est: Multipliers, pt: RelaxedPoint) -> Multipliers:
    # the x-stationarity of the relaxation carries gam * y, not gam
    return Multipliers(est.lam, est.mu, est.gam * pt.y, est.delta, est.eta)


def _zero_support(seq, x_star, tol_active):
    # drop the gam entries on the support of the limit point, as in the
    # construction of a sequential witness from the algorithm's iterates
    support = np.abs(x_star) > tol_active
    out = []
    for x, lam, mu, gam in seq:
        gam = np.where(support, 0.0, gam)
        out.append((x, lam, mu, gam))
    return out


def _ccm_quiet(prob, x, cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ccm_residual(prob, x, cfg.tol_active, cfg.tol_feas)
