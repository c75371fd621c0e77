"""Augmented Lagrangian of the relaxed cardinality problem.

The five constraint blocks of the relaxation carry the multipliers
``lam`` (g <= 0), ``mu`` (h = 0), ``gam`` (x*y = 0), ``delta``
(n - kappa - sum(y) <= 0) and ``eta`` (y <= 1).  For a penalty ``rho``::

    L = f + rho/2 * ( |(g + lam/rho)_+|^2 + |h + mu/rho|^2 + |x*y + gam/rho|^2
                      + ((n - kappa - sum(y) + delta/rho)_+)^2 + |(y - 1 + eta/rho)_+|^2 )
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import CcopProblem, RelaxedPoint

__all__ = [
    "Multipliers",
    "PenaltyProgress",
    "SafeguardBounds",
    "auglag_gradient",
    "auglag_value",
    "penalty_progress",
    "project_safeguards",
    "update_multipliers",
]


@dataclass(frozen=True)
class Multipliers:
    lam: np.ndarray
    mu: np.ndarray
    gam: np.ndarray
    delta: float
    eta: np.ndarray

    def __post_init__(self):
        for name in ("lam", "mu", "gam", "eta"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        object.__setattr__(self, "delta", float(self.delta))
        if np.any(self.lam < 0) or np.any(self.eta < 0) or self.delta < 0:
            raise ValueError("lam, delta and eta must be nonnegative")

    @classmethod
    def zeros(cls, prob: CcopProblem) -> "Multipliers":
        return cls(np.zeros(prob.m), np.zeros(prob.p), np.zeros(prob.n), 0.0, np.zeros(prob.n))

    def norm_inf(self) -> float:
        return float(
            max(
                np.max(np.abs(self.lam), initial=0.0),
                np.max(np.abs(self.mu), initial=0.0),
                np.max(np.abs(self.gam), initial=0.0),
                abs(self.delta),
                np.max(np.abs(self.eta), initial=0.0),
            )
        )


@dataclass(frozen=True)
class SafeguardBounds:
    """Boxes for the safeguarded multipliers.

    The defaults are wide enough that projection is inactive on benign
    problems, so the method behaves like a classical augmented Lagrangian.
    """

    lam_max: float = 1e20
    mu_min: float = -1e20
    mu_max: float = 1e20
    gam_min: float = -1e20
    gam_max: float = 1e20
    delta_max: float = 1e20
    eta_max: float = 1e20

    def __post_init__(self):
        if not (self.mu_min < self.mu_max and self.gam_min < self.gam_max):
            raise ValueError("safeguard boxes need min < max")
        if min(self.lam_max, self.delta_max, self.eta_max) <= 0:
            raise ValueError("lam_max, delta_max and eta_max must be positive")


@dataclass(frozen=True)
class PenaltyProgress:
    u: np.ndarray
    hval: np.ndarray
    comp: np.ndarray
    v: float
    r: np.ndarray
    score: float


def _check_rho(rho: float) -> None:
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")


def _shifted(prob: CcopProblem, x, y, bar: Multipliers, rho: float):
    """Residual blocks and the first-order multiplier estimates they induce."""
    g = prob.g(x)
    h = prob.h(x)
    comp = x * y
    card = prob.n - prob.kappa - float(y.sum())
    box = y - 1.0
    lam = np.maximum(rho * g + bar.lam, 0.0) if prob.m else g
    mu = rho * h + bar.mu if prob.p else h
    gam = rho * comp + bar.gam
    delta = max(rho * card + bar.delta, 0.0)
    eta = np.maximum(rho * box + bar.eta, 0.0)
    return (g, h, comp, card, box), (lam, mu, gam, delta, eta)


def _sq(v) -> float:
    return float(v @ v)


def _value(prob, x, y, bar, rho, blocks) -> float:
    g, h, comp, card, box = blocks
    penalty = _sq(comp + bar.gam / rho) + max(card + bar.delta / rho, 0.0) ** 2
    penalty += _sq(np.maximum(box + bar.eta / rho, 0.0))
    if prob.m:
        penalty += _sq(np.maximum(g + bar.lam / rho, 0.0))
    if prob.p:
        penalty += _sq(h + bar.mu / rho)
    return prob.f(x) + 0.5 * rho * penalty


def _gradient(prob, x, y, est):
    lam, mu, gam, delta, eta = est
    gx = prob.df(x)
    if prob.m:
        gx = gx + prob.dg(x) @ lam
    if prob.p:
        gx = gx + prob.dh(x) @ mu
    gx = gx + gam * y
    gy = gam * x - delta + eta
    return gx, gy


def value_and_gradient(prob: CcopProblem, x, y, bar: Multipliers, rho: float):
    """Value and ``(x, y)``-gradient sharing one pass over ``g`` and ``h``."""
    blocks, est = _shifted(prob, x, y, bar, rho)
    gx, gy = _gradient(prob, x, y, est)
    return _value(prob, x, y, bar, rho, blocks), gx, gy


def auglag_value(prob: CcopProblem, pt: RelaxedPoint, bar: Multipliers, rho: float) -> float:
    _check_rho(rho)
    x, y = prob.check_x(pt.x), prob.check_x(pt.y)
    blocks, _ = _shifted(prob, x, y, bar, rho)
    return _value(prob, x, y, bar, rho, blocks)


def auglag_gradient(prob: CcopProblem, pt: RelaxedPoint, bar: Multipliers, rho: float):
    """Return ``(grad_x L, grad_y L)``."""
    _check_rho(rho)
    x, y = prob.check_x(pt.x), prob.check_x(pt.y)
    _, est = _shifted(prob, x, y, bar, rho)
    return _gradient(prob, x, y, est)


def update_multipliers(prob: CcopProblem, pt: RelaxedPoint, bar: Multipliers, rho: float) -> Multipliers:
    _check_rho(rho)
    x, y = prob.check_x(pt.x), prob.check_x(pt.y)
    return Multipliers(*_shifted(prob, x, y, bar, rho)[1])


def penalty_progress(prob: CcopProblem, pt: RelaxedPoint, bar: Multipliers, rho: float) -> PenaltyProgress:
    """Infeasibility/complementarity measures compared by the penalty test."""
    _check_rho(rho)
    x, y = prob.check_x(pt.x), prob.check_x(pt.y)
    g = prob.g(x)
    hval = prob.h(x)
    comp = x * y
    u = np.minimum(-g, bar.lam / rho)
    v = min(-(prob.n - prob.kappa - y.sum()), bar.delta / rho)
    r = np.minimum(-(y - 1.0), bar.eta / rho)
    score = max(
        np.linalg.norm(u), np.linalg.norm(hval), np.linalg.norm(comp), abs(v), np.linalg.norm(r)
    )
    return PenaltyProgress(u=u, hval=hval, comp=comp, v=float(v), r=r, score=float(score))


def project_safeguards(est: Multipliers, bounds: SafeguardBounds) -> Multipliers:
    return Multipliers(
        lam=np.clip(est.lam, 0.0, bounds.lam_max),
        mu=np.clip(est.mu, bounds.mu_min, bounds.mu_max),
        gam=np.clip(est.gam, bounds.gam_min, bounds.gam_max),
        delta=min(max(est.delta, 0.0), bounds.delta_max),
        eta=np.clip(est.eta, 0.0, bounds.eta_max),
    )
