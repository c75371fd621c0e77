"""Spectral gradient minimization of the augmented Lagrangian in ``(x, y)``.

Barzilai-Borwein step lengths with a nonmonotone Armijo backtracking test
against the maximum of the last few accepted values (Grippo, Lampariello
and Lucidi).  The objective is C^1 with kinks in its gradient, which this
method tolerates without second-order information.
"""

from __future__ import annotations

import enum
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .auglag import Multipliers, auglag_gradient, value_and_gradient
from .problem import CcopProblem, RelaxedPoint

__all__ = ["DivergenceWarning", "InnerConfig", "InnerResult", "InnerStatus", "minimize"]

_ROUNDOFF = 16 * np.finfo(float).eps
_ABB_RATIO = 0.8


class DivergenceWarning(RuntimeWarning):
    """Iterates left the trust radius; the level set is probably unbounded."""


class InnerStatus(str, enum.Enum):
    CONVERGED = "Converged"
    ITER_LIMIT = "IterLimit"
    LINE_SEARCH_FAIL = "LineSearchFail"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class InnerConfig:
    """Inner solver settings.

    ``step_rule`` picks the spectral step: ``"bb1"`` (long step ``s's/s'y``),
    ``"bb2"`` (short step ``s'y/y'y``) or ``"abb"`` (short step whenever it
    is below 0.8 times the long one).
    """

    eps: float = 1e-6
    max_iters: int = 5000
    ls_shrink: float = 0.5
    ls_c1: float = 1e-4
    bb_clip: tuple[float, float] = (1e-10, 1e10)
    nonmonotone_window: int = 10
    max_backtracks: int = 60
    step_rule: str = "bb1"
    trust_radius: float = 1e8

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not (0 < self.ls_shrink < 1 and 0 < self.ls_c1 < 1):
            raise ValueError("ls_shrink and ls_c1 must lie in (0, 1)")
        lo, hi = self.bb_clip
        if not 0 < lo <= hi:
            raise ValueError("bb_clip must satisfy 0 < lo <= hi")
        if self.step_rule not in ("bb1", "bb2", "abb"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")
        if self.max_iters < 0 or self.nonmonotone_window < 1:
            raise ValueError("max_iters >= 0 and nonmonotone_window >= 1 required")


@dataclass(frozen=True)
class InnerResult:
    pt: RelaxedPoint
    grad_norm: float
    iters: int
    status: InnerStatus
    f_evals: int
    value: float


def minimize(
    prob: CcopProblem,
    start: RelaxedPoint,
    bar: Multipliers,
    rho: float,
    cfg: InnerConfig = InnerConfig(),
) -> InnerResult:
    """Drive ``|grad L(x, y)|`` below ``cfg.eps`` from ``start``.

    On failure the best iterate seen (smallest gradient norm) is returned;
    every returned point has an augmented Lagrangian value no larger than
    at ``start``.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    n = prob.n
    lo, hi = cfg.bb_clip

    def evaluate(z):
        val, gx, gy = value_and_gradient(prob, z[:n], z[n:], bar, rho)
        return val, np.concatenate([gx, gy])

    z = np.concatenate([prob.check_x(start.x), prob.check_x(start.y)])
    val, grad = evaluate(z)
    evals = 1
    val0 = val
    gnorm = float(np.linalg.norm(grad))
    best = (gnorm, z, val)
    history = deque([val], maxlen=cfg.nonmonotone_window)
    alpha = min(max(1.0 / max(np.max(np.abs(grad)), 1e-300), lo), hi)
    status = InnerStatus.ITER_LIMIT
    it = 0

    while True:
        if gnorm <= cfg.eps:
            status = InnerStatus.CONVERGED
            break
        if it >= cfg.max_iters:
            break
        it += 1
        d = -alpha * grad
        slope = float(grad @ d)
        ref = max(history)
        noise = _ROUNDOFF * max(1.0, abs(ref))
        t = 1.0
        for _ in range(cfg.max_backtracks):
            z_new = z + t * d
            val_new, grad_new = evaluate(z_new)
            evals += 1
            decrease = cfg.ls_c1 * t * slope
            if val_new <= ref + decrease:
                break
            # once the required decrease drops below the rounding of L, fall
            # back to the derivative form of the Armijo test on the segment
            if -decrease <= noise and val_new <= min(ref, val0) + noise:
                if float(grad_new @ d) <= (2 * cfg.ls_c1 - 1) * slope:
                    break
            t *= cfg.ls_shrink
        else:
            status = InnerStatus.LINE_SEARCH_FAIL
            break
        s = z_new - z
        yv = grad_new - grad
        z, val, grad = z_new, val_new, grad_new
        gnorm = float(np.linalg.norm(grad))
        history.append(val)
        if gnorm < best[0]:
            best = (gnorm, z, val)
        if np.max(np.abs(z)) > cfg.trust_radius:
            status = InnerStatus.DIVERGED
            warnings.warn(
                f"{prob.name}: inner iterates left the trust radius {cfg.trust_radius:g}; "
                "the augmented Lagrangian level set looks unbounded",
                DivergenceWarning,
                stacklevel=2,
            )
            break
        sty = float(s @ yv)
        if sty > 0:
            long_step = float(s @ s) / sty
            short_step = sty / float(yv @ yv)
            if cfg.step_rule == "bb1":
                alpha = long_step
            elif cfg.step_rule == "bb2" or short_step < _ABB_RATIO * long_step:
                alpha = short_step
            else:
                alpha = long_step
            alpha = min(max(alpha, lo), hi)

    if status is not InnerStatus.CONVERGED and status is not InnerStatus.DIVERGED:
        gnorm, z, val = best
    pt = RelaxedPoint(z[:n].copy(), z[n:].copy())
    gx, gy = auglag_gradient(prob, pt, bar, rho)
    gnorm = float(np.linalg.norm(np.concatenate([gx, gy])))
    return InnerResult(pt=pt, grad_norm=gnorm, iters=it, status=status, f_evals=evals, value=val)
