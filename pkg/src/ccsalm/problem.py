"""Problem definitions for cardinality-constrained programs.

A :class:`CcopProblem` bundles the smooth data ``f, g, h`` (with first
derivatives) and the sparsity bound ``kappa``::

    min f(x)  s.t.  g(x) <= 0,  h(x) = 0,  ||x||_0 <= kappa

The continuous relaxation works on pairs ``(x, y)`` with the constraints
``x * y = 0``, ``n - kappa - sum(y) <= 0`` and ``y <= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "CcopProblem",
    "EvaluationError",
    "FeasibilityReport",
    "IndexSets",
    "RelaxedPoint",
    "classify_indices",
    "feasibility",
    "pair_y_for_x",
    "project_to_cardinality",
]

DEFAULT_TOL_ACTIVE = 1e-6

Vector = np.ndarray
_EMPTY = np.zeros(0)
_EMPTY.setflags(write=False)


class EvaluationError(FloatingPointError):
    """An evaluator returned a non-finite value."""


def _no_constraints(n: int) -> tuple[Callable, Callable]:
    def values(x):
        return np.zeros(0)

    def jac(x):
        return np.zeros((n, 0))

    return values, jac


@dataclass(frozen=True)
class CcopProblem:
    """Smooth program with a cardinality bound.

    Jacobians follow the column convention: ``jac_g(x)`` has shape
    ``(n, m)`` and its ``i``-th column is the gradient of ``g_i``.

    ``kappa == n`` is accepted (the bound is then vacuous); this is how
    restricted, cardinality-free problems reuse the same machinery.
    """

    n: int
    kappa: int
    eval_f: Callable[[Vector], float]
    grad_f: Callable[[Vector], Vector]
    m: int = 0
    p: int = 0
    eval_g: Callable[[Vector], Vector] | None = None
    jac_g: Callable[[Vector], Vector] | None = None
    eval_h: Callable[[Vector], Vector] | None = None
    jac_h: Callable[[Vector], Vector] | None = None
    name: str = "ccop"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 <= self.kappa <= self.n:
            raise ValueError(f"kappa must lie in [0, n={self.n}], got {self.kappa}")
        if self.m < 0 or self.p < 0:
            raise ValueError("constraint counts must be nonnegative")
        for count, ev, jac, label in (
            (self.m, self.eval_g, self.jac_g, "g"),
            (self.p, self.eval_h, self.jac_h, "h"),
        ):
            if count > 0 and (ev is None or jac is None):
                raise ValueError(f"{label} has {count} rows but no evaluator/jacobian")
            if ev is None:
                ev, jac = _no_constraints(self.n)
                object.__setattr__(self, f"eval_{label}", ev)
                object.__setattr__(self, f"jac_{label}", jac)

    # -- checked evaluation --------------------------------------------------
    def f(self, x: Vector) -> float:
        val = float(self.eval_f(x))
        if not math.isfinite(val):
            raise EvaluationError(f"{self.name}: f(x) is not finite")
        return val

    def df(self, x: Vector) -> Vector:
        return self._checked(self.grad_f(x), (self.n,), "grad f")

    def g(self, x: Vector) -> Vector:
        if not self.m:
            return _EMPTY
        return self._checked(self.eval_g(x), (self.m,), "g")

    def dg(self, x: Vector) -> Vector:
        return self._checked(self.jac_g(x), (self.n, self.m), "jac g")

    def h(self, x: Vector) -> Vector:
        if not self.p:
            return _EMPTY
        return self._checked(self.eval_h(x), (self.p,), "h")

    def dh(self, x: Vector) -> Vector:
        return self._checked(self.jac_h(x), (self.n, self.p), "jac h")

    def _checked(self, value, shape, label) -> np.ndarray:
        arr = np.asarray(value, dtype=float).reshape(shape)
        # a finite sum is the cheap common case; overflow falls through to the exact test
        if not math.isfinite(arr.sum()) and not np.isfinite(arr).all():
            raise EvaluationError(f"{self.name}: {label} has non-finite entries")
        return arr

    def check_x(self, x) -> Vector:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected a vector of length {self.n}, got shape {x.shape}")
        return x


@dataclass(frozen=True)
class RelaxedPoint:
    x: Vector
    y: Vector

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("x and y must be vectors of equal length")


@dataclass(frozen=True)
class IndexSets:
    """Numerical active sets; indices are zero-based."""

    active_g: tuple[int, ...]
    zero_x: tuple[int, ...]
    nonzero_x: tuple[int, ...]
    tol_active: float


@dataclass(frozen=True)
class FeasibilityReport:
    viol_g: float
    viol_h: float
    viol_comp: float
    viol_card: float
    viol_box: float
    viol_l0: int

    @property
    def relaxation_violation(self) -> float:
        """Largest violation among the five relaxation rows."""
        return max(self.viol_g, self.viol_h, self.viol_comp, self.viol_card, self.viol_box)

    def is_feasible(self, tol_feas: float) -> bool:
        return self.relaxation_violation <= tol_feas


def classify_indices(prob: CcopProblem, x, tol_active: float = DEFAULT_TOL_ACTIVE) -> IndexSets:
    if tol_active <= 0:
        raise ValueError("tol_active must be positive")
    x = prob.check_x(x)
    g = prob.g(x)
    zero = np.abs(x) <= tol_active
    return IndexSets(
        active_g=tuple(int(i) for i in np.flatnonzero(np.abs(g) <= tol_active)),
        zero_x=tuple(int(i) for i in np.flatnonzero(zero)),
        nonzero_x=tuple(int(i) for i in np.flatnonzero(~zero)),
        tol_active=tol_active,
    )


def feasibility(prob: CcopProblem, pt: RelaxedPoint, tol_active: float = DEFAULT_TOL_ACTIVE) -> FeasibilityReport:
    x = prob.check_x(pt.x)
    y = prob.check_x(pt.y)
    g = prob.g(x)
    h = prob.h(x)
    support = int(np.count_nonzero(np.abs(x) > tol_active))
    return FeasibilityReport(
        viol_g=float(np.max(np.maximum(g, 0.0), initial=0.0)),
        viol_h=float(np.max(np.abs(h), initial=0.0)),
        viol_comp=float(np.max(np.abs(x * y), initial=0.0)),
        viol_card=float(max(prob.n - prob.kappa - y.sum(), 0.0)),
        viol_box=float(np.max(np.maximum(y - 1.0, 0.0), initial=0.0)),
        viol_l0=max(support - prob.kappa, 0),
    )


def _top_indices(x: Vector, kappa: int) -> np.ndarray:
    # stable sort on -|x| keeps the lowest index first among ties
    order = np.argsort(-np.abs(x), kind="stable")
    return order[:kappa]


def pair_y_for_x(x, kappa: int) -> Vector:
    """Auxiliary vector that zeros the ``kappa`` largest-magnitude slots of ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.ones_like(x)
    y[_top_indices(x, kappa)] = 0.0
    return y


def project_to_cardinality(x, kappa: int) -> Vector:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    keep = _top_indices(x, kappa)
    out[keep] = x[keep]
    return out
