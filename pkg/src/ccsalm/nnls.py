"""Active-set least squares with sign constraints on a subset of variables."""

from __future__ import annotations

import numpy as np

__all__ = ["nnls"]


def nnls(A, b, nonneg=None, maxiter=None):
    """Solve ``min ||A z - b||`` subject to ``z[nonneg] >= 0``.

    Lawson-Hanson active-set iteration; variables outside ``nonneg`` are
    free and stay in the passive set throughout.  Subproblems are solved
    with a minimum-norm least-squares solve, so rank-deficient systems are
    handled without regularization (the minimizer is then not unique and
    any one of them is returned).

    Parameters
    ----------
    A : array_like, shape (r, k)
    b : array_like, shape (r,)
    nonneg : array_like of bool, shape (k,), optional
        Mask of sign-constrained variables (default: all of them).
    maxiter : int, optional
        Cap on outer iterations (default ``3 * k + 10``).

    Returns
    -------
    z : numpy.ndarray, shape (k,)
    rnorm : float
        Euclidean norm of ``A z - b``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    r, k = A.shape
    nonneg = np.ones(k, dtype=bool) if nonneg is None else np.asarray(nonneg, dtype=bool)
    if maxiter is None:
        maxiter = 3 * k + 10
    z = np.zeros(k)
    if k == 0 or r == 0:
        return z, float(np.linalg.norm(b))

    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)) * float(np.max(np.abs(b), initial=0.0)))
    tol = 10.0 * np.finfo(float).eps * max(r, k) * scale

    passive = ~nonneg.copy()

    def solve_passive():
        out = np.zeros(k)
        if passive.any():
            out[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
        return out

    z = solve_passive()
    for _ in range(maxiter):
        w = A.T @ (b - A @ z)
        cand = nonneg & ~passive & (w > tol)
        if not cand.any():
            break
        j = int(np.flatnonzero(cand)[np.argmax(w[cand])])
        passive[j] = True
        for _ in range(maxiter):
            trial = solve_passive()
            bad = passive & nonneg & (trial <= 0)
            if not bad.any():
                z = trial
                break
            # step toward trial until the first sign-constrained entry hits zero
            gap = z[bad] - trial[bad]
            ratios = np.divide(z[bad], gap, out=np.zeros_like(gap), where=gap > 0)
            step = float(np.min(ratios))
            z = z + step * (trial - z)
            leaving = passive & nonneg & (z <= tol)
            z[leaving] = 0.0
            passive &= ~leaving
        else:
            break
    z[nonneg] = np.maximum(z[nonneg], 0.0)
    return z, float(np.linalg.norm(A @ z - b))
