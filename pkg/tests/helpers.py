"""Independent reference computations used across the test suite."""

from __future__ import annotations

import numpy as np

from ccsalm.instances import InstanceSpec, build_problem, load_instance


def ex31():
    return load_instance("example_3_1")


def ex32():
    return load_instance("example_3_2")


def central_diff(fun, x, h=1e-6):
    """Central differences of a scalar or vector function; columns index x."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x), dtype=float)
    out = np.empty((x.size,) + f0.shape)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * h)
    return out


def rel_err(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b), initial=0.0) / max(1.0, np.max(np.abs(b), initial=0.0)))


def pg_nnls(A, b, nonneg, iters=200_000, tol=1e-15):
    """Projected gradient on ``0.5 |Az - b|^2`` with ``z[nonneg] >= 0``.

    Deliberately naive: fixed step ``1/L``, no active-set logic.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    k = A.shape[1]
    z = np.zeros(k)
    if k == 0 or A.shape[0] == 0:
        return z, float(np.linalg.norm(b))
    L = max(float(np.linalg.norm(A, 2)) ** 2, 1e-300)
    for _ in range(iters):
        grad = A.T @ (A @ z - b)
        z_new = z - grad / L
        z_new[nonneg] = np.maximum(z_new[nonneg], 0.0)
        if np.max(np.abs(z_new - z)) <= tol:
            z = z_new
            break
        z = z_new
    return z, float(np.linalg.norm(A @ z - b))


def random_spec(rng, n=None, m=None, p=None, kappa=None) -> InstanceSpec:
    """Random quadratic objective with a mix of affine and quadratic rows."""
    n = int(rng.integers(2, 7)) if n is None else n
    m = int(rng.integers(0, 4)) if m is None else m
    p = int(rng.integers(0, 3)) if p is None else p
    kappa = int(rng.integers(1, n)) if kappa is None else kappa

    def sym():
        B = rng.standard_normal((n, n))
        return (B + B.T).tolist()

    rows = []
    for kind, count in (("ineq", m), ("eq", p)):
        for _ in range(count):
            row = {"kind": kind, "form": "affine", "a": rng.standard_normal(n).tolist(), "b": float(rng.standard_normal())}
            if rng.random() < 0.5:
                row["form"] = "quadratic"
                row["Q"] = sym()
            rows.append(row)
    return InstanceSpec(
        name="random",
        n=n,
        m=m,
        p=p,
        kappa=kappa,
        objective={"quadratic": {"Q": sym(), "c": rng.standard_normal(n).tolist(), "const": float(rng.standard_normal())}},
        constraints=rows,
    )


def random_problem(rng, **kw):
    return build_problem(random_spec(rng, **kw))


# criterion number -> (passed, detail); filled by test_acceptance, printed by conftest
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
