import numpy as np
import pytest
from scipy.optimize import lsq_linear
from scipy.optimize import nnls as scipy_nnls

from ccsalm.nnls import nnls
from helpers import pg_nnls


def test_all_nonneg_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(50):
        r, k = rng.integers(1, 8, size=2)
        A = rng.normal(size=(r, k))
        b = rng.normal(size=r)
        z, rn = nnls(A, b)
        _, ref = scipy_nnls(A, b)
        assert np.all(z >= 0)
        assert abs(rn - ref) <= 1e-10


def test_mixed_signs_match_bounded_lsq():
    rng = np.random.default_rng(1)
    for _ in range(50):
        r, k = rng.integers(1, 8, size=2)
        A = rng.normal(size=(r, k))
        b = rng.normal(size=r)
        mask = rng.random(k) < 0.5
        z, rn = nnls(A, b, nonneg=mask)
        lb = np.where(mask, 0.0, -np.inf)
        ref = lsq_linear(A, b, bounds=(lb, np.full(k, np.inf)), tol=1e-14, method="bvls")
        assert np.all(z[mask] >= 0)
        assert abs(rn - np.linalg.norm(A @ ref.x - b)) <= 1e-9


def test_agrees_with_projected_gradient():
    rng = np.random.default_rng(2)
    for _ in range(10):
        A = rng.normal(size=(4, 3))
        b = rng.normal(size=4)
        mask = np.array([True, True, False])
        _, rn = nnls(A, b, nonneg=mask)
        _, ref = pg_nnls(A, b, mask)
        assert abs(rn - ref) <= 1e-10


def test_rank_deficient():
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([2.0, 2.0])
    z, rn = nnls(A, b)
    assert rn <= 1e-12 and np.all(z >= 0)
    z, rn = nnls(A, -b)
    assert rn == pytest.approx(np.sqrt(8.0)) and np.all(z == 0)


def test_empty():
    z, rn = nnls(np.zeros((0, 2)), np.zeros(0))
    assert z.tolist() == [0.0, 0.0] and rn == 0.0
    z, rn = nnls(np.zeros((2, 0)), np.array([3.0, 4.0]))
    assert z.size == 0 and rn == 5.0
