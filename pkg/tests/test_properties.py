import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ccsalm import (
    Multipliers,
    RelaxedPoint,
    SafeguardBounds,
    auglag_gradient,
    feasibility,
    pair_y_for_x,
    penalty_update,
    project_safeguards,
    project_to_cardinality,
    update_multipliers,
)
from ccsalm.nnls import nnls
from ccsalm.serialize import format_float
from helpers import pg_nnls, random_problem

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def vector_and_kappa(draw):
    n = draw(st.integers(1, 8))
    x = draw(arrays(float, n, elements=finite))
    return x, draw(st.integers(0, n))


@given(vector_and_kappa())
def test_projection_keeps_largest_entries(data):
    x, kappa = data
    p = project_to_cardinality(x, kappa)
    assert np.count_nonzero(p) <= kappa
    kept = p != 0
    assert np.all(p[kept] == x[kept])
    if kept.any() and (~kept).any():
        assert np.min(np.abs(x[kept])) >= np.max(np.abs(x[~kept]))


@given(vector_and_kappa())
def test_pair_y_is_feasible_partner(data):
    x, kappa = data
    p = project_to_cardinality(x, kappa)
    y = pair_y_for_x(p, kappa)
    assert set(np.unique(y)) <= {0.0, 1.0}
    assert y.sum() >= len(x) - kappa
    assert np.all(p * y == 0)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_feasibility_fields_nonnegative(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    rep = feasibility(prob, RelaxedPoint(rng.normal(size=prob.n), rng.normal(size=prob.n)))
    assert min(rep.viol_g, rep.viol_h, rep.viol_comp, rep.viol_card, rep.viol_box, rep.viol_l0) >= 0


@given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
@settings(max_examples=60, deadline=None)
def test_gradient_identity(seed, rho):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    n = prob.n
    bar = Multipliers(rng.uniform(0, 3, prob.m), rng.normal(size=prob.p), rng.normal(size=n), 1.0, rng.uniform(0, 1, n))
    pt = RelaxedPoint(rng.normal(size=n), rng.normal(size=n))
    gx, _ = auglag_gradient(prob, pt, bar, rho)
    est = update_multipliers(prob, pt, bar, rho)
    direct = prob.df(pt.x) + prob.dg(pt.x) @ est.lam + prob.dh(pt.x) @ est.mu + est.gam * pt.y
    assert np.max(np.abs(gx - direct)) <= 1e-12 * max(1.0, np.max(np.abs(direct)))
    assert np.all(est.lam >= 0) and est.delta >= 0 and np.all(est.eta >= 0)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_safeguard_projection_idempotent(seed):
    rng = np.random.default_rng(seed)
    bounds = SafeguardBounds(lam_max=2.0, mu_min=-1.0, mu_max=1.0, gam_min=-1.5, gam_max=1.5, delta_max=3.0, eta_max=0.5)
    est = Multipliers(rng.uniform(0, 5, 3), rng.normal(scale=3, size=2), rng.normal(scale=3, size=4), 4.0, rng.uniform(0, 2, 4))
    once = project_safeguards(est, bounds)
    twice = project_safeguards(once, bounds)
    for name in ("lam", "mu", "gam", "eta"):
        np.testing.assert_array_equal(getattr(once, name), getattr(twice, name))
    assert np.all(once.lam <= 2.0) and np.all(np.abs(once.mu) <= 1.0) and once.delta <= 3.0


@given(st.floats(0, 10), st.floats(0, 10), st.floats(1e-3, 1e6), st.floats(1.01, 10), st.floats(1.01, 100), st.integers(1, 50))
def test_penalty_update_two_outcomes(prev, cur, rho, tau, sigma, k):
    out = penalty_update(prev, cur, rho, tau, sigma, k)
    assert out in (rho, sigma * rho)
    assert (out == rho) == (k == 1 or prev >= tau * cur)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_nnls_matches_projected_gradient(seed):
    rng = np.random.default_rng(seed)
    r, k = rng.integers(1, 6, size=2)
    A = rng.normal(size=(r, k))
    b = rng.normal(size=r)
    mask = rng.random(k) < 0.6
    z, rn = nnls(A, b, nonneg=mask)
    assert np.all(z[mask] >= 0)
    # the fixed-step oracle can stop short of the optimum, never below it
    _, ref = pg_nnls(A, b, mask, iters=50_000, tol=1e-14)
    assert rn <= ref + 1e-9


@given(st.floats(allow_nan=False))
def test_float_format_round_trip(v):
    s = format_float(v)
    if math.isinf(v):
        assert s in ("Infinity", "-Infinity")
    else:
        assert float(s) == v
