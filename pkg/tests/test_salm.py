import warnings

import numpy as np
import pytest

from ccsalm import (
    InnerConfig,
    Multipliers,
    RelaxedPoint,
    SafeguardBounds,
    SalmConfig,
    SalmStatus,
    ccm_residual,
    minimize,
    penalty_update,
    project_safeguards,
    solve,
    update_multipliers,
)
from ccsalm.instances import load_instance
from helpers import ex31, ex32


def test_penalty_update_examples():
    assert penalty_update(None, 5.0, 3.0, 2.0, 10.0, 1) == 3.0
    assert penalty_update(0.0, 5.0, 3.0, 2.0, 10.0, 1) == 3.0
    assert penalty_update(1.0, 0.1, 1.0, 2.0, 10.0, 2) == 1.0
    assert penalty_update(1.0, 0.9, 1.0, 2.0, 10.0, 2) == 10.0


def test_example_32_from_two_two():
    res = solve(ex32(), [2.0, 2.0])
    assert res.status is SalmStatus.CCM_STATIONARY
    assert min(np.max(np.abs(res.x_sparse - t)) for t in ([1.0, 0.0], [0.0, 1.0])) <= 1e-6
    assert abs(res.objective - 0.5) <= 1e-6
    assert res.trace.check_penalty_rule(10.0)


def test_example_31_from_ones():
    prob = ex31()
    res = solve(prob, [1.0, 1.0, 1.0])
    assert res.status is SalmStatus.CCM_STATIONARY
    assert res.feasibility.is_feasible(1e-6)
    assert res.certificate.ccm.residual <= 1e-6
    if np.max(np.abs(res.x_sparse - [1.0, 1.0, 0.0])) <= 1e-6:
        assert res.objective <= 1e-6


def test_stationary_exit_recertifies():
    for prob, x0 in ((ex31(), [1.0, 1.0, 1.0]), (ex32(), [2.0, 2.0]), (ex32(), [-1.0, 0.5])):
        res = solve(prob, x0)
        assert res.status is SalmStatus.CCM_STATIONARY
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert ccm_residual(prob, res.x_sparse).residual <= 1e-6


def test_infeasible_instance():
    res = solve(load_instance("infeasible"), [0.0, 0.0])
    assert res.status is SalmStatus.INFEASIBLE
    assert res.trace.rows[-1].rho == 1e12
    assert res.trace.check_penalty_rule(10.0)
    rhos = [r.rho for r in res.trace.rows]
    assert rhos == sorted(rhos)


def test_limits():
    res = solve(ex31(), [0.3, 1.0, 0.2], SalmConfig(max_outer=1))
    assert res.status in (SalmStatus.OUTER_LIMIT, SalmStatus.CCM_STATIONARY)
    res = solve(load_instance("infeasible"), [0.0, 0.0], SalmConfig(rho_max=100.0))
    assert res.status is SalmStatus.INFEASIBLE and res.trace.rows[-1].rho <= 100.0


def test_spurious_starts_never_certify_spuriously():
    prob = ex31()
    rng = np.random.default_rng(8)
    for a in rng.uniform(0.2, 0.8, 8):
        x0 = np.array([a, 1.0, 0.0]) + rng.normal(scale=1e-3, size=3)
        res = solve(prob, x0)
        if res.status is SalmStatus.CCM_STATIONARY:
            b, c, d = res.x_sparse
            on_spurious_line = abs(c - 1.0) <= 1e-3 and abs(d) <= 1e-3 and abs(b - 1.0) > 1e-3
            assert not on_spurious_line


def test_gradient_identity_along_the_run():
    # replay the outer loop by hand and check the identity at every k
    prob = ex31()
    cfg = SalmConfig()
    pt = RelaxedPoint([1.0, 1.0, 1.0], [0.0, 0.0, 1.0])
    bar = project_safeguards(Multipliers.zeros(prob), cfg.bounds)
    rho = cfg.rho0
    for k in range(1, 8):
        res = minimize(prob, pt, bar, rho, InnerConfig(eps=cfg.eps(k)))
        pt = res.pt
        est = update_multipliers(prob, pt, bar, rho)
        r = prob.df(pt.x) + prob.dg(pt.x) @ est.lam + est.gam * pt.y
        if res.status.value == "Converged":
            assert np.linalg.norm(r) <= cfg.eps(k)
        bar = project_safeguards(est, cfg.bounds)
        b = cfg.bounds
        assert np.all(bar.lam <= b.lam_max) and np.all(bar.gam >= b.gam_min) and np.all(bar.gam <= b.gam_max)


def test_deterministic_runs():
    a = solve(ex31(), [0.2, -0.4, 1.3])
    b = solve(ex31(), [0.2, -0.4, 1.3])
    assert a.trace.rows == b.trace.rows
    np.testing.assert_array_equal(a.pt.x, b.pt.x)


def test_config_validation():
    with pytest.raises(ValueError):
        SalmConfig(tau=1.0)
    with pytest.raises(ValueError):
        SalmConfig(sigma=0.5)
    with pytest.raises(ValueError):
        SalmConfig(eps_decay=1.5)
    with pytest.raises(ValueError):
        solve(ex32(), [np.nan, 0.0])
    cfg = SalmConfig()
    eps = [cfg.eps(k) for k in range(1, 30)]
    assert all(e > 0 for e in eps) and eps == sorted(eps, reverse=True)
    assert isinstance(cfg.bounds, SafeguardBounds)
