import numpy as np
import pytest

from ccsalm import (
    CcopProblem,
    EvaluationError,
    RelaxedPoint,
    classify_indices,
    feasibility,
    pair_y_for_x,
    project_to_cardinality,
)
from helpers import ex31, ex32


def test_classify_spurious_point():
    sets = classify_indices(ex31(), [0.5, 1.0, 0.0], 1e-8)
    assert sets.active_g == (0,)
    assert sets.zero_x == (2,)
    assert sets.nonzero_x == (0, 1)


def test_classify_zero_vector():
    sets = classify_indices(ex32(), np.zeros(2))
    assert sets.zero_x == (0, 1)
    assert sets.nonzero_x == ()


def test_classify_nothing_active():
    prob = CcopProblem(
        n=3,
        kappa=1,
        m=1,
        eval_f=lambda x: 0.0,
        grad_f=np.zeros_like,
        eval_g=lambda x: np.array([-1.0 - x @ x]),
        jac_g=lambda x: (-2 * x).reshape(3, 1),
    )
    x = np.array([1.5, -2.0, 3.0])
    sets = classify_indices(prob, x)
    assert sets.active_g == () and sets.zero_x == ()


def test_classify_rejects_bad_input():
    with pytest.raises(ValueError):
        classify_indices(ex32(), np.zeros(3))
    with pytest.raises(ValueError):
        classify_indices(ex32(), np.zeros(2), tol_active=0.0)


def test_feasibility_global_solutions():
    rep = feasibility(ex32(), RelaxedPoint([1.0, 0.0], [0.0, 1.0]))
    assert rep.relaxation_violation == 0.0 and rep.viol_l0 == 0
    rep = feasibility(ex31(), RelaxedPoint([1.0, 1.0, 0.0], [0.0, 0.0, 1.0]))
    assert rep.relaxation_violation == 0.0 and rep.viol_l0 == 0


def test_feasibility_complementarity_violation():
    rep = feasibility(ex32(), RelaxedPoint([1.0, 1.0], [1.0, 1.0]))
    assert rep.viol_comp == 1.0
    assert rep.viol_l0 == 1
    assert not rep.is_feasible(1e-6)


def test_feasibility_card_and_box_rows():
    rep = feasibility(ex32(), RelaxedPoint([0.0, 0.0], [0.0, 0.0]))
    assert rep.viol_card == 1.0
    rep = feasibility(ex32(), RelaxedPoint([0.0, 0.0], [1.5, 0.0]))
    assert rep.viol_box == 0.5 and rep.viol_card == 0.0


def test_feasibility_surfaces_nonfinite():
    prob = CcopProblem(n=2, kappa=1, eval_f=lambda x: np.nan, grad_f=np.zeros_like)
    with pytest.raises(EvaluationError):
        prob.f(np.zeros(2))
    bad_g = CcopProblem(
        n=2,
        kappa=1,
        m=1,
        eval_f=lambda x: 0.0,
        grad_f=np.zeros_like,
        eval_g=lambda x: np.array([np.inf]),
        jac_g=lambda x: np.zeros((2, 1)),
    )
    with pytest.raises(EvaluationError):
        feasibility(bad_g, RelaxedPoint([0.0, 0.0], [1.0, 1.0]))


def test_pair_y_examples():
    assert pair_y_for_x([0.9, 0.0, 0.1], 2).tolist() == [0.0, 1.0, 0.0]
    assert pair_y_for_x([0.0, 0.0], 1).tolist() == [0.0, 1.0]
    y = pair_y_for_x([1.0, 1.0, 0.0], 2)
    assert y.tolist() == [0.0, 0.0, 1.0]
    assert feasibility(ex31(), RelaxedPoint([1.0, 1.0, 0.0], y)).relaxation_violation == 0.0


def test_project_examples():
    assert project_to_cardinality([0.3, -0.7, 0.1], 1).tolist() == [0.0, -0.7, 0.0]
    assert project_to_cardinality([1.0, 1.0, 0.0], 2).tolist() == [1.0, 1.0, 0.0]
    assert project_to_cardinality([2.0, -2.0, 1.0], 1).tolist() == [2.0, 0.0, 0.0]


def test_problem_validation():
    with pytest.raises(ValueError):
        CcopProblem(n=2, kappa=3, eval_f=lambda x: 0.0, grad_f=np.zeros_like)
    with pytest.raises(ValueError):
        CcopProblem(n=2, kappa=1, m=1, eval_f=lambda x: 0.0, grad_f=np.zeros_like)
