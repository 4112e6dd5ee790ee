import numpy as np
import pytest

from sglscreen import (
    ProblemData, SolveConfig, dpc_screen, lambda_max_nonneg, nn_estimation_ball, run_path,
    solve_nnlasso,
)
from sglscreen.dpc import certified_dual_point_nn
from sglscreen.tlfre import ScreeningOrderError

from conftest import random_problem

TIGHT = SolveConfig(tol_gap=1e-12, max_iter=200000)


def nn_problem(seed, n=20, p=50):
    return random_problem(n, p, p, seed=seed)


def test_certified_point_is_feasible():
    data = nn_problem(0)
    lam = 0.3 * lambda_max_nonneg(data).lambda_max
    rng = np.random.default_rng(1)
    theta, gap = certified_dual_point_nn(np.abs(rng.standard_normal(50)), data, lam)
    assert np.max(data.x.T @ theta.theta) <= 1 + 1e-12
    assert gap > 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_ball_contains_next_dual_optimum(seed):
    data = nn_problem(seed)
    crit = lambda_max_nonneg(data)
    grid = crit.lambda_max * np.logspace(0, -1.5, 12)
    for l0, l1 in zip(grid[:-1], grid[1:]):
        theta, gap = certified_dual_point_nn(solve_nnlasso(data, l0, TIGHT).beta, data, l0)
        ball = nn_estimation_ball(theta, l0, l1, data, crit.lambda_max, crit.argmax_feature)
        nxt, _ = certified_dual_point_nn(solve_nnlasso(data, l1, TIGHT).beta, data, l1)
        assert np.linalg.norm(nxt.theta - ball.center) <= ball.radius + np.sqrt(2 * gap) / l1 + 1e-7


def test_orthonormal_design_closed_form():
    # X = I: the solution is (y - lam)_+ and feature i is inactive iff y_i <= lam
    y = np.array([3.0, 2.0, 0.5, -1.0])
    data = ProblemData(np.eye(4), y, np.arange(4))
    crit = lambda_max_nonneg(data)
    assert crit.lambda_max == 3.0
    res = dpc_screen(y / 3.0, 3.0, 2.5, data, crit)
    sol = solve_nnlasso(data, 2.5, TIGHT)
    np.testing.assert_allclose(sol.beta, np.maximum(y - 2.5, 0), atol=1e-12)
    assert not np.any(res.feature_discarded & (sol.beta > 0))
    # the clearly negative correlation is caught at once
    assert res.feature_discarded[3]


def test_safety_along_a_full_path():
    data = nn_problem(5)
    rep = run_path(data, mode="dpc", num_lambda=100, audit=True)
    assert rep.total_violations == 0
    assert rep.max_containment_excess <= 1e-7
    assert np.all(np.isnan(rep.column("alpha")))
    assert np.all(rep.column("r1")[~np.isnan(rep.column("r1"))] == 0)


def test_scaling_invariance():
    # scaling y scales every lambda, leaving the screening decisions unchanged
    data = nn_problem(3)
    big = ProblemData(data.x, 7.0 * data.y, data.groups)
    out = []
    for d in (data, big):
        crit = lambda_max_nonneg(d)
        l0, l1 = 0.5 * crit.lambda_max, 0.4 * crit.lambda_max
        theta, gap = certified_dual_point_nn(solve_nnlasso(d, l0, TIGHT).beta, d, l0)
        out.append(dpc_screen(theta, l0, l1, d, crit, gap=gap).feature_discarded)
    assert np.array_equal(out[0], out[1])


def test_one_sided_test_keeps_positive_direction():
    data = nn_problem(4)
    crit = lambda_max_nonneg(data)
    lmax = crit.lambda_max
    res = dpc_screen(data.y / lmax, lmax, 0.99 * lmax, data, crit)
    assert not res.feature_discarded[crit.argmax_feature]
    assert res.group_discarded.size == 0
    assert res.n_features_l1 == 0 and res.n_features_l2 == res.feature_discarded.sum()


def test_degenerate_and_order_errors():
    data = ProblemData(np.eye(2), [-1.0, -2.0], [0, 1])
    crit = lambda_max_nonneg(data)
    res = dpc_screen(np.zeros(2), 1.0, 0.5, data, crit)
    assert res.feature_discarded.all() and "degenerate" in res.note
    data = nn_problem(0)
    crit = lambda_max_nonneg(data)
    with pytest.raises(ScreeningOrderError):
        dpc_screen(data.y / crit.lambda_max, 0.5 * crit.lambda_max, 0.7 * crit.lambda_max, data, crit)
