import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sglscreen import (
    DualBall, PenaltyParams, ProblemData, SolveConfig, certified_dual_point, dual_from_primal,
    estimation_ball, feasibility_margins, is_dual_feasible, lambda_max_sgl, run_path, shrink,
    solve_sgl, sup_feature, sup_group_shrink, tlfre_screen,
)
from sglscreen.tlfre import ScreeningOrderError, group_suprema

from conftest import random_problem

TIGHT = SolveConfig(tol_gap=1e-12, max_iter=200000)


def sample_ball(rng, c, r, n):
    d = rng.standard_normal((n, c.size))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    rad = r * rng.random(n) ** (1.0 / c.size)
    # half the samples on the sphere, where the maximum sits
    rad[: n // 2] = r
    return c + rad[:, None] * d


def group_witness(c, r):
    top = np.max(np.abs(c))
    if top > 1:
        s = shrink(c, 1.0)
        return c + r * s / np.linalg.norm(s)
    i = int(np.argmax(np.abs(c)))
    e = np.zeros_like(c)
    e[i] = 1.0 if c[i] >= 0 else -1.0
    return c + r * e


def test_sup_group_examples():
    assert sup_group_shrink([2.0, 0.0], 0.5) == pytest.approx(1.5)
    assert sup_group_shrink([0.5, 0.0], 0.3) == 0.0
    assert sup_group_shrink([1.0, 0.0], 0.3) == pytest.approx(0.3)
    assert sup_group_shrink([0.5, 0.0], 0.8) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        sup_group_shrink([1.0], -0.1)


@given(st.integers(0, 10_000), st.sampled_from(["above", "at", "below"]))
def test_sup_group_closed_form_is_tight(seed, case):
    rng = np.random.default_rng(seed)
    n = rng.integers(1, 6)
    c = rng.uniform(-0.99, 0.99, n)
    if case == "above":
        c[0] = rng.uniform(1.01, 3) * rng.choice([-1, 1])
    elif case == "at":
        c[rng.integers(n)] = rng.choice([-1.0, 1.0])
    r = rng.uniform(0, 1.5)
    val = sup_group_shrink(c, r)
    pts = sample_ball(rng, c, r, 4000)
    mc = np.max(np.linalg.norm(np.maximum(np.abs(pts) - 1, 0), axis=1))
    assert val >= mc - 1e-12
    w = group_witness(c, r)
    assert np.linalg.norm(w - c) <= r * (1 + 1e-12)
    assert np.linalg.norm(shrink(w, 1.0)) == pytest.approx(val, abs=1e-10)


def test_group_suprema_vectorized(small_problem):
    rng = np.random.default_rng(0)
    g = small_problem.groups
    c = rng.uniform(-1.5, 1.5, small_problem.n_features)
    c[g.indices[0]] = 0.2
    c[g.indices[1][0]] = 1.0
    c[g.indices[1][1:]] = 0.3
    r = rng.uniform(0, 1, g.n_groups)
    want = [sup_group_shrink(c[idx], r[k]) for k, idx in enumerate(g.indices)]
    np.testing.assert_allclose(group_suprema(c, r, g), want, atol=1e-14)


def test_sup_feature_and_witness():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = 6
        center = rng.standard_normal(n)
        ball = DualBall(center, rng.uniform(0, 2), np.ones(n), np.zeros(n))
        x = rng.standard_normal(n)
        val = sup_feature(x, ball)
        pts = sample_ball(rng, center, ball.radius, 4000)
        assert val >= np.max(np.abs(pts @ x)) - 1e-12
        sgn = 1.0 if x @ center >= 0 else -1.0
        w = center + sgn * ball.radius * x / np.linalg.norm(x)
        assert abs(w @ x) == pytest.approx(val, abs=1e-10)
    assert sup_feature(x, ball, radius=0.0) == pytest.approx(abs(x @ center))


def test_dual_from_primal():
    data = ProblemData(np.eye(2), [2.0, 4.0], [0, 1])
    np.testing.assert_allclose(dual_from_primal(np.zeros(2), data, 2.0).theta, [1.0, 2.0])
    np.testing.assert_allclose(dual_from_primal(np.array([1.0, 1.0]), data, 1.0).theta, [1.0, 3.0])
    with pytest.raises(ValueError):
        dual_from_primal(np.zeros(2), data, 0.0)


def test_certified_dual_point_is_feasible(small_problem):
    data = small_problem
    params = PenaltyParams(0.3 * lambda_max_sgl(data, 1.0).lambda_max, 1.0)
    rng = np.random.default_rng(0)
    theta, gap = certified_dual_point(rng.standard_normal(60), data, params)
    assert is_dual_feasible(theta, data, 1.0)
    assert gap > 0


def test_ball_geometry(small_problem):
    data = small_problem
    alpha = 1.0
    crit = lambda_max_sgl(data, alpha)
    l0, l1 = 0.6 * crit.lambda_max, 0.5 * crit.lambda_max
    sol = solve_sgl(data, PenaltyParams(l0, alpha), TIGHT)
    theta, _ = certified_dual_point(sol.beta, data, PenaltyParams(l0, alpha))
    ball = estimation_ball(theta, l0, l1, data, alpha, crit)
    assert abs(ball.v_perp @ ball.normal) <= 1e-10 * np.linalg.norm(ball.v_perp) * np.linalg.norm(ball.normal)
    assert ball.radius == pytest.approx(0.5 * np.linalg.norm(ball.v_perp), rel=1e-14)
    np.testing.assert_allclose(ball.center, theta.theta + 0.5 * ball.v_perp, atol=1e-14)


def test_tiny_step_gives_tiny_ball(small_problem):
    data = small_problem
    crit = lambda_max_sgl(data, 1.0)
    l0 = 0.4 * crit.lambda_max
    sol = solve_sgl(data, PenaltyParams(l0, 1.0), TIGHT)
    theta, _ = certified_dual_point(sol.beta, data, PenaltyParams(l0, 1.0))
    ball = estimation_ball(theta, l0, l0 * (1 - 1e-10), data, 1.0, crit)
    assert ball.radius <= 1e-8 * np.linalg.norm(data.y / l0)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 3.0])
def test_ball_contains_next_dual_optimum(small_problem, alpha):
    data = small_problem
    crit = lambda_max_sgl(data, alpha)
    grid = crit.lambda_max * np.logspace(0, -1.5, 12)
    theta_prev = None
    for l0, l1 in zip(grid[:-1], grid[1:]):
        sol0 = solve_sgl(data, PenaltyParams(l0, alpha), TIGHT)
        theta_prev, gap = certified_dual_point(sol0.beta, data, PenaltyParams(l0, alpha))
        ball = estimation_ball(theta_prev, l0, l1, data, alpha, crit)
        sol1 = solve_sgl(data, PenaltyParams(l1, alpha), TIGHT)
        theta_next, _ = certified_dual_point(sol1.beta, data, PenaltyParams(l1, alpha))
        infl = np.sqrt(2 * gap) / l1
        assert np.linalg.norm(theta_next.theta - ball.center) <= ball.radius + infl + 1e-7


def test_first_step_uses_argmax_group(small_problem):
    data = small_problem
    crit = lambda_max_sgl(data, 1.0)
    lmax = crit.lambda_max
    theta = data.y / lmax
    ball = estimation_ball(theta, lmax, 0.9 * lmax, data, 1.0, crit)
    xs = data.group_block(crit.argmax_group)
    want = xs @ shrink(xs.T @ data.y / lmax, 1.0)
    np.testing.assert_allclose(ball.normal, want, rtol=1e-14)


def test_screen_reduces_to_exact_rules_for_tiny_steps(small_problem):
    data = small_problem
    alpha = 1.0
    crit = lambda_max_sgl(data, alpha)
    l0 = 0.3 * crit.lambda_max
    sol = solve_sgl(data, PenaltyParams(l0, alpha), TIGHT)
    theta, gap = certified_dual_point(sol.beta, data, PenaltyParams(l0, alpha))
    res = tlfre_screen(theta, l0, l0 * (1 - 1e-12), alpha, data, crit, gap=gap)
    margins = feasibility_margins(theta, data, alpha)
    # groups strictly inside the feasible set are dropped; active ones never
    assert np.array_equal(res.group_discarded, margins < -1e-6)
    z = np.abs(data.x.T @ theta.theta)
    survivors = ~res.group_discarded[data.groups.assignment]
    assert np.array_equal(res.feature_discarded, survivors & (z < 1 - 1e-6))


def test_structural_invariants(small_problem):
    data = small_problem
    crit = lambda_max_sgl(data, 0.5)
    lmax = crit.lambda_max
    res = tlfre_screen(data.y / lmax, lmax, 0.8 * lmax, 0.5, data, crit)
    assert not np.any(res.feature_discarded & res.group_discarded[data.groups.assignment])
    assert res.n_features_l1 == int(data.groups.sizes[res.group_discarded].sum())
    assert res.discarded.sum() == res.n_features_l1 + res.n_features_l2
    assert not res.group_discarded[crit.argmax_group]


def test_safety_along_a_full_path():
    data = random_problem(30, 60, 10, seed=11)
    rep = run_path(data, [1.0], num_lambda=100, audit=True)
    assert rep.total_violations == 0
    assert rep.max_containment_excess <= 1e-7
    assert all(r.converged for r in rep.records)


def test_order_errors(small_problem):
    data = small_problem
    crit = lambda_max_sgl(data, 1.0)
    lmax = crit.lambda_max
    theta = data.y / lmax
    with pytest.raises(ScreeningOrderError):
        tlfre_screen(theta, 0.5 * lmax, 0.6 * lmax, 1.0, data, crit)
    with pytest.raises(ScreeningOrderError):
        tlfre_screen(theta, 0.5 * lmax, 0.5 * lmax, 1.0, data, crit)
    with pytest.raises(ScreeningOrderError):
        tlfre_screen(theta, 1.5 * lmax, 0.5 * lmax, 1.0, data, crit)
    with pytest.raises(ValueError):
        tlfre_screen(theta, lmax, 0.5 * lmax, 1.0, data, crit, gap=-1.0)


def test_degenerate_problem_discards_everything():
    x = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    data = ProblemData(x, [0.0, 0.0, 1.0], [0, 1])
    crit = lambda_max_sgl(data, 1.0)
    assert crit.degenerate
    res = tlfre_screen(np.zeros(3), 1.0, 0.5, 1.0, data, crit)
    assert res.group_discarded.all() and res.discarded.all()
    assert "degenerate" in res.note
