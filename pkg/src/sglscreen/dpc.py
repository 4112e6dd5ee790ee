"""Safe screening for the nonnegative lasso along a decreasing lambda path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import NonnegCritical
from .model import DualPoint, ProblemData
from .tlfre import EPS_SAFE, DualBall, ScreenResult, _ball_from_normal, _check_order, _eps

_AT_MAX_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class NnDualBall(DualBall):
    """Estimation ball for the nonnegative-lasso dual optimum."""


def certified_dual_point_nn(beta, data: ProblemData, lam: float):
    """Feasible dual point from ``beta`` (clipped at zero) and its gap."""
    beta = np.maximum(np.asarray(getattr(beta, "beta", beta), dtype=float), 0.0)
    r = data.y - data.x @ beta
    top = float(np.max(data.x.T @ r)) / lam
    s = 1.0 if top <= 1.0 else 1.0 / top
    primal = 0.5 * float(r @ r) + lam * float(beta.sum())
    d = data.y - s * r
    gap = max(primal - (0.5 * float(data.y @ data.y) - 0.5 * float(d @ d)), 0.0)
    return DualPoint(s * r / lam), gap


def nn_estimation_ball(
    theta_prev, lambda_prev: float, lambda_next: float, data: ProblemData,
    lambda_max: float, x_star_index: int,
) -> NnDualBall:
    """Ball around the nonnegative-lasso dual optimum at ``lambda_next``.

    At ``lambda_prev = lambda_max`` the half-space normal is the column
    with the largest ``<x_i, y>``.
    """
    if not lambda_max > 0:
        raise ValueError(f"lambda_max must be positive, got {lambda_max}")
    _check_order(lambda_prev, lambda_next, lambda_max)
    theta = np.asarray(getattr(theta_prev, "theta", theta_prev), dtype=float)
    if abs(lambda_prev - lambda_max) <= _AT_MAX_RTOL * lambda_max:
        normal = data.x[:, x_star_index].copy()
    else:
        normal = data.y / lambda_prev - theta
    b = _ball_from_normal(theta, normal, data.y, lambda_next)
    return NnDualBall(b.center, b.radius, b.normal, b.v_perp)


def dpc_screen(
    theta_prev, lambda_prev: float, lambda_next: float, data: ProblemData,
    critical: NonnegCritical, gap: float = 0.0, eps_safe: float = EPS_SAFE,
) -> ScreenResult:
    """Flag feature i when ``<x_i, center> + radius ||x_i|| < 1``.

    The test is one-sided: nonnegativity only constrains ``<x_i, theta>``
    from above. Gap inflation and slack follow :func:`tlfre_screen`.
    """
    p = data.n_features
    none = np.zeros(0, dtype=bool)
    if critical.degenerate:
        _check_order(lambda_prev, lambda_next, np.inf)
        return ScreenResult(none, np.ones(p, dtype=bool),
                            note="degenerate: max <x_i, y> <= 0, every coefficient is zero")
    ball = nn_estimation_ball(theta_prev, lambda_prev, lambda_next, data,
                              critical.lambda_max, critical.argmax_feature)
    if gap < 0:
        raise ValueError(f"gap must be nonnegative, got {gap}")
    inflation = float(np.sqrt(2.0 * gap)) / lambda_next
    radius = ball.radius + inflation
    t = data.x.T @ ball.center + radius * data.column_norms
    return ScreenResult(none, t < 1.0 - _eps(1.0, eps_safe), None, ball, inflation)
