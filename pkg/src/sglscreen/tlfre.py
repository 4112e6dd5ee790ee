"""Two-layer safe screening for the sparse-group lasso.

Given the dual optimum at a larger lambda, every dual optimum at the next
lambda lies in a computable ball. Bounding the group and feature
constraints over that ball discards whole groups first (layer 1), then
single features of the surviving groups (layer 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import GroupCritical
from .kernels import shrink, shrunk_group_norms
from .model import DualPoint, GroupPartition, PenaltyParams, ProblemData
from .solvers import sgl_dual_scale

# relative slack on every screening inequality; near-ties keep the feature
EPS_SAFE = 1e-9
# lambda_prev within this relative distance of lambda_max counts as equal
_AT_MAX_RTOL = 1e-12


class ScreeningOrderError(ValueError):
    """The lambda sequence is not strictly decreasing below lambda_max."""


class DegenerateBallError(RuntimeError):
    """The half-space normal vanished; signals an inconsistent dual point."""


@dataclass(frozen=True, eq=False)
class DualBall:
    """Ball ``||theta - center|| <= radius`` holding the next dual optimum."""

    center: np.ndarray
    radius: float
    normal: np.ndarray
    v_perp: np.ndarray


@dataclass(frozen=True, eq=False)
class ScreenResult:
    """Outcome of one screening step.

    ``group_discarded`` has one entry per group (empty for feature-only
    rules). ``feature_discarded`` holds the layer-2 flags and is only set
    inside groups that survived layer 1. ``inflation`` is the radius added
    for an inexact previous dual point.
    """

    group_discarded: np.ndarray
    feature_discarded: np.ndarray
    groups: GroupPartition | None = None
    ball: DualBall | None = None
    inflation: float = 0.0
    note: str = ""

    @property
    def n_groups_discarded(self) -> int:
        return int(np.count_nonzero(self.group_discarded))

    @property
    def n_features_l1(self) -> int:
        """Features removed with their group."""
        if self.groups is None:
            return 0
        return int(self.groups.sizes[self.group_discarded].sum())

    @property
    def n_features_l2(self) -> int:
        return int(np.count_nonzero(self.feature_discarded))

    @property
    def discarded(self) -> np.ndarray:
        """Every discarded feature, from either layer."""
        out = self.feature_discarded.copy()
        if self.groups is not None:
            out |= self.group_discarded[self.groups.assignment]
        return out


def _eps(threshold, eps_safe=EPS_SAFE):
    return eps_safe * (1.0 + np.abs(threshold))


def dual_from_primal(beta, data: ProblemData, lam: float) -> DualPoint:
    """``theta = (y - X beta) / lambda``."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    beta = np.asarray(getattr(beta, "beta", beta), dtype=float)
    return DualPoint((data.y - data.x @ beta) / lam)


def certified_dual_point(beta, data: ProblemData, params: PenaltyParams):
    """Feasible dual point built from ``beta`` and the gap it certifies.

    The residual is scaled down until every group constraint holds, so the
    returned point is feasible even when ``beta`` is inexact.
    """
    beta = np.asarray(getattr(beta, "beta", beta), dtype=float)
    r = data.y - data.x @ beta
    caps = params.alpha * data.groups.weights
    s = sgl_dual_scale(data.x.T @ r / params.lam, data.groups, caps)
    theta = s * r / params.lam
    primal = 0.5 * float(r @ r) + params.lam * (
        float(caps @ data.groups.group_norms(beta)) + float(np.abs(beta).sum())
    )
    d = data.y - s * r
    gap = max(primal - (0.5 * float(data.y @ data.y) - 0.5 * float(d @ d)), 0.0)
    return DualPoint(theta), gap


def _check_order(lambda_prev, lambda_next, lambda_max):
    if not (0 < lambda_next < lambda_prev):
        raise ScreeningOrderError(
            f"need 0 < lambda_next < lambda_prev, got {lambda_next} and {lambda_prev}"
        )
    if lambda_prev > lambda_max * (1.0 + _AT_MAX_RTOL):
        raise ScreeningOrderError(f"lambda_prev {lambda_prev} exceeds lambda_max {lambda_max}")


def _ball_from_normal(theta, normal, y, lambda_next) -> DualBall:
    nn = float(normal @ normal)
    if not nn > 0:
        raise DegenerateBallError("half-space normal is zero")
    v = y / lambda_next - theta
    v_perp = v - (float(v @ normal) / nn) * normal
    return DualBall(theta + 0.5 * v_perp, 0.5 * float(np.linalg.norm(v_perp)), normal, v_perp)


def estimation_ball(
    theta_prev, lambda_prev: float, lambda_next: float, data: ProblemData,
    alpha: float, critical: GroupCritical,
) -> DualBall:
    """Ball around the dual optimum at ``lambda_next``.

    The dual optimum at ``lambda_prev`` is the projection of
    ``y / lambda_prev`` onto the feasible set, which yields a half-space
    normal; projecting ``y / lambda_next`` against it fixes center and
    radius. At ``lambda_prev = lambda_max`` the normal comes from the
    argmax group instead.
    """
    lam_max = critical.lambda_max
    _check_order(lambda_prev, lambda_next, lam_max)
    theta = np.asarray(getattr(theta_prev, "theta", theta_prev), dtype=float)
    y = data.y
    if abs(lambda_prev - lam_max) <= _AT_MAX_RTOL * lam_max:
        xs = data.group_block(critical.argmax_group)
        normal = xs @ shrink(xs.T @ y / lam_max, 1.0)
    else:
        normal = y / lambda_prev - theta
    return _ball_from_normal(theta, normal, y, lambda_next)


def sup_group_shrink(c, r: float) -> float:
    """Maximum of ``||S_1(xi)||`` over the ball ``||xi - c|| <= r``."""
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    c = np.asarray(c, dtype=float)
    top = float(np.max(np.abs(c))) if c.size else 0.0
    if top > 1.0:
        return float(np.linalg.norm(shrink(c, 1.0))) + r
    if top == 1.0:
        return float(r)
    return max(top + r - 1.0, 0.0)


def group_suprema(c: np.ndarray, r: np.ndarray, groups: GroupPartition) -> np.ndarray:
    """:func:`sup_group_shrink` for every group at once.

    ``c`` is feature-length (``X^T center``), ``r`` per group.
    """
    top = groups.group_max(np.abs(c))
    shrunk = shrunk_group_norms(c, groups)
    return np.where(top > 1.0, shrunk + r, np.where(top == 1.0, r, np.maximum(top + r - 1.0, 0.0)))


def sup_feature(x_col, ball: DualBall, radius: float | None = None) -> float:
    """Maximum of ``|<x_col, theta>|`` over the ball."""
    x_col = np.asarray(x_col, dtype=float)
    rad = ball.radius if radius is None else radius
    return abs(float(x_col @ ball.center)) + rad * float(np.linalg.norm(x_col))


def tlfre_screen(
    theta_prev, lambda_prev: float, lambda_next: float, alpha: float,
    data: ProblemData, critical: GroupCritical, group_spectral_norms=None,
    gap: float = 0.0, eps_safe: float = EPS_SAFE,
) -> ScreenResult:
    """Flag groups (layer 1) and features of surviving groups (layer 2).

    ``theta_prev`` must be dual-feasible at ``lambda_prev`` with certified
    duality gap ``gap``; the ball radius grows by ``sqrt(2 gap)/lambda_next``
    to cover its distance from the exact optimum.
    """
    groups = data.groups
    if critical.degenerate:
        _check_order(lambda_prev, lambda_next, np.inf)
        return ScreenResult(
            np.ones(groups.n_groups, dtype=bool), np.zeros(data.n_features, dtype=bool),
            groups, note="degenerate: X^T y = 0, every coefficient is zero",
        )
    ball = estimation_ball(theta_prev, lambda_prev, lambda_next, data, alpha, critical)
    if gap < 0:
        raise ValueError(f"gap must be nonnegative, got {gap}")
    inflation = float(np.sqrt(2.0 * gap)) / lambda_next
    radius = ball.radius + inflation
    norms = data.group_spectral_norms if group_spectral_norms is None else np.asarray(group_spectral_norms)

    c = data.x.T @ ball.center
    caps = alpha * groups.weights
    sup_g = group_suprema(c, radius * norms, groups)
    group_flag = sup_g < caps - _eps(caps, eps_safe)

    t = np.abs(c) + radius * data.column_norms
    feat_flag = (t <= 1.0 - _eps(1.0, eps_safe)) & ~group_flag[groups.assignment]
    return ScreenResult(group_flag, feat_flag, groups, ball, inflation)
