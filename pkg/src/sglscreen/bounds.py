"""Critical regularization values above which the solution is identically zero."""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from .model import ProblemData

_EXACT_HIT_RTOL = 1e-12
# groups up to this size evaluate every breakpoint in one dense pass
_DENSE_TAU_MAX = 64


@dataclass(frozen=True, eq=False)
class GroupCritical:
    """Per-group critical values for one alpha.

    ``rho[g]`` is the lambda at which group g's constraint becomes active at
    ``y / lambda``; ``lambda_max`` is their maximum, attained first at
    ``argmax_group``. ``degenerate`` marks ``X^T y = 0``.
    """

    rho: np.ndarray
    argmax_group: int
    lambda_max: float
    alpha: float
    degenerate: bool = False


@dataclass(frozen=True)
class NonnegCritical:
    lambda_max: float
    argmax_feature: int
    degenerate: bool = False


def _shrunk_norm_at(z_sorted: np.ndarray, rho: float) -> float:
    if rho <= 0:
        return np.inf
    # tiny rho may overflow to inf, which is the right limit
    with np.errstate(over="ignore"):
        s = z_sorted / rho - 1.0
        s = s[s > 0]
        return float(np.sqrt(s @ s))


def solve_shrink_level(z_raw, target: float) -> float:
    """Unique ``rho > 0`` with ``||S_1(z_raw / rho)|| = target``.

    ``rho -> ||S_1(z/rho)||`` is piecewise quadratic in ``1/rho`` between
    consecutive sorted magnitudes; locate the piece among the breakpoints,
    then take the admissible root of that piece's quadratic.
    """
    z = np.sort(np.abs(np.asarray(z_raw, dtype=float)))[::-1]
    if z.size == 0 or z[0] == 0.0:
        raise ValueError("z_raw is zero: no finite rho exists")
    if not target > 0:
        raise ValueError(f"target must be positive, got {target}")
    z = z[z > 0]
    n = z.size

    if n <= _DENSE_TAU_MAX:
        # tau_k = ||S_1(z / z_k)|| for every k at once, nondecreasing in k
        with np.errstate(over="ignore"):
            d = np.maximum(z[None, :] / z[:, None] - 1.0, 0.0)
            tau = np.sqrt(np.einsum("ij,ij->i", d, d))
        k = int(np.searchsorted(tau, target, side="left"))
        hit = k < n and abs(tau[k] - target) <= _EXACT_HIT_RTOL * target
    else:
        class _Tau:
            def __getitem__(self, k):
                return _shrunk_norm_at(z, z[k])

            def __len__(self):
                return n

        # number of breakpoints with tau_k < target; tau_0 = 0 so k >= 1
        k = bisect_left(_Tau(), target)
        hit = k < n and abs(_shrunk_norm_at(z, z[k]) - target) <= _EXACT_HIT_RTOL * target
    if hit:
        return float(z[k])

    head = z[:k]
    s1 = float(head.sum())
    s2 = float(head @ head)
    # s2 u^2 - 2 s1 u + (k - target^2) = 0 in u = 1/rho; larger root keeps z_i u >= 1
    disc = max(s1 * s1 - s2 * (k - target * target), 0.0)
    u = (s1 + np.sqrt(disc)) / s2
    rho = 1.0 / u
    lo = z[k] if k < n else 0.0
    return float(min(max(rho, lo), z[k - 1]))


def shrink_levels(blocks: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Row-wise :func:`solve_shrink_level` for a zero-padded matrix.

    Row g holds the entries of one vector (any signs, zeros allowed as
    padding) and must contain a nonzero; ``targets[g] > 0``.
    """
    z = -np.sort(-np.abs(np.asarray(blocks, dtype=float)), axis=1)
    targets = np.asarray(targets, dtype=float)
    n_rows, m = z.shape
    if n_rows == 0:
        return np.zeros(0)
    if np.any(z[:, 0] == 0.0):
        raise ValueError("every row needs a nonzero entry")
    if m > _DENSE_TAU_MAX:
        return np.array([solve_shrink_level(row, t) for row, t in zip(z, targets)])
    nvalid = np.count_nonzero(z, axis=1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        d = np.maximum(z[:, None, :] / z[:, :, None] - 1.0, 0.0)
        d[np.isnan(d)] = 0.0
        tau = np.sqrt(np.einsum("gki,gki->gk", d, d))
    tau[z == 0.0] = np.inf
    k = np.count_nonzero(tau < targets[:, None], axis=1)
    rows = np.arange(n_rows)
    kk = np.minimum(k, m - 1)
    inside = k < nvalid
    hit = inside & (np.abs(tau[rows, kk] - targets) <= _EXACT_HIT_RTOL * targets)

    s1 = np.cumsum(z, axis=1)[rows, k - 1]
    s2 = np.cumsum(z * z, axis=1)[rows, k - 1]
    disc = np.maximum(s1 * s1 - s2 * (k - targets * targets), 0.0)
    rho = s2 / (s1 + np.sqrt(disc))
    lo = np.where(inside, z[rows, kk], 0.0)
    rho = np.minimum(np.maximum(rho, lo), z[rows, k - 1])
    return np.where(hit, z[rows, kk], rho)


def rho_for_group(z_raw, alpha: float) -> float:
    """Critical lambda of one group, with ``z_raw = X_g^T y``.

    Solves ``||S_1(z_raw / rho)|| = alpha * sqrt(n_g)`` for ``rho > 0``.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    z_raw = np.asarray(z_raw, dtype=float)
    return solve_shrink_level(z_raw, alpha * np.sqrt(z_raw.size))


def lambda_max_sgl(data: ProblemData, alpha: float) -> GroupCritical:
    """Smallest lambda giving the zero SGL solution at this alpha."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    xty = data.xty
    groups = data.groups
    rho = np.zeros(groups.n_groups)
    nz = groups.group_max(np.abs(xty)) > 0
    if np.any(nz):
        idx = groups.padded_index[nz]
        blocks = np.where(idx >= 0, xty[idx], 0.0)
        rho[nz] = shrink_levels(blocks, alpha * groups.weights[nz])
    if not np.any(rho > 0):
        return GroupCritical(rho, 0, 0.0, alpha, degenerate=True)
    g_star = int(np.argmax(rho))
    return GroupCritical(rho, g_star, float(rho[g_star]), alpha)


def lambda1_max_curve(data: ProblemData, lambda2: float) -> float:
    """``max_g ||S_{lambda2}(X_g^T y)|| / sqrt(n_g)`` for the (lambda1, lambda2) form."""
    if lambda2 < 0:
        raise ValueError(f"lambda2 must be nonnegative, got {lambda2}")
    s = np.maximum(np.abs(data.xty) - lambda2, 0.0)
    groups = data.groups
    return float(np.max(groups.group_norms(s) / groups.weights))


def lambda1_max(data: ProblemData) -> float:
    return lambda1_max_curve(data, 0.0)


def lambda2_max(data: ProblemData) -> float:
    return float(np.max(np.abs(data.xty)))


def lambda_max_nonneg(data: ProblemData) -> NonnegCritical:
    """``max_i <x_i, y>``; signed, since the nonnegative cone breaks symmetry."""
    xty = data.xty
    i = int(np.argmax(xty))
    val = float(xty[i])
    return NonnegCritical(val, i, degenerate=val <= 0)
