"""Shrinkage, projections, proximal maps and dual-feasibility margins."""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .model import GroupPartition, PenaltyParams, ProblemData

FEASIBILITY_TOL = 1e-9

# Gram eigendecomposition is exact and cheap below this many columns.
_GRAM_FALLBACK_COLS = 64


def shrink(w, gamma: float) -> np.ndarray:
    """Soft-thresholding ``sgn(w) * (|w| - gamma)_+``, componentwise."""
    if gamma < 0:
        raise ValueError(f"shrinkage level must be nonnegative, got {gamma}")
    w = np.asarray(w, dtype=float)
    return np.sign(w) * np.maximum(np.abs(w) - gamma, 0.0)


def proj_linf(w, gamma: float) -> np.ndarray:
    """Projection onto the l-infinity ball of radius ``gamma``."""
    if not gamma > 0:
        raise ValueError(f"projection radius must be positive, got {gamma}")
    w = np.asarray(w, dtype=float)
    return np.clip(w, -gamma, gamma)


def sgl_penalty(beta, params: PenaltyParams, groups: GroupPartition) -> float:
    """``lambda * (alpha * sum_g sqrt(n_g) ||beta_g|| + ||beta||_1)``."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (groups.n_features,):
        raise ValueError(f"beta has shape {beta.shape}, expected ({groups.n_features},)")
    group_term = float(groups.weights @ groups.group_norms(beta))
    return params.lam * (params.alpha * group_term + float(np.abs(beta).sum()))


def prox_sgl_group(v, tau1: float, tau2: float) -> np.ndarray:
    """Minimizer of ``0.5||v - u||^2 + tau1 ||u|| + tau2 ||u||_1`` over ``u``.

    Soft-threshold at ``tau2`` first, then shrink the result's norm by ``tau1``.
    """
    if tau1 < 0 or tau2 < 0:
        raise ValueError("prox thresholds must be nonnegative")
    s = shrink(v, tau2)
    nrm = np.linalg.norm(s)
    if nrm <= tau1:
        return np.zeros_like(s)
    return (1.0 - tau1 / nrm) * s


def prox_sgl(v, tau1_per_group, tau2: float, groups: GroupPartition) -> np.ndarray:
    """Blockwise :func:`prox_sgl_group` over every group of ``groups`` at once."""
    return prox_sgl_with_norms(v, tau1_per_group, tau2, groups)[0]


def prox_sgl_with_norms(v, tau1_per_group, tau2: float, groups: GroupPartition):
    """:func:`prox_sgl` plus the group norms and l1 norm of its output."""
    a = np.abs(v)
    a -= tau2
    np.maximum(a, 0.0, out=a)
    nrm = groups.group_norms(a)
    ratio = np.divide(tau1_per_group, nrm, out=np.full_like(nrm, np.inf), where=nrm > 0)
    scale = np.maximum(1.0 - ratio, 0.0)
    mag = a * scale[groups.assignment]
    l1 = float(mag.sum())
    return np.copysign(mag, v), nrm * scale, l1


def _power_iteration(block: np.ndarray, max_iter=1000, rtol=1e-10) -> float:
    gram = block.T @ block if block.shape[1] <= block.shape[0] else block @ block.T
    u = np.ones(gram.shape[0]) / np.sqrt(gram.shape[0])
    est = 0.0
    for _ in range(max_iter):
        w = gram @ u
        new = float(u @ w)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        u = w / nrm
        if abs(new - est) <= rtol * abs(new):
            est = new
            break
        est = new
    return float(np.sqrt(max(est, 0.0)))


def spectral_norm(block) -> float:
    """Largest singular value of a nonempty column block.

    Small blocks use the Gram eigendecomposition; larger ones use power
    iteration from the normalized all-ones vector.
    """
    block = np.atleast_2d(np.asarray(block, dtype=float))
    if block.shape[1] == 1:
        return float(np.linalg.norm(block))
    if min(block.shape) <= _GRAM_FALLBACK_COLS:
        return float(np.sqrt(max(gram_lipschitz(block), 0.0)))
    return _power_iteration(block)


def gram_lipschitz(x: np.ndarray) -> float:
    """Squared spectral norm of ``x`` via the smaller Gram matrix."""
    x = np.atleast_2d(x)
    if x.size == 0:
        return 0.0
    gram = x.T @ x if x.shape[1] <= x.shape[0] else x @ x.T
    k = gram.shape[0]
    top = linalg.eigvalsh(gram, subset_by_index=[k - 1, k - 1])
    return float(top[0])


def feasibility_margins(theta, data: ProblemData, alpha: float) -> np.ndarray:
    """Entry g is ``||S_1(X_g^T theta)|| - alpha * sqrt(n_g)``.

    ``theta`` is dual-feasible iff every entry is <= 0 (up to
    :data:`FEASIBILITY_TOL`).
    """
    theta = getattr(theta, "theta", theta)
    z = data.x.T @ np.asarray(theta, dtype=float)
    return shrunk_group_norms(z, data.groups) - alpha * data.groups.weights


def shrunk_group_norms(z: np.ndarray, groups: GroupPartition, gamma: float = 1.0) -> np.ndarray:
    s = np.maximum(np.abs(z) - gamma, 0.0)
    return groups.group_norms(s)


def is_dual_feasible(theta, data: ProblemData, alpha: float, tol: float = FEASIBILITY_TOL) -> bool:
    return bool(np.all(feasibility_margins(theta, data, alpha) <= tol))
