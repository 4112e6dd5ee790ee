"""Accelerated proximal gradient solvers with duality-gap certificates.

Both problems share one FISTA loop. A step that increases the objective is
rejected and momentum is reset, so the accepted objective sequence is
monotone. Convergence is declared on the relative duality gap
``gap <= tol_gap * max(1, |primal|)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import shrink_levels
from . import _jit
from .kernels import gram_lipschitz, shrunk_group_norms
from .model import GroupPartition, PenaltyParams, PrimalSolution, ProblemData


@dataclass(frozen=True, eq=False)
class SolveConfig:
    tol_gap: float = 1e-8
    max_iter: int = 20000
    warm_start: np.ndarray | None = None
    active_set: np.ndarray | None = None
    check_every: int = 10
    working_set: bool = False

    def __post_init__(self):
        if not self.tol_gap > 0:
            raise ValueError("tol_gap must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")


@dataclass(frozen=True)
class KktReport:
    stationarity_residual: float
    feasibility_residual: float
    gap: float


# objective increases below this relative size are rounding noise
_OBJ_NOISE = 1e-13
# features added per working-set round, at least
_WS_MIN_GROWTH = 20


# -- dual scaling and gaps ---------------------------------------------------


def sgl_dual_scale(z: np.ndarray, groups: GroupPartition, caps: np.ndarray) -> float:
    """Largest ``s`` in (0, 1] with ``||S_1(s z_g)|| <= caps[g]`` for every group.

    ``s -> ||S_1(s z_g)||`` is nondecreasing, so each violated group bounds
    ``s`` by the reciprocal of its exact shrink level.
    """
    viol = shrunk_group_norms(z, groups) > caps
    if not viol.any():
        return 1.0
    idx = groups.padded_index[viol]
    blocks = np.where(idx >= 0, z[idx], 0.0)
    return float(min(1.0, 1.0 / np.max(shrink_levels(blocks, caps[viol]))))


def _gap_from_scale(y, r, s, primal):
    dual = 0.5 * float(y @ y) - 0.5 * float(np.sum((y - s * r) ** 2))
    return max(primal - dual, 0.0)


def _sgl_primal(r, beta, lam, caps, groups):
    return 0.5 * float(r @ r) + lam * (
        float(caps @ groups.group_norms(beta)) + float(np.abs(beta).sum())
    )


def duality_gap_sgl(beta, data: ProblemData, params: PenaltyParams) -> float:
    """Primal objective minus the dual objective at the scaled residual.

    The dual point is ``s (y - X beta) / lambda`` with ``s`` the largest
    scaling in (0, 1] that makes it feasible.
    """
    beta = np.asarray(beta, dtype=float)
    r = data.y - data.x @ beta
    caps = params.alpha * data.groups.weights
    primal = _sgl_primal(r, beta, params.lam, caps, data.groups)
    s = sgl_dual_scale(data.x.T @ r / params.lam, data.groups, caps)
    return _gap_from_scale(data.y, r, s, primal)


def duality_gap_nnlasso(beta, data: ProblemData, lam: float) -> float:
    beta = np.asarray(beta, dtype=float)
    r = data.y - data.x @ beta
    primal = 0.5 * float(r @ r) + lam * float(beta.sum())
    if np.any(beta < 0):
        return np.inf
    top = float(np.max(data.x.T @ r)) / lam
    s = 1.0 if top <= 1.0 else 1.0 / top
    return _gap_from_scale(data.y, r, s, primal)


# -- FISTA -------------------------------------------------------------------


def _fista(x, y, L, prox, pen0, gap_fn, beta0, tol, max_iter, check_every):
    """Returns (beta, objective, iterations, gap, converged, trace).

    ``prox(v, step)`` returns the proximal point and its penalty value;
    ``gap_fn(r, obj)`` the duality gap certified at residual ``r``.
    """
    step = 1.0 / L
    beta = beta0.copy()
    xb = x @ beta
    r = y - xb
    obj = 0.5 * float(r @ r) + pen0
    gap = gap_fn(r, obj)
    trace = [gap]
    best = (beta, obj, gap)
    if gap <= tol * max(1.0, abs(obj)):
        return beta, obj, 0, gap, True, trace

    z, xz, t = beta, xb, 1.0
    just_restarted = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = x.T @ (xz - y)
        new, pen = prox(z - step * grad, step)
        xnew = x @ new
        rn = y - xnew
        objn = 0.5 * float(rn @ rn) + pen
        if objn > obj + _OBJ_NOISE * abs(obj) and not just_restarted:
            z, xz, t = beta, xb, 1.0
            just_restarted = True
        else:
            just_restarted = False
            d = new - beta
            if float((z - new) @ d) > 0.0:
                # momentum points uphill: keep the step, drop the momentum
                t = 1.0
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            coef = (t - 1.0) / t_new
            z = new + coef * d
            xz = xnew + coef * (xnew - xb)
            beta, xb, r, obj, t = new, xnew, rn, objn, t_new
        if it % check_every == 0:
            gap = gap_fn(r, obj)
            trace.append(gap)
            if gap <= best[2]:
                best = (beta, obj, gap)
            if gap <= tol * max(1.0, abs(obj)):
                return beta, obj, it, gap, True, trace

    gap = gap_fn(r, obj)
    trace.append(gap)
    if gap <= best[2]:
        best = (beta, obj, gap)
    beta, obj, gap = best
    return beta, obj, it, gap, gap <= tol * max(1.0, abs(obj)), trace


def _restrict(data: ProblemData, cols):
    """Relabelled partition and original group ids of the columns ``cols``."""
    present, inv = np.unique(data.groups.assignment[cols], return_inverse=True)
    return GroupPartition(inv, len(present)), present


def _start(config: SolveConfig, p: int) -> np.ndarray:
    if config.warm_start is None:
        return np.zeros(p)
    beta0 = np.asarray(config.warm_start, dtype=float)
    if beta0.shape != (p,):
        raise ValueError(f"warm start has shape {beta0.shape}, expected ({p},)")
    return beta0


def _mask(config: SolveConfig, p: int):
    if config.active_set is None:
        return None
    active = np.asarray(config.active_set, dtype=bool)
    if active.shape != (p,):
        raise ValueError(f"active set has shape {active.shape}, expected ({p},)")
    return active


def _fista_sgl(data, params, cols, beta0, tol, max_iter, check_every):
    """FISTA on the columns ``cols`` (None means all), others held at zero."""
    lam = params.lam
    if cols is None:
        x, groups, L = data.x, data.groups, data.lipschitz
        caps = params.alpha * data.groups.weights
    else:
        x = np.ascontiguousarray(data.x[:, cols])
        groups, present = _restrict(data, cols)
        caps = params.alpha * data.groups.weights[present]
        L = gram_lipschitz(x)
    y = data.y
    tau1 = lam * caps
    assign, order, starts, sizes = groups.assignment, groups.order, groups.starts, groups.sizes

    def prox(v, step):
        out = np.empty_like(v)
        group_term, l1 = _jit.prox_sgl_penalty(v, step * tau1, step * lam, assign, caps, out)
        return out, lam * (group_term + l1)

    def gap_fn(r, obj):
        s = _jit.sgl_dual_scale(x.T @ r / lam, order, starts, sizes, caps)
        return _gap_from_scale(y, r, s, obj)

    pen0 = lam * (float(caps @ groups.group_norms(beta0)) + float(np.abs(beta0).sum()))
    return _fista(x, y, max(L, 1e-300), prox, pen0, gap_fn, beta0, tol, max_iter, check_every)


def _full_certificate_sgl(data, params, beta):
    """(primal, gap, residual) of ``beta`` on the full problem."""
    lam = params.lam
    caps = params.alpha * data.groups.weights
    r = data.y - data.x @ beta
    primal = _sgl_primal(r, beta, lam, caps, data.groups)
    s = sgl_dual_scale(data.x.T @ r / lam, data.groups, caps)
    return primal, _gap_from_scale(data.y, r, s, primal), r


def _full_certificate_nn(data, lam, beta):
    r = data.y - data.x @ beta
    primal = 0.5 * float(r @ r) + lam * float(beta.sum())
    return primal, duality_gap_nnlasso(beta, data, lam), r


def solve_sgl(data: ProblemData, params: PenaltyParams, config: SolveConfig = SolveConfig()) -> PrimalSolution:
    """Sparse-group lasso by FISTA with blockwise prox steps.

    Features outside ``config.active_set`` are fixed at zero and the step is
    ``1/||X_active||^2``. The reported gap is always certified on the full
    problem. With ``config.working_set`` the solver grows
    its own column set from optimality violations instead of using every
    column (see :func:`_working_set`).
    """
    p = data.n_features
    beta_full = _start(config, p)
    active = _mask(config, p)

    def run(cols, beta0, max_iter):
        return _fista_sgl(data, params, cols, beta0, config.tol_gap, max_iter, config.check_every)

    def certify(beta):
        return _full_certificate_sgl(data, params, beta)

    caps = params.alpha * data.groups.weights
    assign = data.groups.assignment

    def violations(z):
        bad_group = shrunk_group_norms(z, data.groups) > caps
        return np.where(bad_group[assign], np.abs(z), 0.0)

    if config.working_set:
        return _working_set(data, params.lam, config, beta_full, active, run, certify, violations)
    return _masked(config, beta_full, active, run, certify)


def solve_nnlasso(data: ProblemData, lam: float, config: SolveConfig = SolveConfig()) -> PrimalSolution:
    """Nonnegative lasso ``0.5||y - X b||^2 + lam ||b||_1, b >= 0`` by FISTA.

    ``active_set`` and ``working_set`` behave as in :func:`solve_sgl`.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    p = data.n_features
    beta_full = np.maximum(_start(config, p), 0.0)
    active = _mask(config, p)

    def run(cols, beta0, max_iter):
        return _fista_nn(data, lam, cols, beta0, config.tol_gap, max_iter, config.check_every)

    def certify(beta):
        return _full_certificate_nn(data, lam, beta)

    if config.working_set:
        return _working_set(data, lam, config, beta_full, active, run, certify, lambda z: z)
    return _masked(config, beta_full, active, run, certify)


def _masked(config, beta_full, active, run, certify) -> PrimalSolution:
    p = beta_full.size
    if active is None:
        beta, obj, it, gap, ok, trace = run(None, beta_full, config.max_iter)
        return PrimalSolution(beta, obj, it, gap, ok, tuple(trace))
    cols = np.flatnonzero(active)
    beta = np.zeros(p)
    if cols.size == 0:
        primal, gap, _ = certify(beta)
        return PrimalSolution(beta, primal, 0, gap, gap <= config.tol_gap * max(1.0, abs(primal)))
    beta_r, obj, it, _, ok, trace = run(cols, beta_full[cols], config.max_iter)
    beta[cols] = beta_r
    _, gap, _ = certify(beta)
    return PrimalSolution(beta, obj, it, gap, ok, tuple(trace))


def _working_set(data, lam, config, beta, allowed, run, certify, violations) -> PrimalSolution:
    """FISTA restricted to a column set that grows until the full gap certifies.

    Each round adds the outside features that violate optimality at the
    current residual (score ``violations(X^T r / lam) > 1``), largest first.
    Only the gap of the full problem ends the loop, so the result does not
    depend on the set being right in advance.
    """
    p = data.n_features
    beta = beta.copy()
    if allowed is not None:
        beta[~allowed] = 0.0
    work = beta != 0
    total, trace = 0, []
    while True:
        primal, gap, r = certify(beta)
        trace.append(gap)
        if gap <= config.tol_gap * max(1.0, abs(primal)):
            return PrimalSolution(beta, primal, total, gap, True, tuple(trace))
        if total >= config.max_iter:
            return PrimalSolution(beta, primal, total, gap, False, tuple(trace))

        score = violations(data.x.T @ r / lam)
        score[work] = 0.0
        if allowed is not None:
            score[~allowed] = 0.0
        cand = np.flatnonzero(score > 1.0)
        if cand.size:
            keep = max(_WS_MIN_GROWTH, int(work.sum()))
            if cand.size > keep:
                cand = cand[np.argsort(-score[cand], kind="stable")[:keep]]
            work[cand] = True
        elif not work.any():
            # zero is optimal up to the scaling loss; nothing to solve
            return PrimalSolution(beta, primal, total, gap, False, tuple(trace))

        cols = np.flatnonzero(work)
        beta_r, _, it, _, ok, _ = run(cols, beta[cols], config.max_iter - total)
        total += it
        beta = np.zeros(p)
        beta[cols] = beta_r
        if not cand.size and it == 0:
            # the set is complete and the restricted solve cannot improve
            primal, gap, _ = certify(beta)
            trace.append(gap)
            ok = gap <= config.tol_gap * max(1.0, abs(primal))
            return PrimalSolution(beta, primal, total, gap, ok, tuple(trace))


def _fista_nn(data, lam, cols, beta0, tol, max_iter, check_every):
    if cols is None:
        x, L = data.x, data.lipschitz
    else:
        x = np.ascontiguousarray(data.x[:, cols])
        L = gram_lipschitz(x)
    y = data.y

    def prox(v, step):
        new = v - step * lam
        np.maximum(new, 0.0, out=new)
        return new, lam * float(new.sum())

    def gap_fn(r, obj):
        top = float(np.max(x.T @ r)) / lam
        return _gap_from_scale(y, r, 1.0 if top <= 1.0 else 1.0 / top, obj)

    pen0 = lam * float(beta0.sum())
    return _fista(x, y, max(L, 1e-300), prox, pen0, gap_fn, beta0, tol, max_iter, check_every)


# -- optimality residuals -------------------------------------------------------


def kkt_check_sgl(beta, data: ProblemData, params: PenaltyParams) -> KktReport:
    """Residuals of the SGL optimality conditions at ``theta = (y - X beta)/lambda``.

    For an active group, active coordinates must satisfy
    ``z_i = w beta_i / ||beta_g|| + sign(beta_i)`` and inactive ones
    ``|z_i| <= 1``; an inactive group needs ``||S_1(z_g)|| <= w``.
    """
    beta = np.asarray(beta, dtype=float)
    theta = (data.y - data.x @ beta) / params.lam
    z = data.x.T @ theta
    groups = data.groups
    caps = params.alpha * groups.weights
    bnorm = groups.group_norms(beta)
    shrunk = shrunk_group_norms(z, groups)

    worst = 0.0
    for g, idx in enumerate(groups.indices):
        zg = z[idx]
        if bnorm[g] == 0.0:
            worst = max(worst, shrunk[g] - caps[g])
            continue
        bg = beta[idx]
        nz = bg != 0
        target = caps[g] * bg[nz] / bnorm[g] + np.sign(bg[nz])
        if nz.any():
            worst = max(worst, float(np.max(np.abs(zg[nz] - target))))
        if (~nz).any():
            worst = max(worst, float(np.max(np.abs(zg[~nz]))) - 1.0)
    feas = max(float(np.max(shrunk - caps)), 0.0)
    return KktReport(max(worst, 0.0), feas, duality_gap_sgl(beta, data, params))


def kkt_check_nnlasso(beta, data: ProblemData, lam: float) -> KktReport:
    beta = np.asarray(beta, dtype=float)
    theta = (data.y - data.x @ beta) / lam
    z = data.x.T @ theta
    pos = beta > 0
    stat = 0.0
    if pos.any():
        stat = float(np.max(np.abs(z[pos] - 1.0)))
    if (~pos).any():
        stat = max(stat, float(np.max(z[~pos] - 1.0)))
    neg = float(np.max(np.maximum(-beta, 0.0))) if beta.size else 0.0
    feas = max(float(np.max(z - 1.0)), 0.0)
    gap = duality_gap_nnlasso(np.maximum(beta, 0.0), data, lam)
    return KktReport(max(stat, neg, 0.0), max(feas, neg), gap)
