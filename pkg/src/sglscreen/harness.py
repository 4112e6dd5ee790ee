"""Regularization-path driver: screen, solve, record, and optionally audit."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import lambda_max_nonneg, lambda_max_sgl
from .dpc import certified_dual_point_nn, dpc_screen
from .model import DegenerateProblemError, PenaltyParams, ProblemData, validate_problem
from .solvers import SolveConfig, solve_nnlasso, solve_sgl
from .tlfre import ScreenResult, certified_dual_point, tlfre_screen

MODES = ("tlfre", "dpc", "none")
DEFAULT_ALPHAS = tuple(math.tan(math.radians(d)) for d in (5, 15, 30, 45, 60, 75, 85))
ZERO_THRESHOLD = 1e-8
# slack on ball containment checks, on top of radius and gap inflation
CONTAINMENT_SLACK = 1e-7

REPORT_COLUMNS = (
    "alpha", "lambda", "lambda_ratio", "groups_discarded", "feat_l1", "feat_l2",
    "r1", "r2", "iters", "solve_ms", "screen_ms", "gap",
)
TIMING_COLUMNS = ("solve_ms", "screen_ms")


@dataclass
class PathRecord:
    alpha: float
    lam: float
    lambda_ratio: float
    groups_discarded: int
    feat_l1: int
    feat_l2: int
    r1: float
    r2: float
    iters: int
    solve_ms: float
    screen_ms: float
    gap: float
    objective: float = math.nan
    converged: bool = True
    n_zero: int = 0
    violations: int = 0
    containment_excess: float = math.nan

    def row(self) -> tuple:
        """Values in report column order."""
        return (
            self.alpha, self.lam, self.lambda_ratio, self.groups_discarded, self.feat_l1,
            self.feat_l2, self.r1, self.r2, self.iters, self.solve_ms, self.screen_ms, self.gap,
        )


@dataclass
class PathReport:
    mode: str
    records: list = field(default_factory=list)
    audited: bool = False

    @property
    def total_violations(self) -> int:
        return sum(r.violations for r in self.records)

    @property
    def max_containment_excess(self) -> float:
        vals = [r.containment_excess for r in self.records if not math.isnan(r.containment_excess)]
        return max(vals) if vals else math.nan

    def column(self, name: str) -> np.ndarray:
        idx = REPORT_COLUMNS.index(name)
        return np.array([r.row()[idx] for r in self.records], dtype=float)


def lambda_grid(lambda_max: float, num_lambda: int, lambda_min_ratio: float) -> np.ndarray:
    """``num_lambda`` values from ``lambda_max`` down to ``lambda_min_ratio * lambda_max``,
    log-spaced with both ends included."""
    if num_lambda < 1:
        raise ValueError("num_lambda must be at least 1")
    if not 0 < lambda_min_ratio <= 1:
        raise ValueError(f"lambda_min_ratio must lie in (0, 1], got {lambda_min_ratio}")
    return lambda_max * np.logspace(0.0, np.log10(lambda_min_ratio), num_lambda)


def rejection_ratios(screen: ScreenResult, zero_set) -> tuple[float, float]:
    """(r1, r2): features removed by each layer over the number of zeros ``m``.

    Returns ``(nan, nan)`` when ``m = 0``. Feature-only rules report their
    single ratio as ``r2``.
    """
    m = int(np.count_nonzero(zero_set))
    if m == 0:
        return math.nan, math.nan
    return screen.n_features_l1 / m, screen.n_features_l2 / m


@dataclass(frozen=True)
class _Step:
    beta: np.ndarray
    lam: float
    gap: float


def _sgl_path(data, alpha, grid, mode, cfg, ref_cfg, zero_thr):
    crit = lambda_max_sgl(data, alpha)
    if crit.degenerate:
        raise DegenerateProblemError("X^T y = 0: lambda_max is zero for every alpha")
    grid = grid * crit.lambda_max
    groups = data.groups
    p, G = data.n_features, groups.n_groups
    out = []
    prev = _Step(np.zeros(p), grid[0], 0.0)
    ref_beta = np.zeros(p)
    for j, lam in enumerate(grid):
        params = PenaltyParams(lam, alpha)
        t0 = time.perf_counter()
        screen = None
        if j == 0:
            # lambda_max itself: the zero solution is known, nothing to solve
            discarded = np.ones(p, dtype=bool) if mode == "tlfre" else np.zeros(p, dtype=bool)
            n_groups, f1, f2 = (G, p, 0) if mode == "tlfre" else (0, 0, 0)
        elif mode == "tlfre":
            theta, _ = certified_dual_point(prev.beta, data, PenaltyParams(prev.lam, alpha))
            screen = tlfre_screen(theta, prev.lam, lam, alpha, data, crit, gap=prev.gap)
            discarded = screen.discarded
            n_groups, f1, f2 = screen.n_groups_discarded, screen.n_features_l1, screen.n_features_l2
        else:
            discarded = np.zeros(p, dtype=bool)
            n_groups, f1, f2 = 0, 0, 0
        t1 = time.perf_counter()

        if j == 0:
            beta, iters, obj = np.zeros(p), 0, 0.5 * float(data.y @ data.y)
            gap, ok = 0.0, True
        else:
            active = ~discarded if mode == "tlfre" else None
            sol = solve_sgl(data, params, SolveConfig(
                tol_gap=cfg.tol_gap, max_iter=cfg.max_iter, warm_start=prev.beta,
                active_set=active, check_every=cfg.check_every,
            ))
            beta, iters, obj, gap, ok = sol.beta, sol.iterations, sol.objective, sol.duality_gap, sol.converged
        t2 = time.perf_counter()

        rec = PathRecord(alpha, float(lam), float(lam / grid[0]), n_groups, f1, f2,
                         math.nan, math.nan, iters, 1e3 * (t2 - t1), 1e3 * (t1 - t0), gap,
                         objective=obj, converged=ok)
        if ref_cfg is not None:
            if j > 0:
                ref = solve_sgl(data, params, SolveConfig(
                    tol_gap=ref_cfg.tol_gap, max_iter=ref_cfg.max_iter, warm_start=ref_beta,
                    working_set=True, check_every=ref_cfg.check_every,
                ))
                ref_beta = ref.beta
            zero = np.abs(ref_beta) <= zero_thr
            rec.violations = int(np.count_nonzero(discarded & ~zero))
            if screen is not None and screen.ball is not None:
                theta_ref, _ = certified_dual_point(ref_beta, data, params)
                dist = float(np.linalg.norm(theta_ref.theta - screen.ball.center))
                rec.containment_excess = dist - (screen.ball.radius + screen.inflation)
        else:
            zero = np.abs(beta) <= zero_thr
        rec.n_zero = int(np.count_nonzero(zero))
        if rec.n_zero:
            rec.r1, rec.r2 = f1 / rec.n_zero, f2 / rec.n_zero
        out.append(rec)
        prev = _Step(beta, lam, gap)
    return out


def _nn_path(data, grid, mode, cfg, ref_cfg, zero_thr):
    crit = lambda_max_nonneg(data)
    if crit.degenerate:
        raise DegenerateProblemError("max <x_i, y> <= 0: the nonnegative solution is zero for every lambda")
    grid = grid * crit.lambda_max
    p = data.n_features
    out = []
    prev = _Step(np.zeros(p), grid[0], 0.0)
    ref_beta = np.zeros(p)
    for j, lam in enumerate(grid):
        t0 = time.perf_counter()
        screen = None
        if j == 0:
            discarded = np.ones(p, dtype=bool) if mode == "dpc" else np.zeros(p, dtype=bool)
        elif mode == "dpc":
            theta, _ = certified_dual_point_nn(prev.beta, data, prev.lam)
            screen = dpc_screen(theta, prev.lam, lam, data, crit, gap=prev.gap)
            discarded = screen.feature_discarded
        else:
            discarded = np.zeros(p, dtype=bool)
        f2 = int(np.count_nonzero(discarded))
        t1 = time.perf_counter()
        if j == 0:
            beta, iters, obj, gap, ok = np.zeros(p), 0, 0.5 * float(data.y @ data.y), 0.0, True
        else:
            active = ~discarded if mode == "dpc" else None
            sol = solve_nnlasso(data, lam, SolveConfig(
                tol_gap=cfg.tol_gap, max_iter=cfg.max_iter, warm_start=prev.beta,
                active_set=active, check_every=cfg.check_every,
            ))
            beta, iters, obj, gap, ok = sol.beta, sol.iterations, sol.objective, sol.duality_gap, sol.converged
        t2 = time.perf_counter()
        rec = PathRecord(math.nan, float(lam), float(lam / grid[0]), 0, 0, f2, math.nan, math.nan,
                         iters, 1e3 * (t2 - t1), 1e3 * (t1 - t0), gap, objective=obj, converged=ok)
        if ref_cfg is not None:
            if j > 0:
                ref = solve_nnlasso(data, lam, SolveConfig(
                    tol_gap=ref_cfg.tol_gap, max_iter=ref_cfg.max_iter, warm_start=ref_beta,
                    working_set=True, check_every=ref_cfg.check_every,
                ))
                ref_beta = ref.beta
            zero = np.abs(ref_beta) <= zero_thr
            rec.violations = int(np.count_nonzero(discarded & ~zero))
            if screen is not None and screen.ball is not None:
                theta_ref, _ = certified_dual_point_nn(ref_beta, data, lam)
                dist = float(np.linalg.norm(theta_ref.theta - screen.ball.center))
                rec.containment_excess = dist - (screen.ball.radius + screen.inflation)
        else:
            zero = np.abs(beta) <= zero_thr
        rec.n_zero = int(np.count_nonzero(zero))
        if rec.n_zero:
            rec.r1, rec.r2 = 0.0, f2 / rec.n_zero
        out.append(rec)
        prev = _Step(beta, lam, gap)
    return out


def run_path(
    data: ProblemData, alphas=DEFAULT_ALPHAS, num_lambda: int = 100,
    lambda_min_ratio: float = 0.01, mode: str = "tlfre",
    solve_cfg: SolveConfig = SolveConfig(), audit: bool = False,
    reference_tol: float | None = None, zero_threshold: float = ZERO_THRESHOLD,
    workers: int = 1,
) -> PathReport:
    """Sweep a log-spaced lambda path for each alpha (one path for ``dpc``).

    Each step screens with the previous certified solution, then solves the
    reduced problem warm-started from it. With ``audit`` (or an explicit
    ``reference_tol``) every point is also solved without screening, and
    that reference supplies the zero set used for rejection ratios, the
    safety-violation count and ball-containment diagnostics. ``audit``
    defaults the reference tolerance to 1e-12.

    Distinct alphas run on up to ``workers`` threads; records always come
    back in (alpha, lambda) order.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    validate_problem(data)
    grid = lambda_grid(1.0, num_lambda, lambda_min_ratio)
    if reference_tol is None and audit:
        reference_tol = 1e-12
    ref_cfg = None
    if reference_tol is not None:
        ref_cfg = SolveConfig(tol_gap=reference_tol, max_iter=max(solve_cfg.max_iter, 200000))

    if mode == "dpc":
        records = _nn_path(data, grid, mode, solve_cfg, ref_cfg, zero_threshold)
        return PathReport(mode, records, ref_cfg is not None)

    alphas = [float(a) for a in alphas]
    if not alphas or any(not a > 0 for a in alphas):
        raise ValueError("alphas must be a nonempty list of positive values")

    def one(a):
        return _sgl_path(data, a, grid, mode, solve_cfg, ref_cfg, zero_threshold)

    if workers > 1 and len(alphas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(one, alphas))
    else:
        chunks = [one(a) for a in alphas]
    return PathReport(mode, [r for c in chunks for r in c], ref_cfg is not None)
