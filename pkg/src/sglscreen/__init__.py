"""Safe screening rules and certified solvers for sparse-group lasso paths."""

from .bounds import (
    GroupCritical,
    NonnegCritical,
    lambda1_max,
    lambda1_max_curve,
    lambda2_max,
    lambda_max_nonneg,
    lambda_max_sgl,
    rho_for_group,
    shrink_levels,
    solve_shrink_level,
)
from .dpc import NnDualBall, dpc_screen, nn_estimation_ball
from .harness import DEFAULT_ALPHAS, PathRecord, PathReport, lambda_grid, rejection_ratios, run_path
from .kernels import (
    feasibility_margins,
    is_dual_feasible,
    proj_linf,
    prox_sgl,
    prox_sgl_group,
    sgl_penalty,
    shrink,
    spectral_norm,
)
from .model import (
    DegenerateProblemError,
    DualPoint,
    GroupPartition,
    PenaltyParams,
    PrimalSolution,
    ProblemData,
    ProblemValidationError,
    validate_problem,
)
from .report import emit_report, parse_report
from .solvers import (
    KktReport,
    SolveConfig,
    duality_gap_nnlasso,
    duality_gap_sgl,
    kkt_check_nnlasso,
    kkt_check_sgl,
    solve_nnlasso,
    solve_sgl,
)
from .synthetic import SyntheticSpec, gen_synthetic
from .tlfre import (
    DualBall,
    ScreenResult,
    certified_dual_point,
    dual_from_primal,
    estimation_ball,
    sup_feature,
    sup_group_shrink,
    tlfre_screen,
)

__version__ = "0.1.0"
