"""Inertial ADMM and related splitting methods for two-block convex problems."""

from .admm import (
    AdmmParams,
    AdmmState,
    ClosedFormOracle,
    ConfigurationError,
    SolveReport,
    SubproblemOracle,
    SummableAlpha,
    diagnostics,
    schedule_theorem31,
    schedule_theorem32_alpha,
    solve,
    stopping_check,
)
from .linalg import frobenius_norm, svd
from .operators import (
    IdentityMap,
    L1Norm,
    MatrixMap,
    NuclearNorm,
    ScaledIdentityMap,
    SquaredDistance,
    TwoBlockProblem,
    ZeroFunction,
    conjugate_prox,
    soft_threshold,
    svt,
)
from .rpcp import RpcpInstance, as_problem, generate, recovery_metrics
from .splitting import DrParams, dr_solve, dr_step, dual_resolvents, validate_params

__version__ = "0.1.0"

__all__ = [
    "AdmmParams", "AdmmState", "RpcpInstance", "as_problem", "generate",
    "recovery_metrics", "ClosedFormOracle", "ConfigurationError", "DrParams",
    "IdentityMap", "L1Norm", "MatrixMap", "NuclearNorm", "ScaledIdentityMap",
    "SolveReport", "SquaredDistance", "SubproblemOracle", "SummableAlpha",
    "TwoBlockProblem", "ZeroFunction", "conjugate_prox", "diagnostics", "dr_solve",
    "dr_step", "dual_resolvents", "frobenius_norm", "schedule_theorem31",
    "schedule_theorem32_alpha", "soft_threshold", "solve", "stopping_check", "svd",
    "svt", "validate_params",
]
