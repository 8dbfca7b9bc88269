"""Sparse regression by multi-stage convex relaxation of the capped-L1 penalty."""

__version__ = "0.1.0"

from .errors import NumericFailureError, SparseStageError, ValidationError
from .model import (
    DesignMatrix,
    NoiseSpec,
    Observations,
    SparseTarget,
    generate_design,
    generate_observations,
    generate_target,
)
from .solver import (
    LassoSolution,
    PenaltyWeights,
    SolverConfig,
    kkt_residual,
    restricted_least_squares,
    soft_threshold,
    solve_weighted_lasso,
    weighted_objective,
)
from .multistage import (
    MultiStageConfig,
    MultiStageResult,
    StageTrace,
    capped_l1_objective,
    joint_objective,
    run_multistage,
    update_weights,
)
from .spectra import SparseSpectrum, pi_bound, sparse_eigen_exact, sparse_eigen_sampled
from .theory import (
    TheoryInputs,
    lambda_threshold,
    min_coef_check,
    param_bound_rhs,
    sec_check,
    stage_bound,
    theta_threshold,
)
from .harness import ExperimentConfig, RecoveryTable, emit_table, exact_recovery, run_grid, run_replication
