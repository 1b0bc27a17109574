"""Yeo-Johnson Gaussianization by exponential search, pooled and federated."""

from .transform import (
    BRANCH_TOL,
    DegenerateVariance,
    DomainError,
    Feature,
    FedgaussError,
    InvalidFeature,
    NumericOverflow,
    SuffStats,
    YJParams,
    gaussianize,
    grad_sign,
    merge_stats,
    neg_log_likelihood,
    nll_from_stats,
    phi,
    suff_stats,
    yj_lambda_derivative,
    yj_transform,
)
from .solver import (
    BrentConvergenceError,
    FitReport,
    SearchState,
    brent_minimize,
    exp_update,
    fd_sign_oracle,
    fit_brent,
    fit_expyj,
)
from .smc import (
    ConfigError,
    FieldConfig,
    FxpRangeError,
    InsufficientShares,
    MODE_DEBUG,
    MODE_FAITHFUL,
    PreprocessingExhausted,
    RoundLedger,
    ShareVector,
    SmcEngine,
    fxp_decode,
    fxp_encode,
    reconstruct,
    share,
    sign_elements,
)
from .fedproto import (
    ClientDataset,
    NetworkModel,
    ProtocolError,
    Transcript,
    cost_estimate,
    parse_transcript,
    partition,
    run_secure_fed_yj,
)
from .audit import (
    AuditVerdict,
    RecoveredTrace,
    recover_trace,
    revealed_surface_ok,
    verify_leakage,
)
from .experiments import (
    EXPERIMENT_NAMES,
    ExperimentReport,
    RunConfig,
    delta_lambda,
    percentile_summary,
    run_experiment,
)
from . import datasets

__version__ = "0.1.0"
