"""descent-lab: double descent in ordinary linear regression.

Reproduce the test-error spike at the interpolation threshold, decompose it
into its three interacting factors (small singular values, test-set overlap
with the trailing singular modes, and training residuals), and switch each
factor off to show it is load-bearing.
"""

from .data import (
    Dataset,
    Preprocessing,
    SplitSpec,
    legendre_features,
    load_csv,
    make_polynomial_dataset,
    make_student_teacher,
    polynomial_target,
    save_csv,
    split,
    take_rows,
)
from .decomposition import (
    ErrorDecomposition,
    GroundTruth,
    ModeContribution,
    decompose_test_error,
    decompose_test_errors,
    make_ground_truth,
    smallest_nonzero_singular_value,
)
from .errors import (
    ConfigError,
    DataError,
    DecompositionMismatchError,
    DescentLabError,
    DimensionMismatchError,
    DivergenceError,
    DomainError,
    EmptySeriesError,
    EmptySpectrumError,
    IterationFailureError,
    RankDeficientError,
    RegimeMismatchError,
)
from .estimators import (
    FitResult,
    GdTrace,
    REGIME_INTERP,
    REGIME_OVER,
    REGIME_UNDER,
    default_learning_rate,
    fit_gradient_descent,
    fit_min_norm,
    fit_ols_under,
    fit_pinv,
    fit_ridge,
    regime_of,
)
from .experiments import (
    AblationKind,
    CellFailure,
    EstimatorPolicy,
    SweepConfig,
    SweepOutcome,
    SweepRecord,
    apply_ablation,
    median_series,
    parse_ablation,
    parse_estimator,
    peak_ratio,
    resolve_tau,
    run_cell,
    run_polynomial_sweep,
    run_sweep,
)
from .linalg import (
    SvdResult,
    project_onto_rowspace,
    pseudoinverse_apply,
    svd,
    truncate_svd,
)
from .svgplot import render_line_svg

__version__ = "0.1.0"

__all__ = [
    "AblationKind",
    "CellFailure",
    "ConfigError",
    "DataError",
    "Dataset",
    "DecompositionMismatchError",
    "DescentLabError",
    "DimensionMismatchError",
    "DivergenceError",
    "DomainError",
    "EmptySeriesError",
    "EmptySpectrumError",
    "ErrorDecomposition",
    "EstimatorPolicy",
    "FitResult",
    "GdTrace",
    "GroundTruth",
    "IterationFailureError",
    "ModeContribution",
    "Preprocessing",
    "RankDeficientError",
    "RegimeMismatchError",
    "REGIME_INTERP",
    "REGIME_OVER",
    "REGIME_UNDER",
    "SplitSpec",
    "SvdResult",
    "SweepConfig",
    "SweepOutcome",
    "SweepRecord",
    "apply_ablation",
    "decompose_test_error",
    "decompose_test_errors",
    "default_learning_rate",
    "fit_gradient_descent",
    "fit_min_norm",
    "fit_ols_under",
    "fit_pinv",
    "fit_ridge",
    "legendre_features",
    "load_csv",
    "make_ground_truth",
    "make_polynomial_dataset",
    "make_student_teacher",
    "median_series",
    "parse_ablation",
    "parse_estimator",
    "peak_ratio",
    "polynomial_target",
    "project_onto_rowspace",
    "pseudoinverse_apply",
    "regime_of",
    "render_line_svg",
    "resolve_tau",
    "run_cell",
    "run_polynomial_sweep",
    "run_sweep",
    "save_csv",
    "smallest_nonzero_singular_value",
    "split",
    "svd",
    "take_rows",
    "truncate_svd",
]
