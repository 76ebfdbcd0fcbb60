"""Adaptive spline curve fitting with swarm-optimized free knot placement.

The pipeline fits noisy one-dimensional data with a penalized B-spline
whose knot positions are free parameters: a local-best particle swarm
places the knots for each candidate knot count, an information criterion
picks the knot count, and the winning estimate is rescaled to undo
penalty-induced shrinkage.  A Monte Carlo harness measures estimation
error on a suite of benchmark functions.
"""

from .bspline import (
    BasisMatrix,
    KnotVector,
    KnotVectorError,
    build_basis_matrix,
    evaluate_basis,
)
from .knotmap import (
    KnotMapOptions,
    UnhealableError,
    centered_monotonic_map,
    heal_knots,
    merge_knots,
    plain_map,
)
from .model_search import (
    FitConfig,
    ModelResult,
    SplineFitResult,
    adaptive_fit,
    aic,
    bias_correct,
    fit_model,
)
from .penalized import (
    FitCoefficients,
    PenalizedFitResult,
    fitness,
    solve_coefficients,
)
from .pso import SwarmConfig, SwarmState, ring_neighbors, run_pso, step_swarm
from .benchmarks import (
    BENCHMARK_NAMES,
    DataRealization,
    evaluate_benchmark,
    generate_realization,
    normalize_snr,
)
from .simulate import (
    CampaignSpec,
    CampaignSummary,
    bootstrap_error,
    format_label,
    parse_label,
    rmse,
    run_campaign,
)

__version__ = "0.1.0"

__all__ = [
    "BasisMatrix",
    "KnotVector",
    "KnotVectorError",
    "build_basis_matrix",
    "evaluate_basis",
    "KnotMapOptions",
    "UnhealableError",
    "centered_monotonic_map",
    "heal_knots",
    "merge_knots",
    "plain_map",
    "FitConfig",
    "ModelResult",
    "SplineFitResult",
    "adaptive_fit",
    "aic",
    "bias_correct",
    "fit_model",
    "FitCoefficients",
    "PenalizedFitResult",
    "fitness",
    "solve_coefficients",
    "SwarmConfig",
    "SwarmState",
    "ring_neighbors",
    "run_pso",
    "step_swarm",
    "BENCHMARK_NAMES",
    "DataRealization",
    "evaluate_benchmark",
    "generate_realization",
    "normalize_snr",
    "CampaignSpec",
    "CampaignSummary",
    "bootstrap_error",
    "format_label",
    "parse_label",
    "rmse",
    "run_campaign",
    "__version__",
]
