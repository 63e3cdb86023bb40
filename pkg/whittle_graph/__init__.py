"""
whittle-graph

Regularised frequency-domain estimation for multivariate point processes:
multi-taper periodograms of spike trains, ridge and group-lasso Whittle
estimators of the inverse spectral density, and the partial coherence
graphs they imply. Exponential Hawkes processes provide closed-form ground
truth for validation.
"""

__version__ = "0.2.0"

from whittle_graph.errors import (
    WhittleGraphError,
    InvalidArgument,
    NonFiniteInput,
    NotHermitian,
    ShapeMismatch,
    EmptyInput,
    OutOfDomain,
    InvalidModel,
    NotPositiveDefinite,
    NotStationary,
    DegenerateChannel,
    ConvergenceError,
    BudgetExceeded,
    ParseError,
    ValidationError,
)

from whittle_graph.hermitian import (
    HermitianMatrix,
    SpectralMatrix,
    Band,
    NormKind,
    eig_hermitian,
    log_det_pd,
    inverse_pd,
    matrix_norm,
    condition_number,
)

from whittle_graph.events import EventData

from whittle_graph.hawkes import (
    HawkesModel,
    preset,
    simulate,
    spectral_radius_G0,
    stationary_intensity,
    true_spectrum,
    true_inverse,
    true_inverse_and_edges,
)

from whittle_graph.tapers import (
    TaperSet,
    FourierCoeffs,
    tapered_ft,
    mean_corrected_ft,
    fourier_frequencies,
    nearest_fourier_frequency,
)

from whittle_graph.periodogram import (
    multitaper,
    periodogram,
    smoothed_periodogram,
    make_band,
    coherence,
    goodman_density,
    deviation_bound,
)

from whittle_graph.estimation import (
    Penalty,
    RSEConfig,
    RSEResult,
    whittle_nll,
    ridge_estimate,
    lasso_admm,
    lasso_path,
    estimate,
    inverse_periodogram,
    PartialCoherenceGraph,
    partial_coherence,
    extract_graph,
    compare_graphs,
    MetricReport,
    TuningReport,
    mse,
    classification_scores,
    lambda_grid,
    grid_select,
    ebic,
    select_by_ebic,
)

__all__ = [
    # Errors
    "WhittleGraphError",
    "InvalidArgument",
    "NonFiniteInput",
    "NotHermitian",
    "ShapeMismatch",
    "EmptyInput",
    "OutOfDomain",
    "InvalidModel",
    "NotPositiveDefinite",
    "NotStationary",
    "DegenerateChannel",
    "ConvergenceError",
    "BudgetExceeded",
    "ParseError",
    "ValidationError",

    # Matrices
    "HermitianMatrix",
    "SpectralMatrix",
    "Band",
    "NormKind",
    "eig_hermitian",
    "log_det_pd",
    "inverse_pd",
    "matrix_norm",
    "condition_number",

    # Data and models
    "EventData",
    "HawkesModel",
    "preset",
    "simulate",
    "spectral_radius_G0",
    "stationary_intensity",
    "true_spectrum",
    "true_inverse",
    "true_inverse_and_edges",

    # Spectral estimation
    "TaperSet",
    "FourierCoeffs",
    "tapered_ft",
    "mean_corrected_ft",
    "fourier_frequencies",
    "nearest_fourier_frequency",
    "multitaper",
    "periodogram",
    "smoothed_periodogram",
    "make_band",
    "coherence",
    "goodman_density",
    "deviation_bound",

    # Inverse spectrum
    "Penalty",
    "RSEConfig",
    "RSEResult",
    "whittle_nll",
    "ridge_estimate",
    "lasso_admm",
    "lasso_path",
    "estimate",
    "inverse_periodogram",
    "PartialCoherenceGraph",
    "partial_coherence",
    "extract_graph",
    "compare_graphs",
    "MetricReport",
    "TuningReport",
    "mse",
    "classification_scores",
    "lambda_grid",
    "grid_select",
    "ebic",
    "select_by_ebic",

    # Metadata
    "__version__",
]
