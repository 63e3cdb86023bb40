"""
Inverse Spectrum Estimation

Penalised Whittle estimators, partial coherence graphs and the tools used
to choose their regularisation parameter.
"""

from whittle_graph.estimation.estimators import (
    Penalty,
    RSEConfig,
    RSEResult,
    whittle_nll,
    penalty_value,
    ridge_estimate,
    block_soft_threshold,
    kkt_residual,
    lasso_admm,
    lasso_path,
    estimate,
    inverse_periodogram,
)

from whittle_graph.estimation.graph import (
    PartialCoherenceGraph,
    GraphComparison,
    partial_coherence,
    partial_coherence_matrix,
    graph_from_theta,
    extract_graph,
    compare_graphs,
)

from whittle_graph.estimation.tuning import (
    Criterion,
    ClassificationScores,
    MetricReport,
    TuningReport,
    EbicPath,
    mse,
    classification_scores,
    lambda_grid,
    score_estimate,
    grid_select,
    select_lambda,
    degrees_of_freedom,
    ebic,
    select_by_ebic,
)

__all__ = [
    # Estimators
    'Penalty',
    'RSEConfig',
    'RSEResult',
    'whittle_nll',
    'penalty_value',
    'ridge_estimate',
    'block_soft_threshold',
    'kkt_residual',
    'lasso_admm',
    'lasso_path',
    'estimate',
    'inverse_periodogram',

    # Graphs
    'PartialCoherenceGraph',
    'GraphComparison',
    'partial_coherence',
    'partial_coherence_matrix',
    'graph_from_theta',
    'extract_graph',
    'compare_graphs',

    # Tuning
    'Criterion',
    'ClassificationScores',
    'MetricReport',
    'TuningReport',
    'EbicPath',
    'mse',
    'classification_scores',
    'lambda_grid',
    'score_estimate',
    'grid_select',
    'select_lambda',
    'degrees_of_freedom',
    'ebic',
    'select_by_ebic',
]
