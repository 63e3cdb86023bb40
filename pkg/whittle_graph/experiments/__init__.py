"""
Benchmark Experiments

Monte Carlo comparison of the inverse-spectrum estimators on Hawkes
benchmarks, and periodogram diagnostics on independent Poisson data.
"""

from whittle_graph.experiments.harness import (
    ESTIMATORS,
    ExperimentConfig,
    MonteCarloReport,
    replicate_seeds,
    run_replicates,
    mean_and_se,
)

from whittle_graph.experiments.table1 import (
    run_table1,
    evaluation_target,
    ground_truth,
)

from whittle_graph.experiments.figure1 import (
    Figure1Config,
    Figure1Report,
    CurveSummary,
    run_figure1,
    write_figure1,
)

__all__ = [
    # Harness
    'ESTIMATORS',
    'ExperimentConfig',
    'MonteCarloReport',
    'replicate_seeds',
    'run_replicates',
    'mean_and_se',

    # Estimator benchmark
    'run_table1',
    'evaluation_target',
    'ground_truth',

    # Diagnostics
    'Figure1Config',
    'Figure1Report',
    'CurveSummary',
    'run_figure1',
    'write_figure1',
]
