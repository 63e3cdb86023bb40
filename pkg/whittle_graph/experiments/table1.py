"""
Inverse-Spectrum Estimation Benchmark

For one benchmark scenario: choose lambda* for each regularised estimator on
a training batch with known ground truth, then score every estimator on a
disjoint batch of scoring replicates.
"""

import logging
import time
from functools import partial
from typing import Any, Dict, List, Optional, Set, Tuple

import numpy as np

from whittle_graph.errors import NotPositiveDefinite
from whittle_graph.hawkes import (
    HawkesModel,
    preset,
    simulate,
    support_edges,
    true_inverse_and_edges,
    true_spectrum,
)
from whittle_graph.hermitian import Band, HermitianMatrix, SpectralMatrix, inverse_pd
from whittle_graph.periodogram import make_band, periodogram, smoothed_periodogram
from whittle_graph.tapers import TaperSet, nearest_fourier_frequency
from whittle_graph.estimation.estimators import (
    Penalty,
    inverse_periodogram,
    lasso_admm,
    ridge_estimate,
)
from whittle_graph.estimation.tuning import (
    Criterion,
    MetricReport,
    TuningReport,
    evaluate_grid,
    lambda_grid,
    score_estimate,
    select_lambda,
)
from whittle_graph.experiments.harness import (
    ExperimentConfig,
    MonteCarloReport,
    replicate_seeds,
    run_replicates,
)

log = logging.getLogger(__name__)

Truth = Tuple[HermitianMatrix, Set[Tuple[int, int]]]


def evaluation_target(config: ExperimentConfig) -> Any:
    """Nearest Fourier frequency to config.omega, or the Band for config.band_hz."""
    if config.band_hz is not None:
        return make_band(TaperSet(config.m, config.T), tuple(config.band_hz))
    return nearest_fourier_frequency(config.omega, config.T, config.m)


def ground_truth(model: HawkesModel, target: Any) -> Truth:
    """
    Inverse spectrum and edge set at a frequency, or of the band-averaged
    spectrum for a Band.
    """
    if not isinstance(target, Band):
        return true_inverse_and_edges(model, target)
    mean = np.mean([true_spectrum(model, w).data for w in target.frequencies], axis=0)
    theta = inverse_pd(HermitianMatrix.symmetrized(mean))
    tol = 1e-8 * float(np.max(np.real(np.diag(theta.data))))
    return theta, support_edges(theta, tol)


def _replicate_periodogram(
    seed: np.random.SeedSequence,
    model: HawkesModel,
    config: ExperimentConfig,
    target: Any,
) -> SpectralMatrix:
    data = simulate(model, config.T, config.m, seed, max_expected_events=config.max_expected_events)
    taper = TaperSet.for_data(data)
    if isinstance(target, Band):
        return smoothed_periodogram(data, taper, target)
    return periodogram(data, taper, target)


def _score_replicate(
    seed: np.random.SeedSequence,
    model: HawkesModel,
    config: ExperimentConfig,
    target: Any,
    truth: Truth,
    lambdas: Dict[str, float],
) -> Dict[str, Optional[Dict[str, float]]]:
    S_hat = _replicate_periodogram(seed, model, config, target)
    scores: Dict[str, Optional[Dict[str, float]]] = {}
    for name in config.estimators:
        if name == "inverted_periodogram":
            result = inverse_periodogram(S_hat)
        elif name == "ridge":
            result = ridge_estimate(S_hat, lambdas[name])
        else:
            result = lasso_admm(S_hat, config.solver.with_lambda(lambdas[name]))
        try:
            scores[name] = None if result is None else score_estimate(result, truth)
        except NotPositiveDefinite:
            scores[name] = None
    return scores


def simulate_periodograms(
    config: ExperimentConfig,
    model: HawkesModel,
    target: Any,
    seeds: List[np.random.SeedSequence],
    desc: str = "train",
) -> List[SpectralMatrix]:
    """Periodograms (raw or band-smoothed) of one simulated replicate per seed."""
    fit = partial(_replicate_periodogram, model=model, config=config, target=target)
    return run_replicates(fit, seeds, config.n_jobs, desc=desc, progress=config.progress)


def tune_estimators(
    config: ExperimentConfig,
    training: List[SpectralMatrix],
    truth: Truth,
) -> Dict[str, TuningReport]:
    """lambda* per regularised estimator on a shared grid scaled by the training periodograms."""
    grid = np.mean([
        lambda_grid(S, config.grid_size, config.grid_low, config.grid_high) for S in training
    ], axis=0).tolist()

    wanted = {
        "ridge": (Penalty.RIDGE, Criterion.MSE),
        "lasso_mse": (Penalty.LASSO, Criterion.MSE),
        "lasso_f1": (Penalty.LASSO, Criterion.F1),
    }
    penalties = {wanted[name][0] for name in config.estimators if name in wanted}

    # one pass over the grid per penalty; both lasso criteria share it
    evaluations = {}
    for penalty in sorted(penalties, key=lambda p: p.value):
        evaluate = partial(evaluate_grid, lambdas=grid, truth=truth, penalty=penalty, config=config.solver)
        evaluations[penalty] = run_replicates(
            evaluate, training, config.n_jobs, desc=f"tune {penalty.value}", progress=config.progress
        )

    reports = {}
    for name in config.estimators:
        if name not in wanted:
            continue
        penalty, criterion = wanted[name]
        table = [[entry[criterion.value] for entry in rows] for rows in evaluations[penalty]]
        report = select_lambda(table, grid, criterion, penalty)
        report.seed = config.seed
        reports[name] = report
        log.info(f"[tune] {name}: lambda* = {report.lambda_star:.4g}")
    return reports


def run_table1(config: ExperimentConfig, header: Optional[Dict[str, Any]] = None) -> MonteCarloReport:
    """
    Monte Carlo comparison of the inverted periodogram, ridge and lasso.

    Failed replicates (a periodogram that cannot be inverted) are counted
    and excluded from the means.

    Raises:
        BudgetExceeded: If a replicate would exceed the event budget
    """
    started = time.perf_counter()
    model = preset(config.scenario, config.p)
    target = evaluation_target(config)
    truth = ground_truth(model, target)
    training_seeds, scoring_seeds = replicate_seeds(config.seed, config.training_replicates, config.replicates)
    log.info(
        f"[table1] scenario ({config.scenario}) p={config.p} m={config.m} T'={config.trial_length:g} (T={config.T:g}) "
        f"N={config.replicates}, {len(truth[1])} true edges"
    )

    tuning: Dict[str, TuningReport] = {}
    if any(name != "inverted_periodogram" for name in config.estimators):
        log.info(f"[train 1/2] simulating {config.training_replicates} training replicates")
        training = simulate_periodograms(config, model, target, training_seeds)
        log.info("[train 2/2] choosing lambda on the training batch")
        tuning = tune_estimators(config, training, truth)

    lambdas = {name: report.lambda_star for name, report in tuning.items()}
    log.info(f"[score] {config.replicates} scoring replicates")
    score = partial(_score_replicate, model=model, config=config, target=target, truth=truth, lambdas=lambdas)
    outcomes = run_replicates(score, scoring_seeds, config.n_jobs, desc="score", progress=config.progress)

    estimators = {name: MetricReport(lambda_star=lambdas.get(name)) for name in config.estimators}
    for outcome in outcomes:
        for name, scores in outcome.items():
            if scores is None:
                estimators[name].failures += 1
            else:
                estimators[name].add(scores)

    for name, report in estimators.items():
        if report.failures:
            log.warning(f"[score] {name} failed on {report.failures}/{config.replicates} replicates")

    omega_evaluated = target.to_dict() if isinstance(target, Band) else target
    report = MonteCarloReport(
        config=config,
        omega_requested=list(config.band_hz) if config.band_hz else config.omega,
        omega_evaluated=omega_evaluated,
        estimators=estimators,
        tuning=tuning,
        completed=len(outcomes),
        wall_clock=time.perf_counter() - started,
        header=header,
    )
    log.info(f"[table1] done in {report.wall_clock:.1f}s")
    return report
