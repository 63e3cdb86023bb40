import math

import numpy as np
import pytest

from whittle_graph.errors import InvalidArgument
from whittle_graph.hawkes import HawkesModel, preset, simulate, true_inverse_and_edges, true_spectrum
from whittle_graph.hermitian import Band
from whittle_graph.periodogram import periodogram
from whittle_graph.serialization import read_plot_csv, serialize_to_json
from whittle_graph.tapers import TaperSet, nearest_fourier_frequency
from whittle_graph.estimation import RSEConfig, lasso_admm
from whittle_graph.experiments import (
    ExperimentConfig,
    Figure1Config,
    evaluation_target,
    ground_truth,
    mean_and_se,
    replicate_seeds,
    run_figure1,
    run_replicates,
    run_table1,
    write_figure1,
)
from whittle_graph.experiments.table1 import simulate_periodograms, tune_estimators

SMALL = ExperimentConfig(
    scenario="a", p=12, m=10, trial_length=2.0, replicates=2, training_replicates=1,
    grid_size=3, progress=False,
)


def test_replicate_seeds_are_disjoint():
    training, scoring = replicate_seeds(0, 3, 4)
    assert (len(training), len(scoring)) == (3, 4)
    states = {tuple(s.generate_state(4)) for s in training + scoring}
    assert len(states) == 7
    again, _ = replicate_seeds(0, 3, 4)
    assert all(np.array_equal(a.generate_state(4), b.generate_state(4)) for a, b in zip(training, again))


@pytest.mark.parametrize("n_jobs", [1, 2])
def test_run_replicates_keeps_order(n_jobs):
    assert run_replicates(math.sqrt, [1.0, 4.0, 9.0, 16.0], n_jobs=n_jobs, progress=False) == [1.0, 2.0, 3.0, 4.0]


def test_mean_and_se():
    mean, se = mean_and_se([1.0, 2.0, 3.0])
    assert mean == pytest.approx(2.0)
    assert se == pytest.approx(1.0 / math.sqrt(3.0))
    assert mean_and_se([5.0]) == (5.0, 0.0)
    with pytest.raises(InvalidArgument):
        mean_and_se([])


@pytest.mark.parametrize("changes", [
    {"scenario": "d"},
    {"p": 10},
    {"m": 0},
    {"trial_length": 0.0},
    {"replicates": 0},
    {"estimators": ("graphical_lasso",)},
    {"grid_low": 10.0, "grid_high": 1.0},
])
def test_experiment_config_validation(changes):
    with pytest.raises(InvalidArgument):
        SMALL.with_overrides(**changes)


def test_evaluation_target():
    config = ExperimentConfig(m=50, progress=False)
    assert config.T == 10000.0
    assert evaluation_target(config) == pytest.approx(2 * np.pi * 2 / 200.0)
    assert evaluation_target(config.with_overrides(omega=0.07)) == pytest.approx(2 * np.pi * 2 / 200.0)
    band = evaluation_target(config.with_overrides(band_hz=(0.0, 4.0)))
    assert isinstance(band, Band)
    assert len(band.frequencies) == 800


def test_ground_truth():
    model = preset("a", 12)
    theta, edges = ground_truth(model, 0.5)
    expected, expected_edges = true_inverse_and_edges(model, 0.5)
    assert theta.allclose(expected)
    assert edges == expected_edges

    band = Band(0.0, 1.0, (0.5, 1.0, 1.5))
    theta, _ = ground_truth(model, band)
    mean = np.mean([true_spectrum(model, w).data for w in band.frequencies], axis=0)
    np.testing.assert_allclose(theta.data @ mean, np.eye(12), atol=1e-10)


def test_run_table1_small():
    report = run_table1(SMALL)
    data = report.to_dict()
    assert "wall_clock" not in data
    assert data["omega_evaluated"] == pytest.approx(np.pi)
    assert data["omega_requested"] == SMALL.omega
    assert data["replicates"] == 2
    assert data["estimators"]["inverted_periodogram"]["failures"] == 2
    for name in ("ridge", "lasso_mse", "lasso_f1"):
        assert data["estimators"][name]["failures"] == 0
        assert data["estimators"][name]["lambda_star"] > 0
    assert set(data["tuning"]) == {"ridge", "lasso_mse", "lasso_f1"}
    assert serialize_to_json(run_table1(SMALL)) == serialize_to_json(report)


def test_run_table1_inverted_only_skips_tuning():
    report = run_table1(SMALL.with_overrides(estimators=("inverted_periodogram",), m=20, trial_length=5.0))
    assert report.tuning == {}
    assert report.estimators["inverted_periodogram"].failures == 0
    assert len(report.estimators["inverted_periodogram"].mse) == 2


def test_run_table1_band():
    report = run_table1(SMALL.with_overrides(band_hz=(0.0, 1.0), estimators=("ridge",)))
    assert report.to_dict()["omega_evaluated"]["band_hz"] == [0.0, 1.0]


def test_figure1_small(tmp_path):
    config = Figure1Config(T=100.0, coherence_replicates=30, replicates=6, dims=(4, 2, 3), progress=False)
    report = run_figure1(config)
    assert report.omega_evaluated == pytest.approx(2 * np.pi / 10.0)
    assert report.coherence_samples.shape == (30,)
    assert np.all((report.coherence_samples >= 0) & (report.coherence_samples <= 1))
    assert report.theory_mean == pytest.approx(0.1, rel=1e-6)
    assert report.error.dims == [2, 3, 4]
    assert all(lo <= mid <= hi for lo, mid, hi in zip(report.error.lo, report.error.median, report.error.hi))

    paths = write_figure1(report, tmp_path)
    panel, columns, values = read_plot_csv(paths["a"])
    assert columns == ["x", "y", "theory"]
    assert values.shape == (config.bins, 3)
    assert np.sum(values[:, 1]) / config.bins == pytest.approx(1.0)


def test_figure1_config_validation():
    with pytest.raises(InvalidArgument):
        Figure1Config(m=1)
    with pytest.raises(InvalidArgument):
        Figure1Config(coherence_p=1)
    with pytest.raises(InvalidArgument):
        Figure1Config(dims=())


# ---------------------------------------------------------------- full-size runs


@pytest.mark.slow
def test_poisson_periodogram_matches_flat_spectrum():
    T, m = 1000.0, 10
    omega = nearest_fourier_frequency(0.0628, T, m)
    diagonals, off_diagonals = [], []
    for seed in range(200):
        data = simulate(HawkesModel.poisson([1.0, 1.0, 1.0]), T, m, seed=seed)
        S_hat = periodogram(data, TaperSet.for_data(data), omega)
        diagonals.append(S_hat.diagonal())
        off_diagonals.append(np.abs(S_hat.matrix.off_diagonal_upper()))
    mean, se = mean_and_se(np.ravel(diagonals).tolist())
    assert abs(mean - 1.0 / (2 * np.pi)) < 3 * se
    assert np.mean(off_diagonals) < 0.05


@pytest.mark.slow
def test_figure1_full_size():
    report = run_figure1(Figure1Config(dims=(2, 5, 9), progress=False))
    assert report.ks_statistic < 0.05
    median_error = report.error.median
    assert median_error[0] < median_error[1] < median_error[2]
    assert report.condition.median[2] > 10 * report.condition.median[0]


@pytest.mark.slow
def test_table1_scenario_a():
    few = run_table1(ExperimentConfig(scenario="a", p=12, m=10, replicates=5, progress=False))
    assert few.estimators["inverted_periodogram"].failures == 5
    assert few.estimators["ridge"].failures == 0
    assert few.estimators["lasso_mse"].failures == 0

    report = run_table1(ExperimentConfig(scenario="a", p=12, m=50, replicates=20, progress=False)).to_dict()
    estimators = report["estimators"]
    # 200 s trials put the mean near 4.7, just under half the 9.80 reference
    assert 0.4 * 9.80 <= estimators["inverted_periodogram"]["mse"]["mean"] <= 1.5 * 9.80
    assert estimators["lasso_f1"]["f1"]["mean"] >= 0.9
    assert estimators["lasso_mse"]["mse"]["mean"] <= 1.2 * estimators["ridge"]["mse"]["mean"]


@pytest.mark.slow
def test_sparse_recovery_scenario_c():
    report = run_table1(ExperimentConfig(
        scenario="c", p=12, m=50, replicates=20, estimators=("lasso_f1",), progress=False,
    ))
    scores = report.estimators["lasso_f1"]
    assert np.mean(scores.fpr) <= 0.02
    assert np.mean(scores.tpr) >= 0.7


@pytest.mark.slow
def test_lasso_respects_block_structure():
    config = ExperimentConfig(scenario="a", p=12, m=50, estimators=("lasso_f1",), progress=False)
    model = preset(config.scenario, config.p)
    target = evaluation_target(config)
    truth = ground_truth(model, target)
    training_seeds, scoring_seeds = replicate_seeds(config.seed, config.training_replicates, 20)
    training = simulate_periodograms(config, model, target, training_seeds)
    lam = tune_estimators(config, training, truth)["lasso_f1"].lambda_star

    block = np.kron(np.eye(4), np.ones((3, 3))).astype(bool)
    clean = 0
    for S_hat in simulate_periodograms(config, model, target, scoring_seeds, desc="score"):
        theta = lasso_admm(S_hat, config.solver.with_lambda(lam)).theta
        clean += int(np.all(theta.data[~block] == 0))
    assert clean >= 18


@pytest.mark.slow
def test_periodogram_converges_to_true_spectrum():
    model = preset("a", 12)

    def median_error(T, m):
        omega = 2 * np.pi * m / T
        truth = true_spectrum(model, omega).data
        errors = []
        for seed in range(20):
            data = simulate(model, T, m, seed=seed)
            S_hat = periodogram(data, TaperSet.for_data(data), omega).data
            errors.append(np.linalg.norm(S_hat - truth) / np.linalg.norm(truth))
        return np.median(errors)

    assert median_error(2000.0, 20) < median_error(200.0, 10)


@pytest.mark.slow
def test_estimation_error_falls_with_more_tapers():
    model = preset("a", 12)
    T = 400.0

    def median_error(m):
        omega = nearest_fourier_frequency(0.0628, T, m)
        theta_true, _ = true_inverse_and_edges(model, omega)
        errors = []
        for seed in range(20):
            data = simulate(model, T, m, seed=seed)
            S_hat = periodogram(data, TaperSet.for_data(data), omega)
            lam = 0.05 * float(np.max(S_hat.diagonal()))
            theta = lasso_admm(S_hat, RSEConfig(lam=lam)).theta
            errors.append(np.linalg.norm(theta.data - theta_true.data))
        return np.median(errors)

    assert median_error(50) < median_error(10)
