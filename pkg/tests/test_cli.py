import json
import math

import pytest

from whittle_graph.__main__ import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, cli
from whittle_graph.serialization import load_graph, load_report, read_plot_csv


@pytest.fixture
def spikes(tmp_path):
    path = tmp_path / "ev.csv"
    code = cli(["simulate", "--preset", "a", "--p", "12", "--T", "40", "--m", "4",
                "--seed", "7", "--out", str(path), "--quiet"])
    assert code == EXIT_OK
    return path


def test_simulate_writes_spikes_and_sidecar(spikes, tmp_path):
    assert spikes.read_text().startswith("trial,channel,time\n")
    sidecar = json.loads((tmp_path / "ev.json").read_text())
    assert sidecar == {"p": 12, "m": 4, "T": 40.0, "trials_concatenated": False}


def test_simulate_is_reproducible(tmp_path):
    argv = ["simulate", "--preset", "b", "--p", "12", "--T", "20", "--m", "2", "--seed", "3",
            "--out", str(tmp_path / "ev.csv"), "--report", str(tmp_path / "sim.json"), "--quiet"]
    runs = []
    for _ in range(2):
        assert cli(argv) == EXIT_OK
        runs.append(((tmp_path / "ev.csv").read_bytes(), (tmp_path / "sim.json").read_bytes()))
    assert runs[0] == runs[1]
    assert load_report(tmp_path / "sim.json")["header"]["seed"] == 3


def test_estimate_then_graph(spikes, tmp_path):
    theta, graph_path, report = tmp_path / "theta.csv", tmp_path / "g.json", tmp_path / "r.json"
    code = cli(["estimate", "--in", str(spikes), "--band-hz", "0", "4", "--penalty", "lasso",
                "--select", "ebic", "--out-theta", str(theta), "--out-graph", str(graph_path),
                "--report", str(report), "--quiet"])
    assert code == EXIT_OK

    data = load_report(report)
    assert data["header"]["subcommand"] == "estimate"
    assert data["header"]["options"]["select"] == "ebic"
    assert data["selection"]["criterion"] == "ebic"
    assert data["periodogram"]["m_eff"] == 4 * 40
    graph = load_graph(graph_path)
    assert graph.p == 12

    rebuilt = tmp_path / "g2.json"
    assert cli(["graph", "--in", str(theta), "--out", str(rebuilt), "--quiet"]) == EXIT_OK
    again = load_graph(rebuilt)
    assert again.edges == graph.edges
    assert again.omega == graph.omega


def test_graph_compare(spikes, tmp_path, capsys):
    theta, graph_path = tmp_path / "theta.csv", tmp_path / "g.json"
    assert cli(["estimate", "--in", str(spikes), "--omega", "0.6283", "--penalty", "ridge",
                "--lambda", "0.5", "--out-theta", str(theta), "--out-graph", str(graph_path),
                "--quiet"]) == EXIT_OK
    capsys.readouterr()
    assert cli(["graph", "--in", str(theta), "--compare", str(graph_path), "--quiet"]) == EXIT_OK
    comparison = json.loads(capsys.readouterr().out)
    assert comparison["only_first"] == [] and comparison["only_second"] == []
    assert len(comparison["common"]) == 12 * 11 // 2


def test_estimate_prints_graph(spikes, capsys):
    assert cli(["estimate", "--in", str(spikes), "--omega", "0.6283", "--penalty", "lasso",
                "--lambda", "0.05"]) == EXIT_OK
    assert "Partial Coherence Graph" in capsys.readouterr().out


def test_estimate_reads_config_file(spikes, tmp_path):
    config = tmp_path / "estimate.cfg"
    config.write_text("penalty = ridge\nlambda = 0.5\nomega = 0.6283\n")
    report = tmp_path / "r.json"
    assert cli(["estimate", "--in", str(spikes), "--config", str(config),
                "--report", str(report), "--quiet"]) == EXIT_OK
    options = load_report(report)["header"]["options"]
    assert options["penalty"] == "ridge"
    assert options["lam"] == 0.5


@pytest.mark.parametrize("argv", [
    [],
    ["estimate", "--bogus"],
    ["simulate", "--preset", "a", "--p", "12", "--T", "10"],
    ["bench", "figure1"],
])
def test_usage_errors(argv):
    assert cli(argv) == EXIT_USAGE


def test_estimate_input_errors(spikes, tmp_path):
    assert cli(["estimate", "--in", str(tmp_path / "missing.csv"), "--omega", "1", "--lambda", "0.1"]) == EXIT_USAGE
    assert cli(["estimate", "--in", str(spikes), "--lambda", "0.1", "--quiet"]) == EXIT_USAGE
    assert cli(["estimate", "--in", str(spikes), "--omega", "1", "--band", "delta",
                "--lambda", "0.1", "--quiet"]) == EXIT_USAGE
    assert cli(["estimate", "--in", str(spikes), "--omega", "1", "--quiet"]) == EXIT_USAGE
    assert cli(["estimate", "--in", str(spikes), "--omega", "1", "--penalty", "ridge",
                "--select", "ebic", "--quiet"]) == EXIT_USAGE


def test_unknown_config_key_is_a_usage_error(spikes, tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("colour = red\n")
    assert cli(["estimate", "--in", str(spikes), "--config", str(config)]) == EXIT_USAGE


def test_non_stationary_model_exits_numerical(tmp_path):
    model = tmp_path / "model.json"
    model.write_text(json.dumps({"nu": [1.0], "alpha": [[2.0]], "beta": [[1.0]]}))
    code = cli(["simulate", "--model", str(model), "--T", "10", "--m", "1",
                "--out", str(tmp_path / "ev.csv"), "--quiet"])
    assert code == EXIT_NUMERICAL


def test_strict_non_convergence_exits_numerical(spikes):
    argv = ["estimate", "--in", str(spikes), "--omega", "0.6283", "--penalty", "lasso",
            "--lambda", "0.01", "--max-iter", "1", "--quiet"]
    assert cli(argv) == EXIT_OK
    assert cli(argv + ["--strict"]) == EXIT_NUMERICAL


def test_uninvertible_periodogram_exits_numerical(spikes):
    assert cli(["estimate", "--in", str(spikes), "--omega", "0.6283", "--penalty", "none",
                "--quiet"]) == EXIT_NUMERICAL


def test_tune_is_deterministic(tmp_path):
    outputs = []
    path = tmp_path / "tune.json"
    for _ in range(2):
        assert cli(["tune", "--scenario", "a", "--p", "12", "--m", "10", "--trial-length", "2",
                    "--training", "2", "--grid-size", "3", "--penalty", "ridge",
                    "--criterion", "mse", "--out", str(path), "--quiet"]) == EXIT_OK
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    tuning = json.loads(outputs[0])["tuning"]
    assert len(tuning["lambda_grid"]) == 3
    assert len(tuning["replicate_optima"]) == 2


def test_tune_rejects_ridge_by_f1(tmp_path):
    assert cli(["tune", "--penalty", "ridge", "--criterion", "f1", "--quiet"]) == EXIT_USAGE


def test_bench_table1(tmp_path):
    argv = ["bench", "table1", "--scenario", "a", "--p", "12", "--m", "10", "--trial-length", "2",
            "--replicates", "2", "--training", "1", "--grid-size", "3", "--quiet"]
    contents = []
    out = tmp_path / "bench"
    for _ in range(2):
        assert cli(argv + ["--out", str(out)]) == EXIT_OK
        contents.append((out / "table1_a_p12_m10.json").read_bytes())
    assert contents[0] == contents[1]

    report = json.loads(contents[0])
    assert (report["trial_length"], report["T"]) == (2.0, 20.0)
    assert report["omega_evaluated"] == pytest.approx(math.pi)
    assert report["estimators"]["inverted_periodogram"]["failures"] == 2
    assert report["estimators"]["ridge"]["mse"]["n"] == 2
    assert report["header"]["seed"] == 0
    assert "wall_clock" not in report


def test_bench_figure1(tmp_path):
    out = tmp_path / "fig"
    assert cli(["bench", "figure1", "--T", "100", "--coherence-replicates", "20", "--replicates", "5",
                "--dims", "2", "3", "--out", str(out), "--quiet"]) == EXIT_OK
    for name in ("figure1a_coherence.csv", "figure1b_error.csv", "figure1c_condition.csv", "figure1.json"):
        assert (out / name).exists()
    _, columns, values = read_plot_csv(out / "figure1b_error.csv")
    assert columns == ["x", "median", "lo", "hi"]
    assert values[:, 0].tolist() == [2.0, 3.0]
