"""
whittle-graph CLI

Simulate Hawkes benchmarks, estimate sparse inverse spectra from spike data
and emit partial coherence graphs from the command line.

Exit codes: 0 success, 2 usage / input errors, 3 numerical failures.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

from whittle_graph import __version__
from whittle_graph.config import RunConfig, parse_with_config
from whittle_graph.errors import (
    NUMERICAL_ERRORS,
    ConvergenceError,
    InvalidArgument,
    NotPositiveDefinite,
    WhittleGraphError,
)
from whittle_graph.hawkes import DEFAULT_EVENT_BUDGET, load_model, preset, simulate
from whittle_graph.hermitian import frequency_from_json, frequency_to_json
from whittle_graph.periodogram import NAMED_BANDS, make_band, periodogram, smoothed_periodogram
from whittle_graph.serialization import (
    format_graph_text,
    format_summary_text,
    load_graph,
    read_matrix_csv,
    read_matrix_sidecar,
    read_spike_csv,
    report_header,
    save_graph,
    save_report,
    serialize_to_json,
    serialize_to_yaml,
    write_matrix_csv,
    write_spike_csv,
)
from whittle_graph.tapers import TaperSet
from whittle_graph.estimation import (
    Penalty,
    RSEConfig,
    compare_graphs,
    estimate,
    extract_graph,
    graph_from_theta,
    inverse_periodogram,
    lambda_grid,
    select_by_ebic,
)
from whittle_graph.experiments import (
    ExperimentConfig,
    Figure1Config,
    ground_truth,
    evaluation_target,
    replicate_seeds,
    run_figure1,
    run_table1,
    write_figure1,
)
from whittle_graph.experiments.table1 import simulate_periodograms, tune_estimators

log = logging.getLogger("whittle_graph")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

LOG_FORMAT = "[whittle-graph] %(levelname)s: %(message)s"


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if getattr(args, "quiet", False):
        level = logging.WARNING
    elif getattr(args, "verbose", False):
        level = logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format=LOG_FORMAT, force=True)


def _header(run: RunConfig) -> Dict[str, Any]:
    return report_header(__version__, run.subcommand, run.options, run.seed)


def _emit(data: Any, path: Optional[str], format: str) -> None:
    """Write a report to path, or print it to stdout."""
    if path:
        save_report(data, Path(path), format=format)
        log.info(f"Report written to {path}")
    elif format == 'yaml':
        print(serialize_to_yaml(data), end='')
    else:
        print(serialize_to_json(data))


def _solver_config(args: argparse.Namespace, penalty: Penalty = Penalty.LASSO, lam: Optional[float] = None) -> RSEConfig:
    return RSEConfig(
        penalty=penalty,
        lam=lam if lam is not None else 0.1,
        admm_tau=args.admm_tau,
        eps_abs=args.eps_abs,
        eps_rel=args.eps_rel,
        max_iter=args.max_iter,
        penalize_diagonal=not args.no_penalize_diagonal,
    )


def _check_converged(args: argparse.Namespace, converged: bool, what: str) -> None:
    if not converged:
        if args.strict:
            raise ConvergenceError(f"{what} did not converge (--strict)")
        log.warning(f"{what} did not converge; results are the last iterate")


# ---------------------------------------------------------------- subcommands


def cmd_simulate(args: argparse.Namespace) -> int:
    run = RunConfig.from_namespace(args, inputs=("model",), outputs=("out",))
    run.require("out", "T", "m")
    run.validate()

    if args.model:
        model = load_model(Path(args.model))
    else:
        run.require("preset", "p")
        model = preset(args.preset, args.p)

    data = simulate(
        model,
        args.T,
        args.m,
        args.seed,
        max_expected_events=args.max_events,
        burn_in=args.burn_in,
        n_jobs=args.n_jobs,
    )
    write_spike_csv(data, Path(args.out), trials_concatenated=args.trials_concatenated)

    if args.report:
        _emit({
            "header": _header(run),
            "model": model.to_dict(),
            "events": data.to_dict(),
            "n_events": data.n_events,
            "rates": data.rates(),
        }, args.report, args.format)
    return EXIT_OK


def _target_periodogram(args: argparse.Namespace, data, taper: TaperSet):
    chosen = [name for name in ("omega", "band_hz", "band") if getattr(args, name) is not None]
    if len(chosen) != 1:
        raise InvalidArgument("Give exactly one of --omega, --band-hz or --band")
    if args.omega is not None:
        return periodogram(data, taper, args.omega)
    band = make_band(taper, args.band if args.band is not None else tuple(args.band_hz))
    log.info(f"[periodogram] band {band.low_hz:g}-{band.high_hz:g} Hz: {len(band.frequencies)} frequencies x {taper.m} trials")
    return smoothed_periodogram(data, taper, band)


def cmd_estimate(args: argparse.Namespace) -> int:
    run = RunConfig.from_namespace(args, inputs=("input",), outputs=("out_theta", "out_graph", "report"))
    run.require("input")
    run.validate()

    data = read_spike_csv(Path(args.input), trials_concatenated=args.trials_concatenated)
    taper = TaperSet.for_data(data)
    S_hat = _target_periodogram(args, data, taper)
    penalty = Penalty(args.penalty)

    selection = None
    if args.select == 'ebic':
        if penalty is not Penalty.LASSO:
            raise InvalidArgument("--select ebic requires --penalty lasso")
        grid = lambda_grid(S_hat, args.grid_size, args.grid_low, args.grid_high)
        result, selection = select_by_ebic(S_hat, grid, _solver_config(args), gamma=args.gamma)
    elif penalty is Penalty.NONE:
        result = inverse_periodogram(S_hat)
        if result is None:
            raise NotPositiveDefinite(
                f"Periodogram cannot be inverted (p={S_hat.dim}, m_eff={S_hat.m_eff})"
            )
    else:
        run.require("lam")
        result = estimate(S_hat, _solver_config(args, penalty, args.lam))
    _check_converged(args, result.converged, f"{penalty.value} estimate at lambda={result.lam:.4g}")

    graph = extract_graph(result, zero_tol=args.zero_tol)
    if args.out_theta:
        write_matrix_csv(result.theta, Path(args.out_theta), metadata={
            "omega": frequency_to_json(result.omega),
            "penalty": result.penalty.value,
            "lambda": result.lam,
            "m_eff": S_hat.m_eff,
        })
    if args.out_graph:
        save_graph(graph, Path(args.out_graph))
    if args.report:
        _emit({
            "header": _header(run),
            "periodogram": S_hat.to_dict(),
            "estimate": result.to_dict(),
            "selection": selection.to_dict() if selection else None,
            "graph": graph.to_dict(),
        }, args.report, args.format)
    if not args.quiet:
        print(format_graph_text(graph))
    return EXIT_OK


def _experiment_config(args: argparse.Namespace, **overrides: Any) -> ExperimentConfig:
    settings = dict(
        scenario=args.scenario,
        p=args.p,
        m=args.m,
        trial_length=args.trial_length,
        replicates=getattr(args, "replicates", 1),
        training_replicates=args.training,
        omega=args.omega,
        band_hz=tuple(args.band_hz) if args.band_hz else None,
        grid_size=args.grid_size,
        grid_low=args.grid_low,
        grid_high=args.grid_high,
        seed=args.seed,
        n_jobs=args.n_jobs,
        solver=_solver_config(args),
        max_expected_events=args.max_events,
        progress=not args.quiet,
    )
    settings.update(overrides)
    return ExperimentConfig(**settings)


def cmd_tune(args: argparse.Namespace) -> int:
    run = RunConfig.from_namespace(args, outputs=("out",))
    run.validate()
    penalty = Penalty(args.penalty)
    if penalty is Penalty.RIDGE:
        if args.criterion != 'mse':
            raise InvalidArgument("ridge is tuned by MSE only")
        name = "ridge"
    else:
        name = f"lasso_{args.criterion}"

    config = _experiment_config(args, estimators=(name,))
    model = preset(config.scenario, config.p)
    target = evaluation_target(config)
    truth = ground_truth(model, target)
    training_seeds, _ = replicate_seeds(config.seed, config.training_replicates, 1)
    training = simulate_periodograms(config, model, target, training_seeds)
    report = tune_estimators(config, training, truth)[name]

    _emit({
        "header": _header(run),
        "omega_requested": list(config.band_hz) if config.band_hz else config.omega,
        "omega_evaluated": frequency_to_json(target),
        "tuning": report.to_dict(),
    }, args.out, args.format)
    return EXIT_OK


def cmd_bench_table1(args: argparse.Namespace) -> int:
    run = RunConfig.from_namespace(args)
    run.validate()
    estimators = tuple(e.strip() for e in args.estimators.split(',') if e.strip())
    config = _experiment_config(args, estimators=estimators)
    report = run_table1(config, header=_header(run))

    name = f"table1_{config.scenario}_p{config.p}_m{config.m}.{args.format}"
    if args.out:
        _emit(report, str(Path(args.out) / name), args.format)
    if not args.quiet or not args.out:
        print(format_summary_text(report.to_dict()))
    return EXIT_OK


def cmd_bench_figure1(args: argparse.Namespace) -> int:
    run = RunConfig.from_namespace(args)
    run.require("out")
    run.validate()
    config = Figure1Config(
        rate=args.rate,
        T=args.T,
        m=args.m,
        omega=args.omega,
        coherence_p=args.coherence_p,
        coherence_replicates=args.coherence_replicates,
        dims=tuple(args.dims),
        replicates=args.replicates,
        seed=args.seed,
        n_jobs=args.n_jobs,
        progress=not args.quiet,
    )
    report = run_figure1(config, header=_header(run))
    out_dir = Path(args.out)
    paths = write_figure1(report, out_dir)
    _emit(report, str(out_dir / f"figure1.{args.format}"), args.format)

    if args.svg:
        from whittle_graph.experiments.plots import render_all
        for svg in render_all(list(paths.values())):
            log.info(f"SVG written to {svg}")
    return EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    run = RunConfig.from_namespace(args, inputs=("input", "compare"), outputs=("out",))
    run.require("input")
    run.validate()

    theta = read_matrix_csv(Path(args.input))
    metadata = read_matrix_sidecar(Path(args.input))
    omega = frequency_from_json(metadata["omega"]) if "omega" in metadata else args.omega
    graph = graph_from_theta(theta, omega=omega, zero_tol=args.zero_tol)

    if args.out:
        save_graph(graph, Path(args.out))
        log.info(f"Graph written to {args.out}")

    if args.compare:
        comparison = compare_graphs(graph, load_graph(Path(args.compare)))
        _emit(comparison, None, args.format)
    elif not args.out:
        print(format_graph_text(graph))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', help='key = value file with defaults for this subcommand')
    parser.add_argument('--quiet', action='store_true', help='Only warnings and errors on stderr')
    parser.add_argument('--verbose', action='store_true', help='Debug output on stderr')
    parser.add_argument('--format', choices=['json', 'yaml'], default='json',
                        help='Report format (default: json)')
    parser.add_argument('--strict', action='store_true',
                        help='Treat solver non-convergence as a failure (exit 3)')


def _add_trial_layout(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--trials-concatenated', dest='trials_concatenated', action='store_true',
                       help='Times are global on (0, T]')
    group.add_argument('--trials-separate', dest='trials_concatenated', action='store_false',
                       help='Times are per trial on (0, T/m] (default)')
    parser.set_defaults(trials_concatenated=False)


def _add_solver(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--admm-tau', type=float, default=1.0, help='ADMM penalty weight (default: 1)')
    parser.add_argument('--eps-abs', type=float, default=1e-6, help='ADMM absolute tolerance')
    parser.add_argument('--eps-rel', type=float, default=1e-4, help='ADMM relative tolerance')
    parser.add_argument('--max-iter', type=int, default=5000, help='ADMM iteration cap')
    parser.add_argument('--no-penalize-diagonal', action='store_true',
                        help='Leave diagonal entries out of the lasso penalty')


def _add_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--grid-size', type=int, default=20, help='Points on the lambda grid')
    parser.add_argument('--grid-low', type=float, default=1e-3, help='Smallest lambda / max diag S_hat')
    parser.add_argument('--grid-high', type=float, default=10.0, help='Largest lambda / max diag S_hat')


def _add_experiment(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--scenario', choices=['a', 'b', 'c'], default='a', help='Benchmark model')
    parser.add_argument('--p', type=int, default=12, help='Dimension (12, 48 or 96)')
    parser.add_argument('--m', type=int, default=50, help='Trials / tapers')
    parser.add_argument('--trial-length', type=float, default=200.0,
                        help='Seconds per trial; the total horizon is m times this (default: 200)')
    parser.add_argument('--training', type=int, default=5, help='Training replicates for lambda*')
    parser.add_argument('--omega', type=float, default=0.0628, help='Target angular frequency (rad/s)')
    parser.add_argument('--band-hz', type=float, nargs=2, metavar=('LO', 'HI'),
                        help='Use a band-smoothed periodogram over (LO, HI] Hz')
    parser.add_argument('--seed', type=int, default=0, help='Root seed')
    parser.add_argument('--n-jobs', type=int, default=1, help='joblib workers')
    parser.add_argument('--max-events', type=float, default=DEFAULT_EVENT_BUDGET,
                        help='Expected-event budget per replicate')
    _add_grid(parser)
    _add_solver(parser)


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    """Return (parser, {command key: leaf parser})."""
    parser = argparse.ArgumentParser(
        prog='whittle-graph',
        description='Sparse inverse spectral estimation and partial coherence graphs for spike trains',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  Simulate benchmark model (a):
    whittle-graph simulate --preset a --p 12 --T 200 --m 10 --seed 7 --out ev.csv

  Delta-band graph with eBIC-selected lasso:
    whittle-graph estimate --in ev.csv --band-hz 0 4 --penalty lasso --select ebic --out-graph g.json

  Periodogram diagnostics:
    whittle-graph bench figure1 --seed 1 --out results/
        """
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    leaves: Dict[str, argparse.ArgumentParser] = {}

    # simulate
    sim = commands.add_parser('simulate', help='Simulate a Hawkes model to a spike CSV')
    _add_common(sim)
    sim.add_argument('--preset', choices=['a', 'b', 'c'], help='Benchmark model')
    sim.add_argument('--p', type=int, help='Dimension for --preset (12, 48 or 96)')
    sim.add_argument('--model', help='Model JSON with nu, alpha, beta (instead of --preset)')
    sim.add_argument('--T', type=float, help='Total horizon in seconds')
    sim.add_argument('--m', type=int, help='Number of trials')
    sim.add_argument('--seed', type=int, default=0, help='Root seed')
    sim.add_argument('--burn-in', type=float, default=0.0, help='Seconds discarded before each trial')
    sim.add_argument('--max-events', type=float, default=DEFAULT_EVENT_BUDGET, help='Expected-event budget')
    sim.add_argument('--n-jobs', type=int, default=1, help='joblib workers')
    sim.add_argument('--out', help='Spike CSV to write (sidecar JSON goes next to it)')
    sim.add_argument('--report', help='Optional simulation report')
    _add_trial_layout(sim)
    sim.set_defaults(handler=cmd_simulate, command_key='simulate')
    leaves['simulate'] = sim

    # estimate
    est = commands.add_parser('estimate', help='Estimate the inverse spectrum and its graph')
    _add_common(est)
    est.add_argument('--in', dest='input', help='Spike CSV')
    est.add_argument('--omega', type=float, help='Angular frequency (rad/s)')
    est.add_argument('--band-hz', type=float, nargs=2, metavar=('LO', 'HI'), help='Frequency band in Hz')
    est.add_argument('--band', choices=sorted(NAMED_BANDS), help='Named band')
    est.add_argument('--penalty', choices=['ridge', 'lasso', 'none'], default='lasso',
                     help="Estimator ('none' inverts the periodogram)")
    est.add_argument('--lambda', dest='lam', type=float, help='Regularisation strength')
    est.add_argument('--select', choices=['ebic'], help='Choose lambda by eBIC along a lasso path')
    est.add_argument('--gamma', type=float, default=0.5, help='eBIC hyper-parameter (default: 0.5)')
    est.add_argument('--zero-tol', type=float, default=0.0, help='|Theta_qr| threshold for edges')
    est.add_argument('--out-theta', help='Matrix CSV for the estimate')
    est.add_argument('--out-graph', help='Graph JSON')
    est.add_argument('--report', help='Estimation report')
    _add_trial_layout(est)
    _add_grid(est)
    _add_solver(est)
    est.set_defaults(handler=cmd_estimate, command_key='estimate')
    leaves['estimate'] = est

    # tune
    tune = commands.add_parser('tune', help='Choose lambda on synthetic replicates with known truth')
    _add_common(tune)
    _add_experiment(tune)
    tune.add_argument('--penalty', choices=['ridge', 'lasso'], default='lasso', help='Estimator')
    tune.add_argument('--criterion', choices=['mse', 'f1'], default='mse', help='Selection criterion')
    tune.add_argument('--out', help='Tuning report (default: stdout)')
    tune.set_defaults(handler=cmd_tune, command_key='tune')
    leaves['tune'] = tune

    # bench
    bench = commands.add_parser('bench', help='Benchmark experiments')
    benches = bench.add_subparsers(dest='bench', metavar='BENCH')

    table1 = benches.add_parser('table1', help='Estimator comparison on a Hawkes benchmark')
    _add_common(table1)
    _add_experiment(table1)
    table1.add_argument('--replicates', type=int, default=20, help='Scoring replicates N')
    table1.add_argument('--estimators', default='inverted_periodogram,ridge,lasso_mse,lasso_f1',
                        help='Comma-separated estimators')
    table1.add_argument('--out', help='Directory for the report')
    table1.set_defaults(handler=cmd_bench_table1, command_key='bench table1')
    leaves['bench table1'] = table1

    figure1 = benches.add_parser('figure1', help='Periodogram diagnostics on Poisson data')
    _add_common(figure1)
    figure1.add_argument('--rate', type=float, default=1.0, help='Poisson rate per channel')
    figure1.add_argument('--T', type=float, default=1000.0, help='Total horizon in seconds')
    figure1.add_argument('--m', type=int, default=10, help='Trials / tapers')
    figure1.add_argument('--omega', type=float, default=0.0628, help='Angular frequency (rad/s)')
    figure1.add_argument('--coherence-p', type=int, default=7, help='Channels for the coherence panel')
    figure1.add_argument('--coherence-replicates', type=int, default=1000, help='Coherence samples')
    figure1.add_argument('--dims', type=int, nargs='+', default=[2, 3, 4, 5, 6, 7, 8, 9], help='Values of p')
    figure1.add_argument('--replicates', type=int, default=200, help='Replicates per p')
    figure1.add_argument('--seed', type=int, default=0, help='Root seed')
    figure1.add_argument('--n-jobs', type=int, default=1, help='joblib workers')
    figure1.add_argument('--out', help='Output directory')
    figure1.add_argument('--svg', action='store_true', help='Also render SVGs (needs matplotlib)')
    figure1.set_defaults(handler=cmd_bench_figure1, command_key='bench figure1')
    leaves['bench figure1'] = figure1

    # graph
    graph = commands.add_parser('graph', help='Partial coherence graph from a matrix CSV')
    _add_common(graph)
    graph.add_argument('--in', dest='input', help='Matrix CSV (q,r,re,im)')
    graph.add_argument('--omega', type=float, default=0.0, help='Frequency label when the CSV has no sidecar')
    graph.add_argument('--zero-tol', type=float, default=0.0, help='|Theta_qr| threshold for edges')
    graph.add_argument('--out', help='Graph JSON')
    graph.add_argument('--compare', help='Second graph JSON; prints common and unique edges')
    graph.set_defaults(handler=cmd_graph, command_key='graph')
    leaves['graph'] = graph

    return parser, leaves


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return its exit code."""
    parser, leaves = build_parser()
    try:
        args = parse_with_config(parser, leaves, argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except WhittleGraphError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if not hasattr(args, 'handler'):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    _configure_logging(args)
    try:
        return args.handler(args)
    except NUMERICAL_ERRORS as e:
        log.error(str(e))
        return EXIT_NUMERICAL
    except (WhittleGraphError, ValueError, OSError, ImportError) as e:
        log.error(str(e))
        return EXIT_USAGE


def main():
    """Console entry point."""
    sys.exit(cli())


if __name__ == '__main__':
    main()
