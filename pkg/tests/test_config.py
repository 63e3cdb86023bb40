import argparse

import pytest

from whittle_graph.__main__ import build_parser
from whittle_graph.config import RunConfig, config_defaults, parse_with_config, read_config_file
from whittle_graph.errors import InvalidArgument, ParseError


def small_parser():
    parser = argparse.ArgumentParser()
    parser.add_argument('--lambda', dest='lam', type=float)
    parser.add_argument('--band-hz', type=float, nargs=2)
    parser.add_argument('--penalty', choices=['ridge', 'lasso'], default='lasso')
    parser.add_argument('--strict', action='store_true')
    return parser


def test_read_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# settings\npenalty = ridge   # inline comment\n\nband-hz = 0 4\n")
    assert read_config_file(path) == [(2, "penalty", "ridge"), (4, "band-hz", "0 4")]


def test_malformed_config_line(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("penalty = ridge\nstrict\n")
    with pytest.raises(ParseError) as excinfo:
        read_config_file(path)
    assert excinfo.value.line == 2
    with pytest.raises(InvalidArgument):
        read_config_file(tmp_path / "missing.cfg")


def test_config_defaults_convert_like_flags(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("lambda = 0.25\nband_hz = 4 8\npenalty = ridge\nstrict = yes\n")
    assert config_defaults(path, small_parser()) == {
        "lam": 0.25,
        "band_hz": [4.0, 8.0],
        "penalty": "ridge",
        "strict": True,
    }


@pytest.mark.parametrize("text", [
    "lambda = small\n",
    "band-hz = 4\n",
    "penalty = elastic\n",
    "strict = maybe\n",
])
def test_bad_config_values(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    with pytest.raises(ParseError):
        config_defaults(path, small_parser())


def test_unknown_config_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("colour = red\n")
    with pytest.raises(InvalidArgument):
        config_defaults(path, small_parser())


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "estimate.cfg"
    path.write_text("penalty = ridge\nlambda = 0.5\nband-hz = 0 4\n")
    parser, leaves = build_parser()
    args = parse_with_config(parser, leaves, ["estimate", "--config", str(path), "--penalty", "lasso"])
    assert args.penalty == "lasso"
    assert args.lam == 0.5
    assert args.band_hz == [0.0, 4.0]


def test_run_config_records_options(tmp_path):
    parser, leaves = build_parser()
    args = parse_with_config(parser, leaves, ["graph", "--in", str(tmp_path / "theta.csv"), "--quiet"])
    run = RunConfig.from_namespace(args, inputs=("input",))
    assert run.subcommand == "graph"
    assert "quiet" not in run.options and "handler" not in run.options
    assert list(run.options) == sorted(run.options)
    with pytest.raises(InvalidArgument):
        run.validate()
    with pytest.raises(InvalidArgument):
        RunConfig("graph", options={"input": None}).require("input")
