"""
Run Configuration

A config file is flat `key = value` text mirroring the command-line flags
of one subcommand:

    # estimation settings
    penalty = lasso
    band-hz = 0 4
    select = ebic

Keys may use dashes or underscores. Values go through the same argparse
type conversion as the flag; flags given on the command line win.
"""

import argparse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from whittle_graph.errors import InvalidArgument, ParseError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}

# Namespace entries that are plumbing rather than run options.
_INTERNAL_KEYS = {"handler", "config", "quiet", "verbose"}


def read_config_file(path: Path) -> List[Tuple[int, str, str]]:
    """
    Return (line, key, raw value) triples in file order.

    Raises:
        ParseError: If a non-comment line has no '=' or an empty key
    """
    path = Path(path)
    if not path.is_file():
        raise InvalidArgument(f"Config file not found: {path}")
    entries = []
    for number, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip()
        if not sep or not key:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", line=number)
        entries.append((number, key, value.strip()))
    return entries


def _convert(action: argparse.Action, raw: str, line: int) -> Any:
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction, argparse._StoreConstAction)):
        lowered = raw.lower()
        if lowered not in _TRUE | _FALSE:
            raise ParseError(f"{action.dest}: expected true/false, got {raw!r}", line=line)
        # "flag = true" behaves like passing the flag
        return action.const if lowered in _TRUE else action.default

    convert = action.type or str
    parts = raw.split() if action.nargs not in (None, '?') else [raw]
    try:
        values = [convert(part) for part in parts]
    except (TypeError, ValueError) as e:
        raise ParseError(f"{action.dest}: cannot convert {raw!r} ({e})", line=line) from None
    if action.choices is not None:
        for value in values:
            if value not in action.choices:
                raise ParseError(f"{action.dest}: {value!r} is not one of {sorted(action.choices)}", line=line)
    if action.nargs in (None, '?'):
        return values[0]
    if isinstance(action.nargs, int) and len(values) != action.nargs:
        raise ParseError(f"{action.dest}: expected {action.nargs} values, got {len(values)}", line=line)
    return values


def config_defaults(path: Path, parser: argparse.ArgumentParser) -> Dict[str, Any]:
    """
    Translate a config file into parser defaults.

    Raises:
        InvalidArgument: If a key names no flag of this parser
        ParseError: If a value cannot be converted
    """
    actions: Dict[str, argparse.Action] = {}
    for action in parser._actions:
        for option in action.option_strings:
            if option.startswith('--'):
                actions[option[2:].replace('-', '_')] = action
        actions.setdefault(action.dest, action)

    defaults: Dict[str, Any] = {}
    for line, key, raw in read_config_file(path):
        name = key.replace('-', '_')
        if name == 'config' or name not in actions:
            raise InvalidArgument(f"{path}: line {line}: unknown option '{key}'")
        action = actions[name]
        defaults[action.dest] = _convert(action, raw, line)
    return defaults


def parse_with_config(
    parser: argparse.ArgumentParser,
    subparsers: Dict[str, argparse.ArgumentParser],
    argv: Optional[Sequence[str]],
) -> argparse.Namespace:
    """
    Parse argv; when --config is given, load it as defaults of the chosen
    subcommand and parse again so explicit flags override the file.
    """
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if path and getattr(args, "command_key", None):
        target = subparsers[args.command_key]
        target.set_defaults(**config_defaults(Path(path), target))
        args = parser.parse_args(argv)
    return args


@dataclass
class RunConfig:
    """
    Resolved settings of one CLI invocation.

    Attributes:
        subcommand: e.g. 'estimate' or 'bench table1'
        options: Every resolved flag value, recorded in report headers
        seed: Root seed, if the subcommand uses one
        inputs: Paths read by the run
        outputs: Paths written by the run
    """
    subcommand: str
    options: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    inputs: List[Path] = field(default_factory=list)
    outputs: List[Path] = field(default_factory=list)

    @classmethod
    def from_namespace(cls, args: argparse.Namespace, inputs: Sequence[str] = (), outputs: Sequence[str] = ()) -> "RunConfig":
        options = {k: v for k, v in sorted(vars(args).items()) if k not in _INTERNAL_KEYS and k != "command_key"}
        return cls(
            subcommand=args.command_key,
            options=options,
            seed=getattr(args, "seed", None),
            inputs=[Path(getattr(args, name)) for name in inputs if getattr(args, name, None)],
            outputs=[Path(getattr(args, name)) for name in outputs if getattr(args, name, None)],
        )

    def validate(self) -> None:
        """
        Check paths before any computation.

        Raises:
            InvalidArgument: Missing input file, or an output directory that is a file
        """
        for path in self.inputs:
            if not path.is_file():
                raise InvalidArgument(f"Input file not found: {path}")
        for path in self.outputs:
            parent = path.parent
            if parent.exists() and not parent.is_dir():
                raise InvalidArgument(f"Cannot write {path}: {parent} is not a directory")

    def require(self, *names: str) -> None:
        """Raise InvalidArgument unless every named option is set (flag or config file)."""
        missing = [n for n in names if self.options.get(n) in (None, "")]
        if missing:
            flags = ", ".join("--" + n.replace('_', '-') for n in missing)
            raise InvalidArgument(f"{self.subcommand}: missing required option(s) {flags}")
