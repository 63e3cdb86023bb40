"""
Serialization Support for Data Files and Reports

- spike CSV `trial,channel,time` with a JSON sidecar holding p, m and T
- complex matrix CSV `q,r,re,im` (upper triangle, diagonal included)
- graph JSON, report JSON/YAML and plot-data CSV
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from whittle_graph.errors import InvalidArgument, ParseError, ValidationError
from whittle_graph.events import EventData
from whittle_graph.hermitian import HermitianMatrix
from whittle_graph.estimation.graph import PartialCoherenceGraph

try:
    import yaml
    YAML_AVAILABLE = True
except ImportError:
    YAML_AVAILABLE = False

log = logging.getLogger(__name__)

SPIKE_HEADER = ["trial", "channel", "time"]
MATRIX_HEADER = ["q", "r", "re", "im"]

# Slack for times sitting on a trial boundary after 9-digit rounding.
_BOUNDARY_RTOL = 1e-9


def to_native(data: Any) -> Any:
    """
    Convert objects with to_dict(), numpy scalars and arrays to plain
    Python values so both JSON and YAML emit them without tags.
    """
    if hasattr(data, 'to_dict'):
        data = data.to_dict()
    if isinstance(data, dict):
        return {str(key): to_native(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [to_native(item) for item in data]
    if isinstance(data, np.ndarray):
        return to_native(data.tolist())
    if isinstance(data, np.bool_):
        return bool(data)
    if isinstance(data, np.integer):
        return int(data)
    if isinstance(data, np.floating):
        return float(data)
    if isinstance(data, float) and not math.isfinite(data):
        # JSON has no infinity; the string survives both formats
        return "inf" if data > 0 else ("-inf" if data < 0 else "nan")
    return data


def serialize_to_json(data: Any, pretty: bool = True) -> str:
    """
    Serialize data to a JSON string.

    Args:
        data: Object with to_dict(), dict or list
        pretty: Indent the output
    """
    data = to_native(data)
    if pretty:
        return json.dumps(data, indent=2, sort_keys=False)
    return json.dumps(data)


def serialize_to_yaml(data: Any) -> str:
    """
    Serialize data to a YAML string.

    Raises:
        ImportError: If PyYAML is not installed
    """
    if not YAML_AVAILABLE:
        raise ImportError(
            "PyYAML is not installed. Install it with: pip install pyyaml"
        )
    return yaml.dump(to_native(data), default_flow_style=False, sort_keys=False)


def save_report(data: Any, output_path: Path, format: str = 'json') -> None:
    """
    Save a report in the requested format.

    Raises:
        InvalidArgument: If format is not 'json' or 'yaml'
        ImportError: If YAML is requested but PyYAML is missing
    """
    format = format.lower()
    if format == 'json':
        text = serialize_to_json(data) + "\n"
    elif format in ('yaml', 'yml'):
        text = serialize_to_yaml(data)
    else:
        raise InvalidArgument(f"Unsupported format: {format}. Use 'json' or 'yaml'")
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(text)
    log.debug(f"[write] report -> {output_path}")


def load_report(path: Path) -> Dict[str, Any]:
    """Read a JSON or YAML report back into a dictionary (format from the suffix)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in ('.yaml', '.yml'):
        if not YAML_AVAILABLE:
            raise ImportError("PyYAML is not installed. Install it with: pip install pyyaml")
        return yaml.safe_load(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e.msg}", line=e.lineno) from None


def report_header(version: str, subcommand: str, options: Dict[str, Any], seed: Optional[int]) -> Dict[str, Any]:
    """Header recorded in every report so a run can be repeated from it."""
    return {
        "package": "whittle-graph",
        "version": version,
        "subcommand": subcommand,
        "options": to_native(options),
        "seed": seed,
    }


# ---------------------------------------------------------------- spike data


def sidecar_path(path: Path) -> Path:
    return Path(path).with_suffix('.json')


def write_spike_csv(data: EventData, path: Path, trials_concatenated: bool = False) -> None:
    """
    Write events as `trial,channel,time` rows plus a sidecar JSON.

    Times are written relative to the start of their trial unless
    trials_concatenated is set, in which case global times are kept.
    Each value carries 9 significant digits.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(SPIKE_HEADER)
        for k in range(data.m):
            for q in range(data.p):
                times = data.events[k][q] if trials_concatenated else data.local_times(k, q)
                for t in times:
                    writer.writerow([k, q, f"{t:.9g}"])
    metadata = data.to_dict()
    metadata["trials_concatenated"] = trials_concatenated
    sidecar_path(path).write_text(serialize_to_json(metadata) + "\n")
    log.info(f"[write] {data.n_events} events ({data.m} trials x {data.p} channels) -> {path}")


def read_sidecar(path: Path) -> Tuple[int, int, float]:
    """
    Read (p, m, T) from the sidecar next to a spike CSV.

    Raises:
        ParseError: If the sidecar is missing or incomplete
    """
    sidecar = sidecar_path(path)
    if not sidecar.exists():
        raise ParseError(f"Sidecar not found: {sidecar}")
    metadata = load_report(sidecar)
    try:
        return int(metadata["p"]), int(metadata["m"]), float(metadata["T"])
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{sidecar}: bad or missing field {e}") from None


def _parse_spike_row(row: List[str], line: int) -> Tuple[int, int, float]:
    if len(row) != 3:
        raise ParseError(f"expected 3 fields (trial,channel,time), got {len(row)}", line=line)
    try:
        trial, channel, time = int(row[0]), int(row[1]), float(row[2])
    except ValueError:
        raise ParseError(f"cannot parse row {','.join(row)!r}", line=line) from None
    if not math.isfinite(time):
        raise ParseError(f"non-finite time {row[2]!r}", line=line)
    return trial, channel, time


def read_spike_csv(path: Path, trials_concatenated: bool = False) -> EventData:
    """
    Read a spike CSV and its sidecar into EventData.

    With trials_concatenated=False (the default) times are per-trial on
    (0, T'] and are offset by k T' onto the global axis; otherwise they are
    global times on (0, T].

    Raises:
        ParseError: Malformed rows, or times not increasing within a channel
        ValidationError: Trial, channel or time outside its range
    """
    path = Path(path)
    p, m, horizon = read_sidecar(path)
    segment = horizon / m
    slack = _BOUNDARY_RTOL * horizon
    events: List[List[List[float]]] = [[[] for _ in range(p)] for _ in range(m)]

    with path.open(newline='') as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is not None and [h.strip() for h in header] != SPIKE_HEADER:
            raise ParseError(f"expected header {','.join(SPIKE_HEADER)}", line=1)
        for row in reader:
            line = reader.line_num
            if not row or not ''.join(row).strip():
                continue
            trial, channel, time = _parse_spike_row(row, line)
            if not 0 <= trial < m:
                raise ValidationError(f"trial {trial} outside 0..{m - 1}", line=line)
            if not 0 <= channel < p:
                raise ValidationError(f"channel {channel} outside 0..{p - 1}", line=line)
            if trials_concatenated:
                lo, hi = trial * segment, (trial + 1) * segment
                if not (lo - slack < time <= hi + slack) or time <= 0:
                    raise ValidationError(f"time {time} outside trial segment ({lo:g}, {hi:g}]", line=line)
                global_time = time
            else:
                if not 0.0 < time <= segment + slack:
                    raise ValidationError(f"time {time} outside (0, {segment:g}]", line=line)
                global_time = time + trial * segment
            previous = events[trial][channel]
            if previous and global_time <= previous[-1]:
                raise ParseError(
                    f"times not strictly increasing in trial {trial}, channel {channel}",
                    line=line,
                )
            previous.append(min(global_time, (trial + 1) * segment))

    data = EventData(
        p=p,
        m=m,
        horizon=horizon,
        events=[[np.asarray(times, dtype=float) for times in row] for row in events],
    )
    log.info(f"[read] {data.n_events} events ({m} trials x {p} channels) from {path}")
    return data


# ---------------------------------------------------------------- matrices


def write_matrix_csv(matrix: HermitianMatrix, path: Path, metadata: Optional[Dict[str, Any]] = None) -> None:
    """
    Write the upper triangle (diagonal included) as `q,r,re,im` rows.

    Values use repr() so reading them back is exact. metadata, when given,
    goes to a sidecar JSON next to the CSV.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(MATRIX_HEADER)
        for q, r, value in matrix.upper_entries():
            writer.writerow([q, r, repr(value.real), repr(value.imag)])
    if metadata is not None:
        sidecar_path(path).write_text(serialize_to_json(metadata) + "\n")


def read_matrix_csv(path: Path, p: Optional[int] = None) -> HermitianMatrix:
    """
    Read a `q,r,re,im` matrix CSV. Missing entries are zero.

    Args:
        path: CSV file
        p: Dimension; inferred from the largest index when omitted

    Raises:
        ParseError: Malformed rows
        ValidationError: Indices below the diagonal or outside 0..p-1
    """
    path = Path(path)
    entries: Dict[Tuple[int, int], complex] = {}
    with path.open(newline='') as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != MATRIX_HEADER:
            raise ParseError(f"expected header {','.join(MATRIX_HEADER)}", line=1)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields (q,r,re,im), got {len(row)}", line=line)
            try:
                q, r = int(row[0]), int(row[1])
                value = complex(float(row[2]), float(row[3]))
            except ValueError:
                raise ParseError(f"cannot parse row {','.join(row)!r}", line=line) from None
            if q < 0 or r < q:
                raise ValidationError(f"entry ({q}, {r}) is not in the upper triangle", line=line)
            if p is not None and r >= p:
                raise ValidationError(f"entry ({q}, {r}) outside a {p}x{p} matrix", line=line)
            entries[(q, r)] = value

    if p is None:
        if not entries:
            raise ParseError(f"{path}: matrix file has no entries")
        p = 1 + max(r for _, r in entries)
    upper = np.zeros((p, p), dtype=complex)
    for (q, r), value in entries.items():
        upper[q, r] = value
    return HermitianMatrix(upper)


def read_matrix_sidecar(path: Path) -> Dict[str, Any]:
    """Metadata written next to a matrix CSV, or an empty dict."""
    sidecar = sidecar_path(path)
    return load_report(sidecar) if sidecar.exists() else {}


# ---------------------------------------------------------------- graphs


def save_graph(graph: PartialCoherenceGraph, path: Path) -> None:
    save_report(graph, path, format='json')


def load_graph(path: Path) -> PartialCoherenceGraph:
    data = load_report(path)
    try:
        return PartialCoherenceGraph.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path}: not a graph file ({e})") from None


# ---------------------------------------------------------------- plot data


def write_plot_csv(
    path: Path,
    panel: str,
    columns: Sequence[str],
    rows: Sequence[Sequence[float]],
) -> None:
    """Plot-data CSV: a `# panel` comment line, a column header, then rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as handle:
        handle.write(f"# {panel}\n")
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(list(columns))
        for row in rows:
            writer.writerow([repr(float(value)) for value in row])
    log.info(f"[write] {panel} -> {path}")


def read_plot_csv(path: Path) -> Tuple[str, List[str], np.ndarray]:
    """Return (panel, columns, values) from a plot-data CSV."""
    lines = Path(path).read_text().splitlines()
    if len(lines) < 2 or not lines[0].startswith('#'):
        raise ParseError(f"{path}: expected a '# panel' line and a header", line=1)
    panel = lines[0][1:].strip()
    columns = lines[1].split(',')
    values = [[float(v) for v in line.split(',')] for line in lines[2:] if line.strip()]
    return panel, columns, np.asarray(values, dtype=float).reshape(-1, len(columns))


# ---------------------------------------------------------------- text


def format_graph_text(graph: PartialCoherenceGraph, top: int = 20) -> str:
    """Human-readable edge listing, strongest partial coherence first."""
    omega = graph.to_dict()["omega"]
    where = f"band {omega['band_hz']} Hz" if isinstance(omega, dict) else f"omega = {omega:.6g} rad/s"
    lines = [
        "=" * 60,
        f"Partial Coherence Graph ({where})",
        "=" * 60,
        f"Nodes: {graph.p}",
        f"Edges: {len(graph.edges)}",
        f"Isolated nodes: {len(graph.isolated_nodes())}",
    ]
    strongest = sorted(graph.edges.items(), key=lambda item: (-item[1], item[0]))[:top]
    if strongest:
        lines.append("")
        lines.append("Strongest edges:")
        for (q, r), weight in strongest:
            lines.append(f"  {q:>4} -- {r:<4} pc = {weight:.4f}")
    lines.append("=" * 60)
    return '\n'.join(lines)


def format_summary_text(summary: Dict[str, Any]) -> str:
    """
    Format a Monte Carlo report as a table of mean (standard error) cells.

    Args:
        summary: MonteCarloReport.to_dict() output
    """
    lines = [
        "=" * 60,
        f"Scenario {summary.get('scenario', '?')}: p={summary.get('p')} m={summary.get('m')} "
        f"T={summary.get('T')} N={summary.get('replicates')}",
        "=" * 60,
        f"{'estimator':<22}{'MSE':>18}{'F1':>10}{'TPR':>8}{'FPR':>8}",
    ]

    def cell(entry: Dict[str, Any], width: int, digits: int) -> str:
        if not entry or entry.get("mean") is None:
            return f"{'-':>{width}}"
        if digits == 2:
            return f"{entry['mean']:>{width}.2f}"
        return f"{entry['mean']:.{digits}f} ({entry['se']:.{digits}f})".rjust(width)

    for name, metrics in summary.get("estimators", {}).items():
        lines.append(
            f"{name:<22}{cell(metrics.get('mse'), 18, 3)}"
            f"{cell(metrics.get('f1') if 'lasso' in name else None, 10, 2)}"
            f"{cell(metrics.get('tpr') if 'lasso' in name else None, 8, 2)}"
            f"{cell(metrics.get('fpr') if 'lasso' in name else None, 8, 2)}"
        )
        if metrics.get("failures"):
            lines.append(f"  ({metrics['failures']} replicate(s) failed)")
    lines.append("=" * 60)
    return '\n'.join(lines)
