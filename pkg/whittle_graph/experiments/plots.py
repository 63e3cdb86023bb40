"""
Optional SVG rendering of plot-data CSVs (requires matplotlib).
"""

import logging
from pathlib import Path
from typing import List

from whittle_graph.serialization import read_plot_csv

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    MATPLOTLIB_AVAILABLE = True
except ImportError:
    MATPLOTLIB_AVAILABLE = False

log = logging.getLogger(__name__)


def render_svg(csv_path: Path, svg_path: Path = None) -> Path:
    """
    Draw one plot-data CSV next to it as SVG.

    `x,y,theory` files become a bar histogram with a density line;
    `x,median,lo,hi` files become a median line with a shaded band.

    Raises:
        ImportError: If matplotlib is not installed
    """
    if not MATPLOTLIB_AVAILABLE:
        raise ImportError("matplotlib is not installed. Install it with: pip install matplotlib")
    csv_path = Path(csv_path)
    svg_path = Path(svg_path) if svg_path else csv_path.with_suffix(".svg")
    panel, columns, values = read_plot_csv(csv_path)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    x = values[:, 0]
    if columns[:3] == ["x", "y", "theory"]:
        width = (x[1] - x[0]) if len(x) > 1 else 0.05
        ax.bar(x, values[:, 1], width=width, alpha=0.5, label="empirical")
        ax.plot(x, values[:, 2], color="black", label="theory")
        ax.legend()
    else:
        ax.plot(x, values[:, 1], marker="o", label="median")
        ax.fill_between(x, values[:, 2], values[:, 3], alpha=0.3, label="95% band")
        ax.set_xlabel("p")
        if "condition" in panel:
            ax.set_yscale("log")
    ax.set_title(panel, fontsize=9)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
    log.debug(f"[plot] {svg_path}")
    return svg_path


def render_all(csv_paths: List[Path]) -> List[Path]:
    return [render_svg(path) for path in csv_paths]
