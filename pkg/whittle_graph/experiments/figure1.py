"""
Periodogram Diagnostics for Independent Poisson Processes

Three panels of plot data, all with independent unit-rate Poisson channels
(true spectrum I/2pi):
  a) sampled coherence between two channels against its Goodman density
  b) median and 95% band of the elementwise-max error of S_hat versus p
  c) median and 95% band of the condition number of S_hat versus p
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.stats

from whittle_graph.errors import InvalidArgument
from whittle_graph.hawkes import HawkesModel, simulate
from whittle_graph.hermitian import HermitianMatrix, condition_number
from whittle_graph.periodogram import coherence, goodman_cdf, goodman_density, goodman_mean, periodogram
from whittle_graph.serialization import write_plot_csv
from whittle_graph.tapers import TaperSet, nearest_fourier_frequency
from whittle_graph.experiments.harness import mean_and_se, run_replicates

log = logging.getLogger(__name__)

PANEL_FILES = {
    "a": "figure1a_coherence.csv",
    "b": "figure1b_error.csv",
    "c": "figure1c_condition.csv",
}


@dataclass(frozen=True)
class Figure1Config:
    rate: float = 1.0
    T: float = 1000.0
    m: int = 10
    omega: float = 0.0628
    coherence_p: int = 7
    coherence_replicates: int = 1000
    dims: Tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8, 9)
    replicates: int = 200
    bins: int = 25
    seed: int = 0
    n_jobs: int = 1
    progress: bool = True

    def __post_init__(self):
        if not self.rate > 0 or not self.T > 0 or self.m < 2:
            raise InvalidArgument("Need rate > 0, T > 0 and m >= 2")
        if self.coherence_p < 2 or not self.dims or min(self.dims) < 1:
            raise InvalidArgument("Coherence needs p >= 2 and dims must be positive")
        if self.coherence_replicates < 2 or self.replicates < 1:
            raise InvalidArgument("Replicate counts too small")
        object.__setattr__(self, "dims", tuple(sorted(int(p) for p in self.dims)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rate": self.rate,
            "T": self.T,
            "m": self.m,
            "omega": self.omega,
            "coherence_p": self.coherence_p,
            "coherence_replicates": self.coherence_replicates,
            "dims": list(self.dims),
            "replicates": self.replicates,
            "bins": self.bins,
            "seed": self.seed,
        }


@dataclass
class CurveSummary:
    """Median and 2.5 / 97.5 percentiles of a statistic at each p."""
    dims: List[int]
    median: List[float]
    lo: List[float]
    hi: List[float]

    @classmethod
    def from_samples(cls, dims: List[int], samples: np.ndarray) -> "CurveSummary":
        # samples[i, j]: replicate i, dimension dims[j]
        lo, median, hi = np.percentile(samples, [2.5, 50.0, 97.5], axis=0)
        return cls(list(dims), median.tolist(), lo.tolist(), hi.tolist())

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return list(zip(self.dims, self.median, self.lo, self.hi))

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.dims, "median": self.median, "lo": self.lo, "hi": self.hi}


@dataclass
class Figure1Report:
    config: Figure1Config
    omega_evaluated: float
    coherence_samples: np.ndarray = field(repr=False)
    coherence_mean: float = 0.0
    coherence_se: float = 0.0
    theory_mean: float = 0.0
    ks_statistic: float = 0.0
    ks_pvalue: float = 1.0
    error: Optional[CurveSummary] = None
    condition: Optional[CurveSummary] = None
    header: Optional[Dict[str, Any]] = None

    def histogram(self) -> List[Tuple[float, float, float]]:
        """(bin centre, empirical density, Goodman density) rows for panel a."""
        counts, edges = np.histogram(self.coherence_samples, bins=self.config.bins, range=(0.0, 1.0), density=True)
        centres = 0.5 * (edges[:-1] + edges[1:])
        theory = [goodman_density(x, self.config.m, 0.0) for x in centres]
        return list(zip(centres.tolist(), counts.tolist(), theory))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        if self.header is not None:
            data["header"] = self.header
        data.update({
            "config": self.config.to_dict(),
            "omega_requested": self.config.omega,
            "omega_evaluated": self.omega_evaluated,
            "coherence": {
                "p": self.config.coherence_p,
                "samples": int(self.coherence_samples.size),
                "mean": self.coherence_mean,
                "se": self.coherence_se,
                "theory_mean": self.theory_mean,
                "ks_statistic": self.ks_statistic,
                "ks_pvalue": self.ks_pvalue,
            },
            "error": self.error.to_dict() if self.error else None,
            "condition": self.condition.to_dict() if self.condition else None,
        })
        return data


def _poisson_periodogram(seed: np.random.SeedSequence, config: Figure1Config, p: int, omega: float) -> np.ndarray:
    model = HawkesModel.poisson(np.full(p, config.rate))
    data = simulate(model, config.T, config.m, seed)
    return periodogram(data, TaperSet.for_data(data), omega).data


def _coherence_sample(seed: np.random.SeedSequence, config: Figure1Config, omega: float) -> float:
    data = simulate(HawkesModel.poisson(np.full(config.coherence_p, config.rate)), config.T, config.m, seed)
    S_hat = periodogram(data, TaperSet.for_data(data), omega)
    return coherence(S_hat, 0, 1)


def _dimension_sweep(seed: np.random.SeedSequence, config: Figure1Config, omega: float) -> Tuple[List[float], List[float]]:
    # channels are independent, so the leading p x p block of a p_max sample is a p-channel sample
    S_hat = _poisson_periodogram(seed, config, max(config.dims), omega)
    truth = config.rate / (2.0 * np.pi)
    errors, conditions = [], []
    for p in config.dims:
        block = S_hat[:p, :p]
        errors.append(float(np.max(np.abs(block - truth * np.eye(p)))))
        conditions.append(condition_number(HermitianMatrix(block)))
    return errors, conditions


def run_figure1(config: Figure1Config, header: Optional[Dict[str, Any]] = None) -> Figure1Report:
    """Simulate the three diagnostic panels."""
    omega = nearest_fourier_frequency(config.omega, config.T, config.m)
    coherence_root, sweep_root = np.random.SeedSequence(config.seed).spawn(2)

    log.info(f"[figure1 1/2] coherence: p={config.coherence_p}, {config.coherence_replicates} replicates")
    samples = np.asarray(run_replicates(
        partial(_coherence_sample, config=config, omega=omega),
        coherence_root.spawn(config.coherence_replicates),
        config.n_jobs,
        desc="coherence",
        progress=config.progress,
    ))
    mean, se = mean_and_se(samples.tolist())
    cdf = np.vectorize(lambda x: goodman_cdf(x, config.m, 0.0))
    ks = scipy.stats.kstest(samples, cdf)

    log.info(f"[figure1 2/2] dimension sweep p={list(config.dims)}, {config.replicates} replicates")
    sweeps = run_replicates(
        partial(_dimension_sweep, config=config, omega=omega),
        sweep_root.spawn(config.replicates),
        config.n_jobs,
        desc="sweep",
        progress=config.progress,
    )
    errors = np.array([s[0] for s in sweeps])
    conditions = np.array([s[1] for s in sweeps])

    report = Figure1Report(
        config=config,
        omega_evaluated=omega,
        coherence_samples=samples,
        coherence_mean=mean,
        coherence_se=se,
        theory_mean=goodman_mean(config.m, 0.0),
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        error=CurveSummary.from_samples(list(config.dims), errors),
        condition=CurveSummary.from_samples(list(config.dims), conditions),
        header=header,
    )
    log.info(f"[figure1] KS statistic {report.ks_statistic:.4f}, coherence mean {mean:.4f} (theory {report.theory_mean:.4f})")
    if not math.isfinite(report.condition.median[-1]):
        log.warning("[figure1] condition number is infinite at the largest p (p >= m)")
    return report


def write_figure1(report: Figure1Report, out_dir: Path) -> Dict[str, Path]:
    """Write the three plot-data CSVs into out_dir and return their paths."""
    out_dir = Path(out_dir)
    paths = {panel: out_dir / name for panel, name in PANEL_FILES.items()}
    m = report.config.m
    write_plot_csv(
        paths["a"],
        f"figure1a: coherence, p={report.config.coherence_p}, m={m}",
        ["x", "y", "theory"],
        report.histogram(),
    )
    write_plot_csv(paths["b"], f"figure1b: elementwise-max error of S_hat, m={m}", ["x", "median", "lo", "hi"], report.error.rows())
    write_plot_csv(paths["c"], f"figure1c: condition number of S_hat, m={m}", ["x", "median", "lo", "hi"], report.condition.rows())
    return paths
