"""
Monte Carlo Harness

Shared plumbing for the benchmark runs: experiment settings, replicate
seeding, the worker pool and the aggregated report.

Seeding: the root SeedSequence(seed) spawns a training branch and a scoring
branch, each of which spawns one child per replicate. Training and scoring
replicates therefore never share a random stream, and a replicate's stream
depends only on (seed, role, index).
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from whittle_graph.errors import InvalidArgument
from whittle_graph.hawkes import PRESET_BLOCKS, PRESET_DIMENSIONS
from whittle_graph.estimation.estimators import RSEConfig
from whittle_graph.estimation.tuning import MetricReport, TuningReport

log = logging.getLogger(__name__)

T = TypeVar("T")

ESTIMATORS = ("inverted_periodogram", "ridge", "lasso_mse", "lasso_f1")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Settings for a Monte Carlo run.

    Attributes:
        scenario: Preset id 'a', 'b' or 'c'
        p: Dimension (12, 48 or 96)
        m: Number of trials / tapers
        trial_length: Seconds per trial T'; the total horizon is T = m T'
        replicates: Scoring replicates N
        training_replicates: Replicates used to choose lambda*
        omega: Requested angular frequency; evaluation uses the nearest Fourier frequency
        band_hz: Optional (lo, hi) band; when set, a smoothed periodogram is used instead
        estimators: Subset of ESTIMATORS
        grid_size, grid_low, grid_high: lambda grid, relative to max diag of S_hat
        seed: Root seed
        n_jobs: joblib workers for replicate loops
        solver: ADMM settings for the lasso
        max_expected_events: Simulation budget per replicate
        progress: Show tqdm bars on stderr
    """
    scenario: str = "a"
    p: int = 12
    m: int = 50
    trial_length: float = 200.0
    replicates: int = 20
    training_replicates: int = 5
    omega: float = 0.0628
    band_hz: Optional[Tuple[float, float]] = None
    estimators: Tuple[str, ...] = ESTIMATORS
    grid_size: int = 20
    grid_low: float = 1e-3
    grid_high: float = 10.0
    seed: int = 0
    n_jobs: int = 1
    solver: RSEConfig = field(default_factory=RSEConfig)
    max_expected_events: float = 1e8
    progress: bool = True

    def __post_init__(self):
        if str(self.scenario).lower() not in PRESET_BLOCKS:
            raise InvalidArgument(f"Unknown scenario '{self.scenario}', expected one of a, b, c")
        object.__setattr__(self, "scenario", str(self.scenario).lower())
        if self.p not in PRESET_DIMENSIONS:
            raise InvalidArgument(f"p must be one of {PRESET_DIMENSIONS}, got {self.p}")
        if self.m < 1 or not self.trial_length > 0:
            raise InvalidArgument(f"Need m >= 1 and trial_length > 0, got m={self.m}, trial_length={self.trial_length}")
        if self.replicates < 1 or self.training_replicates < 1:
            raise InvalidArgument("Replicate counts must be >= 1")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise InvalidArgument(f"Unknown estimator(s) {sorted(unknown)}, expected a subset of {ESTIMATORS}")
        if self.grid_size < 1 or not 0 < self.grid_low < self.grid_high:
            raise InvalidArgument("lambda grid needs grid_size >= 1 and 0 < grid_low < grid_high")
        object.__setattr__(self, "estimators", tuple(self.estimators))

    @property
    def T(self) -> float:
        """Total horizon m T' in seconds."""
        return self.m * self.trial_length

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "p": self.p,
            "m": self.m,
            "trial_length": self.trial_length,
            "T": self.T,
            "replicates": self.replicates,
            "training_replicates": self.training_replicates,
            "omega": self.omega,
            "band_hz": list(self.band_hz) if self.band_hz else None,
            "estimators": list(self.estimators),
            "grid": {"size": self.grid_size, "low": self.grid_low, "high": self.grid_high},
            "seed": self.seed,
            "solver": self.solver.to_dict(),
        }


def replicate_seeds(seed: int, training: int, scoring: int) -> Tuple[List[np.random.SeedSequence], List[np.random.SeedSequence]]:
    """Disjoint per-replicate streams for the training and scoring batches."""
    training_root, scoring_root = np.random.SeedSequence(seed).spawn(2)
    return training_root.spawn(training), scoring_root.spawn(scoring)


def run_replicates(
    function: Callable[..., T],
    seeds: Sequence[Any],
    n_jobs: int = 1,
    desc: str = "replicates",
    progress: bool = True,
) -> List[T]:
    """
    Evaluate function(seed) for every seed, in seed order.

    Results keep the order of `seeds` regardless of n_jobs, so any
    reduction over them is deterministic.
    """
    iterator = tqdm(seeds, desc=desc, disable=not progress, leave=False)
    if n_jobs == 1:
        return [function(s) for s in iterator]
    return list(Parallel(n_jobs=n_jobs)(delayed(function)(s) for s in iterator))


def mean_and_se(values: Sequence[float]) -> Tuple[float, float]:
    """Sample mean and SD/sqrt(N); the SE of a single value is 0."""
    if not values:
        raise InvalidArgument("No values to summarise")
    data = np.asarray(values, dtype=float)
    if data.size == 1:
        return float(data[0]), 0.0
    return float(np.mean(data)), float(np.std(data, ddof=1) / math.sqrt(data.size))


@dataclass
class MonteCarloReport:
    """
    Aggregated results of an estimator benchmark run.

    wall_clock is kept for logging only and is not serialized, so reports
    from identical settings are byte-identical.
    """
    config: ExperimentConfig
    omega_requested: float
    omega_evaluated: Any
    estimators: Dict[str, MetricReport] = field(default_factory=dict)
    tuning: Dict[str, TuningReport] = field(default_factory=dict)
    completed: int = 0
    wall_clock: float = 0.0
    header: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        if self.header is not None:
            data["header"] = self.header
        data.update({
            "scenario": self.config.scenario,
            "p": self.config.p,
            "m": self.config.m,
            "trial_length": self.config.trial_length,
            "T": self.config.T,
            "replicates": self.completed,
            "omega_requested": self.omega_requested,
            "omega_evaluated": self.omega_evaluated,
            "config": self.config.to_dict(),
            "estimators": {name: report.to_dict() for name, report in self.estimators.items()},
            "tuning": {name: report.to_dict() for name, report in self.tuning.items()},
        })
        return data
