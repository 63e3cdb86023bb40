"""
Multivariate Event Streams

EventData holds m trials of a p-variate point process laid end to end on a
single axis (0, T]: trial k occupies the segment (k T', (k+1) T'] with
T' = T/m, so that non-overlapping taper k covers exactly trial k.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from whittle_graph.errors import InvalidArgument, ShapeMismatch, ValidationError

# Slack allowed at segment edges after adding the k T' offset.
_EDGE_RTOL = 1e-9


@dataclass(eq=False)
class EventData:
    """
    Per-trial, per-channel sorted event times.

    Attributes:
        p: Number of channels
        m: Number of trials
        horizon: Total observation length T in seconds
        events: events[k][q] is a strictly increasing float array of global
            times inside trial k's segment
    """
    p: int
    m: int
    horizon: float
    events: List[List[np.ndarray]] = field(repr=False)

    def __post_init__(self):
        if self.p < 1 or self.m < 1:
            raise InvalidArgument(f"Need p >= 1 and m >= 1, got p={self.p}, m={self.m}")
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise InvalidArgument(f"Horizon must be positive and finite, got {self.horizon}")
        if len(self.events) != self.m or any(len(row) != self.p for row in self.events):
            raise ShapeMismatch(f"events must be an m x p nested list for m={self.m}, p={self.p}")
        slack = _EDGE_RTOL * self.horizon
        cleaned = []
        for k, row in enumerate(self.events):
            lo, hi = self.segment(k)
            cleaned_row = []
            for q, times in enumerate(row):
                times = np.asarray(times, dtype=float).ravel()
                if times.size:
                    if not np.all(np.isfinite(times)):
                        raise ValidationError(f"trial {k}, channel {q}: non-finite event time")
                    if np.any(np.diff(times) <= 0):
                        raise ValidationError(f"trial {k}, channel {q}: times not strictly increasing")
                    if times[0] <= lo - slack or times[-1] > hi + slack:
                        raise ValidationError(
                            f"trial {k}, channel {q}: times outside segment ({lo:g}, {hi:g}]"
                        )
                    if times[0] <= 0.0 or times[-1] > self.horizon + slack:
                        raise ValidationError(
                            f"trial {k}, channel {q}: times outside (0, {self.horizon:g}]"
                        )
                times.setflags(write=False)
                cleaned_row.append(times)
            cleaned.append(cleaned_row)
        self.events = cleaned

    @property
    def segment_length(self) -> float:
        """T' = T/m."""
        return self.horizon / self.m

    def segment(self, k: int) -> tuple:
        """Global support (lo, hi] of trial k."""
        length = self.segment_length
        return k * length, (k + 1) * length

    @classmethod
    def from_trials(cls, trials: Sequence[Sequence[Any]], segment_length: float) -> "EventData":
        """
        Build from per-trial recordings on (0, T'] each.

        Trial k is shifted by k T' onto the global axis.
        """
        if not trials:
            raise InvalidArgument("At least one trial is required")
        p = len(trials[0])
        events = []
        for k, trial in enumerate(trials):
            if len(trial) != p:
                raise ShapeMismatch(f"Trial {k} has {len(trial)} channels, expected {p}")
            offset = k * segment_length
            events.append([np.asarray(times, dtype=float) + offset for times in trial])
        return cls(p=p, m=len(trials), horizon=segment_length * len(trials), events=events)

    def local_times(self, k: int, q: int) -> np.ndarray:
        """Times of trial k, channel q relative to the start of the trial."""
        return self.events[k][q] - k * self.segment_length

    def counts(self) -> np.ndarray:
        """m x p matrix of event counts."""
        return np.array([[times.size for times in row] for row in self.events], dtype=int)

    @property
    def n_events(self) -> int:
        return int(self.counts().sum())

    def rates(self) -> np.ndarray:
        """Empirical per-channel rate (events/s) over all trials."""
        return self.counts().sum(axis=0) / self.horizon

    def same_as(self, other: "EventData") -> bool:
        """Exact equality of shape, horizon and every event time."""
        if (self.p, self.m, self.horizon) != (other.p, other.m, other.horizon):
            return False
        return all(
            np.array_equal(a, b)
            for row_a, row_b in zip(self.events, other.events)
            for a, b in zip(row_a, row_b)
        )

    def to_dict(self) -> Dict[str, Any]:
        """Sidecar metadata."""
        return {"p": self.p, "m": self.m, "T": self.horizon}
