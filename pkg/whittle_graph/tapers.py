"""
Non-Overlapping Tapers and Tapered Fourier Transforms of Event Streams

Taper k (0-based) is the indicator of (k T', (k+1) T'] scaled to height
(2 pi T')^{-1/2}, T' = T/m. The transform of an event stream is a sum of
phases over the events in the taper's support; the mean-corrected variant
removes the contribution a constant rate would make.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from whittle_graph.errors import InvalidArgument, ShapeMismatch
from whittle_graph.events import EventData

# Relative slack when recognising omega T'/(2 pi) as a whole number.
_FOURIER_RTOL = 1e-12


@dataclass(frozen=True)
class TaperSet:
    """m equal-length non-overlapping tapers covering (0, T]."""
    m: int
    horizon: float

    def __post_init__(self):
        if self.m < 1:
            raise InvalidArgument(f"Taper count must be >= 1, got {self.m}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise InvalidArgument(f"Horizon must be positive, got {self.horizon}")

    @classmethod
    def for_data(cls, data: EventData) -> "TaperSet":
        return cls(m=data.m, horizon=data.horizon)

    @property
    def segment_length(self) -> float:
        return self.horizon / self.m

    @property
    def height(self) -> float:
        """(m / 2 pi T)^{1/2} = (2 pi T')^{-1/2}."""
        return 1.0 / math.sqrt(2.0 * math.pi * self.segment_length)

    def support(self, k: int) -> tuple:
        length = self.segment_length
        return k * length, (k + 1) * length


def fourier_frequencies(T: float, m: int, f_max: int) -> np.ndarray:
    """Grid 2 pi f / T' for f = 1..f_max with T' = T/m."""
    if not T > 0 or m < 1 or f_max < 1:
        raise InvalidArgument(f"Need T > 0, m >= 1, f_max >= 1 (got {T}, {m}, {f_max})")
    segment = T / m
    return 2.0 * np.pi * np.arange(1, f_max + 1) / segment


def nearest_fourier_frequency(omega: float, T: float, m: int) -> float:
    """Fourier frequency of T' = T/m closest to omega (index at least 1)."""
    segment = T / m
    index = max(1, int(round(abs(omega) * segment / (2.0 * np.pi))))
    return 2.0 * np.pi * index / segment


def fourier_index(omega: float, segment_length: float) -> float:
    return omega * segment_length / (2.0 * np.pi)


def is_fourier_frequency(omega: float, segment_length: float) -> bool:
    """True when omega = 2 pi f / T' for a nonzero integer f."""
    index = fourier_index(omega, segment_length)
    nearest = round(index)
    return nearest != 0 and abs(index - nearest) <= _FOURIER_RTOL * max(1.0, abs(index))


def _sinc(x: float) -> float:
    if x == 0.0:
        return 1.0
    return math.sin(x) / x


def taper_transform(taper: TaperSet, k: int, omega: float) -> complex:
    """
    Scaled Fourier transform of taper k at frequency omega:

        H_k = ((2 pi T')^{-1/2} / m) sinc(omega T'/2) exp(-i omega T' (k + 1/2))

    Exactly zero at nonzero Fourier frequencies of T'.
    """
    if not 0 <= k < taper.m:
        raise InvalidArgument(f"Taper index {k} outside 0..{taper.m - 1}")
    segment = taper.segment_length
    amplitude = taper.height / taper.m
    if is_fourier_frequency(omega, segment):
        return 0j
    phase = -omega * segment * (k + 0.5)
    return amplitude * _sinc(0.5 * omega * segment) * complex(math.cos(phase), math.sin(phase))


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """Tapered Fourier coefficients: values[k, q] for taper k, channel q."""
    omega: float
    values: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def to_dict(self) -> Dict[str, Any]:
        return {"omega": self.omega, "m": self.m, "p": self.p}


def _check_alignment(data: EventData, taper: TaperSet) -> None:
    if data.m != taper.m:
        raise ShapeMismatch(f"Data has {data.m} trials but there are {taper.m} tapers")
    if not math.isclose(data.horizon, taper.horizon, rel_tol=1e-12):
        raise ShapeMismatch(f"Data horizon {data.horizon} differs from taper horizon {taper.horizon}")


def tapered_ft(data: EventData, taper: TaperSet, omega: float) -> FourierCoeffs:
    """
    d_{k,q}(w) = height * sum over events t of trial k, channel q of exp(-i w t).

    Raises:
        ShapeMismatch: If the data and tapers disagree on m or T
    """
    _check_alignment(data, taper)
    values = np.zeros((data.m, data.p), dtype=complex)
    for k, row in enumerate(data.events):
        for q, times in enumerate(row):
            if times.size:
                values[k, q] = np.exp(-1j * omega * times).sum()
    values *= taper.height
    values.setflags(write=False)
    return FourierCoeffs(omega=float(omega), values=values)


def mean_corrected_ft(data: EventData, taper: TaperSet, omega: float) -> FourierCoeffs:
    """
    d_bar_k(w) = d_k(w) - d_k(0) H_k(T w) / H_k(0).

    The correction vanishes at Fourier frequencies of T', and d_bar(0) = 0.
    """
    raw = tapered_ft(data, taper, omega)
    zero = taper.height / taper.m
    ratios = np.array([taper_transform(taper, k, omega) / zero for k in range(taper.m)])
    if not np.any(ratios):
        return raw
    counts = data.counts().astype(float) * taper.height
    values = raw.values - counts * ratios[:, None]
    values.setflags(write=False)
    return FourierCoeffs(omega=float(omega), values=values)
