"""
Multi-Taper Periodogram and Coherence

- multitaper(): average of m outer products of mean-corrected coefficients
- smoothed_periodogram(): additional average over the Fourier frequencies of a band
- coherence() and the Goodman sampling density of estimated coherence
- deviation_bound(): finite-m tail bound on a single periodogram entry
"""

import logging
import math
from typing import Dict, Iterable, Sequence, Tuple, Union

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.special

from whittle_graph.errors import (
    DegenerateChannel,
    EmptyInput,
    InvalidArgument,
    NotPositiveDefinite,
    OutOfDomain,
)
from whittle_graph.events import EventData
from whittle_graph.hermitian import Band, HermitianMatrix, SpectralMatrix
from whittle_graph.tapers import FourierCoeffs, TaperSet, mean_corrected_ft

log = logging.getLogger(__name__)

# Negative eigenvalues down to -PSD_RTOL * lambda_max are rounding and get clipped.
PSD_RTOL = 1e-10

NAMED_BANDS: Dict[str, Tuple[float, float]] = {
    "delta": (0.0, 4.0),
    "theta": (4.0, 8.0),
}


def _clip_psd(matrix: np.ndarray) -> np.ndarray:
    eigenvalues, eigenvectors = scipy.linalg.eigh(matrix)
    if eigenvalues[0] >= 0.0:
        return matrix
    scale = max(float(eigenvalues[-1]), 0.0)
    if eigenvalues[0] < -PSD_RTOL * scale:
        raise NotPositiveDefinite(
            f"Periodogram has eigenvalue {eigenvalues[0]:.3e} below the PSD tolerance"
        )
    clipped = np.clip(eigenvalues, 0.0, None)
    return (eigenvectors * clipped) @ eigenvectors.conj().T


def multitaper(coeffs: FourierCoeffs) -> SpectralMatrix:
    """
    S_hat(w) = (1/m) sum_k d_bar_k d_bar_k^H.

    Raises:
        EmptyInput: If there are no tapers
    """
    if coeffs.m == 0:
        raise EmptyInput("Cannot form a periodogram from zero tapers")
    d = coeffs.values
    outer = d.T @ d.conj() / coeffs.m
    matrix = HermitianMatrix.symmetrized(_clip_psd(0.5 * (outer + outer.conj().T)))
    return SpectralMatrix(omega=coeffs.omega, matrix=matrix, m_eff=coeffs.m)


def periodogram(data: EventData, taper: TaperSet, omega: float) -> SpectralMatrix:
    """Multi-taper periodogram of data at a single frequency."""
    return multitaper(mean_corrected_ft(data, taper, omega))


def band_frequencies(taper: TaperSet, band_hz: Tuple[float, float]) -> np.ndarray:
    """
    Fourier frequencies 2 pi f / T' (f >= 1) whose value in Hz lies in (lo, hi].

    Frequency 0 is never included.
    """
    low, high = band_hz
    if not high > low or low < 0:
        raise InvalidArgument(f"Band must satisfy 0 <= lo < hi, got ({low}, {high})")
    segment = taper.segment_length
    first = max(1, int(math.floor(low * segment)) + 1)
    last = int(math.floor(high * segment + 1e-9))
    indices = np.arange(first, last + 1)
    indices = indices[(indices / segment > low) & (indices / segment <= high * (1 + 1e-12))]
    return 2.0 * np.pi * indices / segment


def make_band(taper: TaperSet, band: Union[str, Tuple[float, float]]) -> Band:
    """Band descriptor from a named band ('delta', 'theta') or an (lo, hi) pair in Hz."""
    if isinstance(band, str):
        try:
            band = NAMED_BANDS[band.lower()]
        except KeyError:
            raise InvalidArgument(f"Unknown band '{band}', expected one of {sorted(NAMED_BANDS)}") from None
    low, high = float(band[0]), float(band[1])
    return Band(low, high, tuple(band_frequencies(taper, (low, high)).tolist()))


def smoothed_periodogram(
    data: EventData,
    taper: TaperSet,
    band: Union[Band, Sequence[float]],
) -> SpectralMatrix:
    """
    Trial-frequency smoothed estimator: the mean of multitaper estimates over
    the band's frequencies.

    Args:
        data: Event streams
        taper: Tapers aligned with the trials
        band: A Band, or an explicit list of angular frequencies

    Raises:
        EmptyInput: If the band contains no frequencies
    """
    if isinstance(band, Band):
        descriptor = band
        frequencies: Iterable[float] = band.frequencies
    else:
        frequencies = [float(w) for w in band]
        descriptor = Band(
            min(frequencies, default=0.0) / (2 * np.pi),
            max(frequencies, default=0.0) / (2 * np.pi),
            tuple(frequencies),
        )
    frequencies = [w for w in frequencies if w != 0.0]
    if not frequencies:
        raise EmptyInput("Band contains no nonzero frequencies")

    total = np.zeros((data.p, data.p), dtype=complex)
    for omega in frequencies:
        total += periodogram(data, taper, omega).data
    matrix = HermitianMatrix.symmetrized(total / len(frequencies))
    log.debug(f"[smooth] averaged {len(frequencies)} frequencies x {taper.m} tapers")
    return SpectralMatrix(omega=descriptor, matrix=matrix, m_eff=taper.m * len(frequencies))


def _clip_unit(value: float) -> float:
    return min(1.0, max(0.0, value))


def coherence(S: SpectralMatrix, q: int, r: int) -> float:
    """
    R^2_qr = |S_qr|^2 / (S_qq S_rr), clipped to [0, 1].

    Raises:
        DegenerateChannel: If S_qq or S_rr is not positive
    """
    data = S.data
    s_qq, s_rr = data[q, q].real, data[r, r].real
    if s_qq <= 0 or s_rr <= 0:
        raise DegenerateChannel(f"Channel {q if s_qq <= 0 else r} has zero power")
    return _clip_unit(abs(data[q, r]) ** 2 / (s_qq * s_rr))


def coherence_matrix(S: SpectralMatrix) -> np.ndarray:
    """All pairwise coherences; the diagonal is 1."""
    diagonal = S.diagonal()
    if np.any(diagonal <= 0):
        raise DegenerateChannel(f"Channel {int(np.argmin(diagonal))} has zero power")
    return np.clip(np.abs(S.data) ** 2 / np.outer(diagonal, diagonal), 0.0, 1.0)


GOODMAN_FORMS = ("classical", "printed")


def goodman_density(x: float, m: int, R2: float, form: str = "classical") -> float:
    """
    Sampling density of the estimated coherence from m tapers when the true
    coherence is R2.

    form='classical' (the default) is Goodman's density of squared coherence,
        (m-1) (1-R2)^m (1-x)^(m-2) 2F1(m, m; 1; R2 x),
    which integrates to one. form='printed' evaluates
        (m-1) (1-R2) (1-x^2)^(m-2) 2F1(m, m; 1; R2 x)
    term by term as it is commonly quoted; at R2 = 0 it reduces to
    (m-1) (1-x^2)^(m-2), which does not integrate to one, so the KS test,
    goodman_cdf and goodman_mean default to the classical form.

    Raises:
        OutOfDomain: If R2 * x >= 1 or the arguments leave their ranges
    """
    if form not in GOODMAN_FORMS:
        raise InvalidArgument(f"Unknown form '{form}', expected one of {GOODMAN_FORMS}")
    if m < 2:
        raise OutOfDomain(f"Goodman density needs m >= 2, got {m}")
    if not 0.0 <= R2 < 1.0:
        raise OutOfDomain(f"R2 must lie in [0, 1), got {R2}")
    if not 0.0 <= x <= 1.0:
        raise OutOfDomain(f"x must lie in [0, 1], got {x}")
    if R2 * x >= 1.0:
        raise OutOfDomain(f"R2 * x = {R2 * x} >= 1")
    series = 1.0 if R2 == 0.0 else float(scipy.special.hyp2f1(m, m, 1, R2 * x))
    if form == "classical":
        return (m - 1) * (1.0 - R2) ** m * (1.0 - x) ** (m - 2) * series
    return (m - 1) * (1.0 - R2) * (1.0 - x * x) ** (m - 2) * series


def goodman_cdf(x: float, m: int, R2: float, form: str = "classical") -> float:
    """Distribution function of goodman_density by adaptive quadrature."""
    if x <= 0.0:
        return 0.0
    upper = min(float(x), 1.0)
    value, _ = scipy.integrate.quad(goodman_density, 0.0, upper, args=(m, R2, form), limit=200)
    return value


def goodman_mean(m: int, R2: float, form: str = "classical") -> float:
    """E[x] under goodman_density."""
    value, _ = scipy.integrate.quad(
        lambda x: x * goodman_density(x, m, R2, form), 0.0, 1.0, limit=200
    )
    return value


def deviation_bound(m: int, delta: float, s_max: float) -> float:
    """
    P(|S_hat_qr - S_qr| >= delta) <= 8 exp(-m delta^2 / (2^9 5^2 s_max^2)).

    Values above one are returned unchanged.

    Raises:
        OutOfDomain: Unless 0 < delta < 80 s_max
    """
    if not s_max > 0 or not 0.0 < delta < 80.0 * s_max:
        raise OutOfDomain(f"delta must lie in (0, 80 s_max) = (0, {80.0 * s_max}), got {delta}")
    return 8.0 * math.exp(-m * delta ** 2 / (2 ** 9 * 5 ** 2 * s_max ** 2))


def max_deviation_bound(m: int, delta: float, s_max: float, p: int) -> float:
    """Union bound over all p^2 entries: p^2 times deviation_bound()."""
    return p * p * deviation_bound(m, delta, s_max)
