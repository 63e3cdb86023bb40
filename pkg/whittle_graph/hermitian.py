"""
Complex Hermitian Matrix Primitives

Shared by every numerical module: the spectrum S(w), its estimates and the
inverse-spectrum estimates are all p x p Hermitian matrices. Symmetry is
structural: a HermitianMatrix is rebuilt from its upper triangle and real
diagonal when it is created, and the stored array is read-only.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, Tuple, Union

import numpy as np
import scipy.linalg

from whittle_graph.errors import (
    NonFiniteInput,
    NotHermitian,
    NotPositiveDefinite,
    ShapeMismatch,
)

# Relative tolerance for accepting externally supplied matrices as Hermitian.
INGESTION_RTOL = 1e-12


class NormKind(Enum):
    """Matrix norms supported by matrix_norm()."""
    FROBENIUS = "frobenius"
    ELEMENTWISE_MAX = "elementwise_max"
    ROW_SUM_MAX = "row_sum_max"


def _from_upper(array: np.ndarray) -> np.ndarray:
    upper = np.triu(array, k=1)
    full = upper + upper.conj().T
    full[np.diag_indices_from(full)] = np.real(np.diag(array))
    return full


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """
    A p x p complex Hermitian matrix.

    Construct with from_array() for external data (validated) or
    symmetrized() for results computed inside the package.
    """
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] == 0:
            raise ShapeMismatch(f"Expected a non-empty square matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteInput("Matrix contains non-finite entries")
        full = _from_upper(data.astype(complex))
        full.setflags(write=False)
        object.__setattr__(self, "data", full)

    @classmethod
    def from_array(cls, array: Any, rtol: float = INGESTION_RTOL) -> "HermitianMatrix":
        """
        Validate and wrap an array.

        Args:
            array: Square complex array
            rtol: Allowed |A - A^H| relative to max(1, max|A|)

        Raises:
            NonFiniteInput: If any entry is NaN or infinite
            NotHermitian: If the halves disagree beyond rtol
        """
        a = np.asarray(array, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeMismatch(f"Expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteInput("Matrix contains non-finite entries")
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        asymmetry = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
        if asymmetry > rtol * scale:
            raise NotHermitian(
                f"Matrix is not Hermitian: max |A - A^H| = {asymmetry:.3e} "
                f"exceeds {rtol:.0e} relative"
            )
        return cls(a)

    @classmethod
    def symmetrized(cls, array: Any) -> "HermitianMatrix":
        """Wrap (A + A^H)/2 without a tolerance check."""
        a = np.asarray(array, dtype=complex)
        return cls(0.5 * (a + a.conj().T))

    @classmethod
    def identity(cls, p: int) -> "HermitianMatrix":
        return cls(np.eye(p, dtype=complex))

    @classmethod
    def diagonal(cls, values: Any) -> "HermitianMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)).astype(complex))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def to_array(self) -> np.ndarray:
        """Return a writable copy of the full matrix."""
        return np.array(self.data)

    def __getitem__(self, index: Tuple[int, int]) -> complex:
        return complex(self.data[index])

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self.data + other.data)

    def __sub__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self.data - other.data)

    def scaled(self, factor: float) -> "HermitianMatrix":
        return HermitianMatrix(self.data * float(factor))

    def upper_entries(self) -> Iterator[Tuple[int, int, complex]]:
        """Yield (q, r, value) for q <= r."""
        rows, cols = np.triu_indices(self.dim)
        for q, r in zip(rows.tolist(), cols.tolist()):
            yield q, r, complex(self.data[q, r])

    def off_diagonal_upper(self) -> np.ndarray:
        """Entries with q < r in row-major order."""
        return self.data[np.triu_indices(self.dim, k=1)]

    def allclose(self, other: "HermitianMatrix", atol: float = 1e-12) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.data, other.data, rtol=0.0, atol=atol))


def eig_hermitian(H: HermitianMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition H = Q diag(c) Q^H.

    Returns:
        (eigenvalues ascending, unitary eigenvector matrix)
    """
    eigenvalues, eigenvectors = scipy.linalg.eigh(H.data)
    return eigenvalues, eigenvectors


def eigvals_hermitian(H: HermitianMatrix) -> np.ndarray:
    return scipy.linalg.eigh(H.data, eigvals_only=True)


def is_positive_definite(H: HermitianMatrix) -> bool:
    return bool(eigvals_hermitian(H)[0] > 0.0)


def log_det_pd(H: HermitianMatrix) -> float:
    """
    Log-determinant of a positive definite matrix.

    Raises:
        NotPositiveDefinite: If the smallest eigenvalue is <= 0
    """
    eigenvalues = eigvals_hermitian(H)
    if eigenvalues[0] <= 0.0:
        raise NotPositiveDefinite(
            f"Matrix is not positive definite (min eigenvalue {eigenvalues[0]:.3e})"
        )
    return float(np.sum(np.log(eigenvalues)))


def inverse_pd(H: HermitianMatrix) -> HermitianMatrix:
    """Inverse of a positive definite matrix through its eigen-decomposition."""
    eigenvalues, eigenvectors = eig_hermitian(H)
    if eigenvalues[0] <= 0.0:
        raise NotPositiveDefinite(
            f"Matrix is not positive definite (min eigenvalue {eigenvalues[0]:.3e})"
        )
    return HermitianMatrix.symmetrized((eigenvectors / eigenvalues) @ eigenvectors.conj().T)


def matrix_norm(H: HermitianMatrix, kind: Union[NormKind, str] = NormKind.FROBENIUS) -> float:
    """
    Matrix norm of H.

    Args:
        H: Matrix
        kind: 'frobenius', 'elementwise_max' or 'row_sum_max'
    """
    kind = NormKind(kind)
    moduli = np.abs(H.data)
    if kind is NormKind.FROBENIUS:
        return float(np.sqrt(np.sum(moduli ** 2)))
    if kind is NormKind.ELEMENTWISE_MAX:
        return float(np.max(moduli))
    return float(np.max(np.sum(moduli, axis=1)))


def condition_number(H: HermitianMatrix) -> float:
    """
    Ratio of largest to smallest eigenvalue of a PSD matrix.

    Eigenvalues at or below max(1e-300, lambda_max * p * eps) count as zero,
    in which case math.inf is returned.
    """
    eigenvalues = eigvals_hermitian(H)
    largest = float(eigenvalues[-1])
    smallest = float(eigenvalues[0])
    floor = max(1e-300, largest * H.dim * np.finfo(float).eps)
    if smallest <= floor:
        return math.inf
    return largest / smallest


def block_diag(*blocks: HermitianMatrix) -> HermitianMatrix:
    return HermitianMatrix(scipy.linalg.block_diag(*[b.data for b in blocks]))


@dataclass(frozen=True)
class Band:
    """A frequency band in Hz together with the angular frequencies averaged over it."""
    low_hz: float
    high_hz: float
    frequencies: Tuple[float, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "band_hz": [self.low_hz, self.high_hz],
            "frequencies": list(self.frequencies),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Band":
        low, high = data["band_hz"]
        return cls(float(low), float(high), tuple(float(w) for w in data["frequencies"]))


Frequency = Union[float, Band]


def frequency_to_json(omega: Frequency) -> Any:
    return omega.to_dict() if isinstance(omega, Band) else float(omega)


def frequency_from_json(value: Any) -> Frequency:
    return Band.from_dict(value) if isinstance(value, dict) else float(value)


@dataclass(frozen=True, eq=False)
class SpectralMatrix:
    """
    A Hermitian matrix tagged with the frequency (rad/s) or band it describes.

    Used for the true spectrum, raw and smoothed periodograms. m_eff is the
    number of outer products averaged (tapers x frequencies); 0 marks a
    closed-form spectrum.
    """
    omega: Frequency
    matrix: HermitianMatrix
    m_eff: int = 0

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def data(self) -> np.ndarray:
        return self.matrix.data

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix.data))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega": frequency_to_json(self.omega),
            "p": self.dim,
            "m_eff": self.m_eff,
        }

