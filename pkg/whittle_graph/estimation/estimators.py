"""
Penalised Whittle Estimators of the Inverse Spectral Density

Minimises  -log det(Theta) + Tr(S_hat Theta) + lambda * P(Theta)  over
Hermitian positive definite Theta, with
- ridge:  P = Tr(Theta), solved in closed form as (S_hat + lambda I)^{-1}
- lasso:  P = sum |Theta_qr| (group penalty on real and imaginary parts),
          solved by ADMM with an eigen Theta-update, complex block
          soft-thresholding Z-update and scaled dual update.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from whittle_graph.errors import (
    InvalidArgument,
    NotPositiveDefinite,
    ShapeMismatch,
)
from whittle_graph.hermitian import (
    Frequency,
    HermitianMatrix,
    SpectralMatrix,
    condition_number,
    eig_hermitian,
    frequency_to_json,
    inverse_pd,
    is_positive_definite,
    log_det_pd,
)

log = logging.getLogger(__name__)


class Penalty(Enum):
    RIDGE = "ridge"
    LASSO = "lasso"
    # Unpenalised direct inversion of the periodogram.
    NONE = "none"


@dataclass(frozen=True)
class RSEConfig:
    """
    Estimator settings.

    Attributes:
        penalty: 'ridge' or 'lasso'
        lam: Regularisation strength lambda > 0
        admm_tau: Augmented-Lagrangian weight tau > 0
        eps_abs: Absolute ADMM tolerance
        eps_rel: Relative ADMM tolerance
        max_iter: ADMM iteration cap
        penalize_diagonal: Include diagonal entries in the lasso penalty
    """
    penalty: Penalty = Penalty.LASSO
    lam: float = 0.1
    admm_tau: float = 1.0
    eps_abs: float = 1e-6
    eps_rel: float = 1e-4
    max_iter: int = 5000
    penalize_diagonal: bool = True

    def __post_init__(self):
        object.__setattr__(self, "penalty", Penalty(self.penalty))
        if self.penalty is Penalty.NONE:
            raise InvalidArgument("RSEConfig penalty must be 'ridge' or 'lasso'")
        for name in ("lam", "admm_tau", "eps_abs", "eps_rel"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidArgument(f"{name} must be positive, got {value}")
        if self.max_iter < 1:
            raise InvalidArgument(f"max_iter must be >= 1, got {self.max_iter}")

    def with_lambda(self, lam: float) -> "RSEConfig":
        return replace(self, lam=float(lam))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "penalty": self.penalty.value,
            "lambda": self.lam,
            "admm_tau": self.admm_tau,
            "eps_abs": self.eps_abs,
            "eps_rel": self.eps_rel,
            "max_iter": self.max_iter,
            "penalize_diagonal": self.penalize_diagonal,
        }


@dataclass(frozen=True, eq=False)
class RSEResult:
    """
    Inverse-spectrum estimate with solver diagnostics.

    For the lasso, theta is the final (exactly sparse) Z iterate.
    """
    theta: HermitianMatrix
    lam: float
    penalty: Penalty
    omega: Frequency = 0.0
    iterations: int = 0
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    kkt_residual: float = 0.0
    converged: bool = True
    # Final ADMM state, reused as a warm start along a lambda path.
    dual: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega": frequency_to_json(self.omega),
            "penalty": self.penalty.value,
            "lambda": self.lam,
            "p": self.theta.dim,
            "iterations": self.iterations,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "kkt_residual": self.kkt_residual,
            "converged": self.converged,
        }


def _as_spectral(S_hat: Union[SpectralMatrix, HermitianMatrix]) -> SpectralMatrix:
    if isinstance(S_hat, SpectralMatrix):
        return S_hat
    return SpectralMatrix(omega=0.0, matrix=S_hat)


def whittle_nll(theta: HermitianMatrix, S_hat: Union[SpectralMatrix, HermitianMatrix]) -> float:
    """
    Whittle pseudo negative log-likelihood  -log det(Theta) + Re Tr(S_hat Theta).

    Raises:
        NotPositiveDefinite: If theta is not positive definite
        ShapeMismatch: If dimensions differ
    """
    S_hat = _as_spectral(S_hat)
    if theta.dim != S_hat.dim:
        raise ShapeMismatch(f"Theta is {theta.dim}x{theta.dim} but S_hat is {S_hat.dim}x{S_hat.dim}")
    trace = np.sum(S_hat.data * theta.data.T)
    scale = max(1.0, abs(trace))
    assert abs(trace.imag) <= 1e-10 * scale, f"Tr(S Theta) has imaginary part {trace.imag:.3e}"
    return -log_det_pd(theta) + float(trace.real)


def penalty_value(theta: HermitianMatrix, kind: Union[Penalty, str]) -> float:
    """
    Lasso: sum of |Theta_qr| over all entries, diagonal included.
    Ridge: real trace.
    """
    kind = Penalty(kind)
    if kind is Penalty.LASSO:
        return float(np.sum(np.abs(theta.data)))
    return float(np.trace(theta.data).real)


def ridge_estimate(S_hat: Union[SpectralMatrix, HermitianMatrix], lam: float) -> RSEResult:
    """
    Closed-form ridge estimate (S_hat + lambda I)^{-1}.

    Positive definite for any PSD S_hat, including singular ones.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise InvalidArgument(f"lambda must be positive, got {lam}")
    S_hat = _as_spectral(S_hat)
    eigenvalues, eigenvectors = eig_hermitian(S_hat.matrix)
    shifted = np.clip(eigenvalues, 0.0, None) + lam
    theta = HermitianMatrix.symmetrized((eigenvectors / shifted) @ eigenvectors.conj().T)
    return RSEResult(theta=theta, lam=float(lam), penalty=Penalty.RIDGE, omega=S_hat.omega)


def block_soft_threshold(w: Union[complex, np.ndarray], kappa: float) -> Union[complex, np.ndarray]:
    """
    S_kappa(w) = (1 - kappa/|w|)_+ w, with S_kappa(0) = 0.

    Works elementwise on arrays. The phase of w is kept and the result is
    exactly zero when |w| <= kappa.
    """
    if kappa < 0:
        raise InvalidArgument(f"kappa must be non-negative, got {kappa}")
    values = np.asarray(w, dtype=complex)
    modulus = np.abs(values)
    with np.errstate(divide="ignore", invalid="ignore"):
        shrink = np.where(modulus > kappa, 1.0 - kappa / np.where(modulus > 0, modulus, 1.0), 0.0)
    result = shrink * values
    if np.ndim(w) == 0:
        return complex(result)
    return result


def theta_eigen_map(c: np.ndarray, tau: float) -> np.ndarray:
    """Solve tau x - 1/x = c for x > 0: x = (c + sqrt(c^2 + 4 tau)) / (2 tau)."""
    c = np.asarray(c, dtype=float)
    root = np.sqrt(c * c + 4.0 * tau)
    # rationalised branch avoids cancellation for c << 0
    return np.where(c >= 0, (c + root) / (2.0 * tau), 2.0 / (root - c))


def kkt_residual(
    theta: HermitianMatrix,
    S_hat: SpectralMatrix,
    lam: float,
    penalize_diagonal: bool = True,
) -> Tuple[float, np.ndarray]:
    """
    Max-entry residual of  S_hat - Theta^{-1} + lambda Z = 0.

    Z is reconstructed from Theta: Theta_qr/|Theta_qr| on the support, and
    (Theta^{-1} - S_hat)_qr / lambda clipped to the unit disc elsewhere.

    Returns:
        (residual, Z)
    """
    inverse = inverse_pd(theta).data
    target = (inverse - S_hat.data) / lam
    modulus = np.abs(theta.data)
    with np.errstate(divide="ignore", invalid="ignore"):
        on_support = theta.data / np.where(modulus > 0, modulus, 1.0)
        target_modulus = np.abs(target)
        clipped = np.where(target_modulus > 1.0, target / np.where(target_modulus > 0, target_modulus, 1.0), target)
    subgradient = np.where(modulus > 0, on_support, clipped)
    if not penalize_diagonal:
        np.fill_diagonal(subgradient, 0.0)
    residual = S_hat.data - inverse + lam * subgradient
    return float(np.max(np.abs(residual))), subgradient


def _initial_iterate(S_hat: SpectralMatrix, lam: float) -> np.ndarray:
    return np.diag(1.0 / (S_hat.diagonal() + lam)).astype(complex)


def lasso_admm(
    S_hat: Union[SpectralMatrix, HermitianMatrix],
    config: RSEConfig,
    warm_start: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> RSEResult:
    """
    Group-lasso Whittle estimate by ADMM.

    Iterates
        Theta <- Q diag(x(c)) Q^H  where  tau (Z - U) - S_hat = Q diag(c) Q^H
        Z     <- S_{lambda/tau}(Theta + U)     (diagonal unshrunk if not penalised)
        U     <- U + Theta - Z
    and stops when ||Theta - Z||_F <= eps_pri and tau ||Z - Z_prev||_F <= eps_dual.

    Args:
        S_hat: Periodogram (PSD)
        config: Solver settings; config.lam is the lasso weight
        warm_start: Optional (Z, U) from a previous solve

    Returns:
        RSEResult whose theta is the symmetrised final Z. A run that hits
        max_iter is returned with converged=False.
    """
    S_hat = _as_spectral(S_hat)
    lam = config.lam
    tau = config.admm_tau
    if not (np.isfinite(lam) and lam > 0):
        raise InvalidArgument(f"lambda must be positive, got {lam}")
    p = S_hat.dim
    S = S_hat.data
    kappa = lam / tau
    diagonal = np.diag_indices(p)

    if warm_start is not None:
        Z, U = (np.array(a, dtype=complex) for a in warm_start)
        if Z.shape != (p, p) or U.shape != (p, p):
            raise ShapeMismatch(f"Warm start has shape {Z.shape}, expected {(p, p)}")
    else:
        Z = _initial_iterate(S_hat, lam)
        U = np.zeros((p, p), dtype=complex)

    theta = Z
    primal = dual = np.inf
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iter + 1):
        c, Q = scipy.linalg.eigh(tau * (Z - U) - S)
        theta = (Q * theta_eigen_map(c, tau)) @ Q.conj().T
        theta = 0.5 * (theta + theta.conj().T)

        Z_prev = Z
        V = theta + U
        Z = block_soft_threshold(V, kappa)
        if not config.penalize_diagonal:
            Z[diagonal] = V[diagonal]
        Z = 0.5 * (Z + Z.conj().T)

        U = U + theta - Z

        primal = float(np.linalg.norm(theta - Z))
        dual = float(tau * np.linalg.norm(Z - Z_prev))
        eps_pri = p * config.eps_abs + config.eps_rel * max(np.linalg.norm(theta), np.linalg.norm(Z))
        eps_dual = p * config.eps_abs + config.eps_rel * float(np.linalg.norm(tau * U))
        if primal <= eps_pri and dual <= eps_dual:
            converged = True
            break

    estimate = HermitianMatrix.symmetrized(Z)
    if not is_positive_definite(estimate):
        log.warning(f"[admm] lambda={lam:.4g}: sparse iterate is not positive definite; returning Theta")
        estimate = HermitianMatrix.symmetrized(theta)
        converged = False

    if not converged:
        log.warning(
            f"[admm] lambda={lam:.4g} stopped after {iteration} iterations "
            f"(primal {primal:.2e}, dual {dual:.2e})"
        )

    residual, _ = kkt_residual(estimate, S_hat, lam, config.penalize_diagonal)
    return RSEResult(
        theta=estimate,
        lam=float(lam),
        penalty=Penalty.LASSO,
        omega=S_hat.omega,
        iterations=iteration,
        primal_residual=primal,
        dual_residual=dual,
        kkt_residual=residual,
        converged=converged,
        dual=U,
    )


def estimate(S_hat: Union[SpectralMatrix, HermitianMatrix], config: RSEConfig) -> RSEResult:
    """Dispatch on config.penalty."""
    if config.penalty is Penalty.RIDGE:
        return ridge_estimate(S_hat, config.lam)
    return lasso_admm(S_hat, config)


def lasso_path(
    S_hat: Union[SpectralMatrix, HermitianMatrix],
    lambdas: Sequence[float],
    config: Optional[RSEConfig] = None,
) -> List[RSEResult]:
    """
    Lasso estimates along a lambda grid, warm-starting each solve from the
    previous one. Solves run from the largest lambda down; results are
    returned in the order of `lambdas`.
    """
    if len(lambdas) == 0:
        raise InvalidArgument("lambda grid is empty")
    config = config or RSEConfig()
    order = np.argsort(lambdas)[::-1]
    results: List[Optional[RSEResult]] = [None] * len(lambdas)
    warm = None
    for index in order:
        result = lasso_admm(S_hat, config.with_lambda(lambdas[index]), warm_start=warm)
        if result.dual is not None:
            warm = (result.theta.data, result.dual)
        results[index] = result
    return [r for r in results if r is not None]


def inverse_periodogram(S_hat: SpectralMatrix) -> Optional[RSEResult]:
    """
    Direct inverse of the periodogram, or None when it cannot be inverted
    (p >= m_eff for a raw periodogram, or infinite condition number).
    """
    p = S_hat.dim
    if S_hat.m_eff and p >= S_hat.m_eff:
        return None
    if condition_number(S_hat.matrix) == np.inf:
        return None
    try:
        theta = inverse_pd(S_hat.matrix)
    except NotPositiveDefinite:
        return None
    return RSEResult(theta=theta, lam=0.0, penalty=Penalty.NONE, omega=S_hat.omega)
