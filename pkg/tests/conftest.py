import numpy as np
import pytest

from whittle_graph.hermitian import HermitianMatrix, SpectralMatrix


def random_pd(rng: np.random.Generator, p: int, floor: float = 0.5) -> HermitianMatrix:
    """Random complex Hermitian positive definite matrix with eigenvalues >= floor."""
    a = rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
    return HermitianMatrix.symmetrized(a @ a.conj().T / p + floor * np.eye(p))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_pd(rng):
    def factory(p: int, floor: float = 0.5) -> HermitianMatrix:
        return random_pd(rng, p, floor)
    return factory


@pytest.fixture
def make_spectral(make_pd):
    def factory(p: int, m_eff: int = 50, omega: float = 0.5) -> SpectralMatrix:
        return SpectralMatrix(omega=omega, matrix=make_pd(p), m_eff=m_eff)
    return factory
