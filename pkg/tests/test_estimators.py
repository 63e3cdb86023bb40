import numpy as np
import pytest

from whittle_graph.errors import InvalidArgument, NotPositiveDefinite, ShapeMismatch
from whittle_graph.hermitian import HermitianMatrix, SpectralMatrix, inverse_pd, is_positive_definite
from whittle_graph.estimation.estimators import (
    Penalty,
    RSEConfig,
    block_soft_threshold,
    estimate,
    inverse_periodogram,
    kkt_residual,
    lasso_admm,
    lasso_path,
    penalty_value,
    ridge_estimate,
    theta_eigen_map,
    whittle_nll,
)

TIGHT = RSEConfig(eps_abs=1e-10, eps_rel=1e-10, max_iter=50000)


def _objective(theta, S, lam):
    _, logdet = np.linalg.slogdet(theta)
    return -logdet + np.real(np.trace(S @ theta)) + lam * np.sum(np.abs(theta))


def proximal_gradient(S, lam, max_iter=50000, tol=1e-13):
    """Reference lasso solver: proximal gradient with backtracking."""
    theta = np.diag(1.0 / (np.real(np.diag(S)) + lam)).astype(complex)
    step = 1.0
    for _ in range(max_iter):
        gradient = S - np.linalg.inv(theta)
        smooth = _objective(theta, S, 0.0)
        while True:
            candidate = block_soft_threshold(theta - step * gradient, step * lam)
            candidate = 0.5 * (candidate + candidate.conj().T)
            if np.linalg.eigvalsh(candidate)[0] > 0:
                change = candidate - theta
                bound = smooth + np.real(np.vdot(gradient, change)) + np.sum(np.abs(change) ** 2) / (2 * step)
                if _objective(candidate, S, 0.0) <= bound:
                    break
            step *= 0.5
        done = np.linalg.norm(candidate - theta) < tol
        theta = candidate
        if done:
            break
        step = min(2.0 * step, 1.0)
    return theta


def test_ridge_solves_stationarity(make_pd):
    for _ in range(50):
        S = make_pd(4)
        result = ridge_estimate(S, 0.3)
        residual = (S.data + 0.3 * np.eye(4)) @ result.theta.data - np.eye(4)
        assert np.max(np.abs(residual)) <= 1e-10
        assert result.penalty is Penalty.RIDGE


def test_ridge_handles_singular_periodogram():
    v = np.array([1.0, 1j, -0.5])
    singular = HermitianMatrix.symmetrized(np.outer(v, v.conj()))
    result = ridge_estimate(singular, 0.1)
    assert is_positive_definite(result.theta)
    with pytest.raises(InvalidArgument):
        ridge_estimate(singular, 0.0)


def test_block_soft_threshold():
    assert block_soft_threshold(3 + 4j, 1.0) == pytest.approx(2.4 + 3.2j)
    assert block_soft_threshold(3 + 4j, 5.0) == 0
    assert block_soft_threshold(3 + 4j, 0.0) == 3 + 4j
    assert block_soft_threshold(0j, 1.0) == 0
    np.testing.assert_allclose(block_soft_threshold(np.array([2.0, 0.5j]), 1.0), [1.0, 0.0])
    with pytest.raises(InvalidArgument):
        block_soft_threshold(1.0, -1.0)


def test_theta_eigen_map_solves_quadratic():
    c = np.array([-1e6, -3.0, 0.0, 2.0, 1e6])
    for tau in (0.5, 1.0, 4.0):
        x = theta_eigen_map(c, tau)
        assert np.all(x > 0)
        np.testing.assert_allclose(tau * x - 1.0 / x, c, rtol=1e-9, atol=1e-9)


def test_whittle_nll():
    S = HermitianMatrix.diagonal([1.0, 2.0, 3.0])
    assert whittle_nll(HermitianMatrix.identity(3), S) == pytest.approx(6.0)
    assert whittle_nll(HermitianMatrix.diagonal([2.0, 1.0, 1.0]), S) == pytest.approx(-np.log(2.0) + 7.0)
    with pytest.raises(NotPositiveDefinite):
        whittle_nll(HermitianMatrix.diagonal([1.0, -1.0, 1.0]), S)
    with pytest.raises(ShapeMismatch):
        whittle_nll(HermitianMatrix.identity(2), S)


def test_penalty_value():
    theta = HermitianMatrix.from_array([[2.0, 3 + 4j], [3 - 4j, 1.0]])
    assert penalty_value(theta, "lasso") == pytest.approx(13.0)
    assert penalty_value(theta, Penalty.RIDGE) == pytest.approx(3.0)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_admm_matches_proximal_gradient(make_pd, p):
    for _ in range(5):
        S = make_pd(p)
        lam = 0.2
        result = lasso_admm(S, TIGHT.with_lambda(lam))
        assert result.converged
        reference = proximal_gradient(S.data, lam)
        assert np.linalg.norm(result.theta.data - reference) <= 1e-4


def test_admm_optimality_conditions(make_pd):
    for _ in range(10):
        S = SpectralMatrix(omega=0.3, matrix=make_pd(4), m_eff=40)
        result = lasso_admm(S, TIGHT.with_lambda(0.15))
        assert result.kkt_residual <= 1e-5
        _, subgradient = kkt_residual(result.theta, S, 0.15)
        assert np.all(np.abs(subgradient) <= 1.0 + 1e-12)
        assert result.omega == 0.3


def test_lasso_tends_to_inverse_as_lambda_vanishes(make_pd):
    S = make_pd(4)
    result = lasso_admm(S, TIGHT.with_lambda(1e-6))
    assert np.linalg.norm(result.theta.data - inverse_pd(S).data) <= 1e-4


def test_lasso_keeps_diagonal_periodogram_diagonal():
    S = HermitianMatrix.diagonal([1.0, 2.0, 3.0])
    result = lasso_admm(S, TIGHT.with_lambda(0.1))
    off_diagonal = result.theta.data[~np.eye(3, dtype=bool)]
    assert np.all(off_diagonal == 0)
    np.testing.assert_allclose(np.real(np.diag(result.theta.data)), 1.0 / (np.array([1.0, 2.0, 3.0]) + 0.1), rtol=1e-6)


def test_large_lambda_gives_empty_graph(make_pd):
    S = make_pd(5)
    lam = 2.0 * float(np.max(np.abs(S.off_diagonal_upper())))
    result = lasso_admm(S, TIGHT.with_lambda(lam))
    assert np.count_nonzero(result.theta.off_diagonal_upper()) == 0


def test_unpenalised_diagonal(make_pd):
    S = HermitianMatrix.diagonal([1.0, 2.0])
    config = RSEConfig(lam=0.5, penalize_diagonal=False, eps_abs=1e-10, eps_rel=1e-10, max_iter=50000)
    result = lasso_admm(S, config)
    np.testing.assert_allclose(np.real(np.diag(result.theta.data)), [1.0, 0.5], rtol=1e-6)


def test_lasso_path_order_and_sparsity(make_pd):
    S = make_pd(4)
    lambdas = [0.01, 50.0, 0.1]
    results = lasso_path(S, lambdas, TIGHT)
    assert [r.lam for r in results] == lambdas
    assert np.count_nonzero(results[1].theta.off_diagonal_upper()) == 0
    with pytest.raises(InvalidArgument):
        lasso_path(S, [])


def test_iteration_cap_reports_non_convergence(make_pd):
    result = lasso_admm(make_pd(4), RSEConfig(lam=0.05, max_iter=1))
    assert not result.converged
    assert result.iterations == 1


def test_estimate_dispatch(make_pd):
    S = make_pd(3)
    assert estimate(S, RSEConfig(penalty="ridge", lam=0.2)).penalty is Penalty.RIDGE
    assert estimate(S, RSEConfig(penalty="lasso", lam=0.2)).penalty is Penalty.LASSO


def test_config_validation():
    with pytest.raises(InvalidArgument):
        RSEConfig(lam=0.0)
    with pytest.raises(InvalidArgument):
        RSEConfig(penalty="none")
    with pytest.raises(InvalidArgument):
        RSEConfig(max_iter=0)
    with pytest.raises(ValueError):
        RSEConfig(penalty="elastic")
    assert RSEConfig().with_lambda(2.0).to_dict()["lambda"] == 2.0


def test_inverse_periodogram(make_pd):
    S = make_pd(3)
    assert inverse_periodogram(SpectralMatrix(omega=1.0, matrix=S, m_eff=2)) is None
    result = inverse_periodogram(SpectralMatrix(omega=1.0, matrix=S, m_eff=50))
    assert result.penalty is Penalty.NONE
    np.testing.assert_allclose(result.theta.data @ S.data, np.eye(3), atol=1e-10)
    singular = HermitianMatrix.diagonal([1.0, 0.0, 1.0])
    assert inverse_periodogram(SpectralMatrix(omega=1.0, matrix=singular, m_eff=50)) is None


def test_ridge_tends_to_inverse_as_lambda_vanishes(make_pd):
    for p in [2, 3, 5] * 17:
        S = make_pd(p)
        result = ridge_estimate(S, 1e-9)
        assert np.linalg.norm(result.theta.data - inverse_pd(S).data) <= 1e-4


def _edge_counts(S, lambdas, config=None):
    return [np.count_nonzero(r.theta.off_diagonal_upper()) for r in lasso_path(S, lambdas, config)]


def test_edge_count_shrinks_along_lambda_grid(make_pd):
    for _ in range(10):
        S = make_pd(5)
        lambdas = np.logspace(-3, 1, 20) * float(np.max(S.data.diagonal().real))
        counts = _edge_counts(S, lambdas)
        assert np.all(np.diff(counts) <= 1)
        assert counts[0] >= counts[-1] == 0


@pytest.mark.slow
def test_edge_count_shrinks_along_lambda_grid_on_fifty_inputs(make_pd):
    for p in [2, 3, 5] * 16 + [4, 6]:
        S = make_pd(p)
        lambdas = np.logspace(-3, 1, 20) * float(np.max(S.data.diagonal().real))
        counts = _edge_counts(S, lambdas)
        assert np.all(np.diff(counts) <= 1)


@pytest.mark.slow
def test_admm_agrees_with_reference_solver_on_fifty_inputs(make_pd):
    for p in [2, 3, 5] * 16 + [2, 3]:
        S = SpectralMatrix(omega=0.5, matrix=make_pd(p), m_eff=50)
        result = lasso_admm(S, TIGHT.with_lambda(0.1))
        assert result.converged
        assert np.linalg.norm(result.theta.data - proximal_gradient(S.data, 0.1)) <= 1e-4
        assert result.kkt_residual <= 1e-5
        _, subgradient = kkt_residual(result.theta, S, 0.1)
        assert np.all(np.abs(subgradient) <= 1.0 + 1e-12)
        assert is_positive_definite(result.theta)

        limit = lasso_admm(S, TIGHT.with_lambda(1e-6))
        assert np.linalg.norm(limit.theta.data - inverse_pd(S.matrix).data) <= 1e-4
