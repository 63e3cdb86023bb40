"""
Regularisation Parameter Selection and Evaluation Metrics

- mse(): off-diagonal mean squared error against a known inverse spectrum
- classification_scores(): F1 / TPR / FPR of an estimated edge set
- grid_select(): per-replicate optimum over a lambda grid (min MSE or max
  F1, ties to the smaller lambda), averaged over training replicates
- ebic(): extended BIC for a lasso estimate; select_by_ebic() takes the
  argmin over a lasso path (ties to the larger lambda)
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from whittle_graph.errors import InvalidArgument, ShapeMismatch
from whittle_graph.hermitian import HermitianMatrix, SpectralMatrix
from whittle_graph.estimation.estimators import (
    Penalty,
    RSEConfig,
    RSEResult,
    lasso_path,
    ridge_estimate,
    whittle_nll,
)
from whittle_graph.estimation.graph import extract_graph

log = logging.getLogger(__name__)

Edge = Tuple[int, int]
Truth = Tuple[HermitianMatrix, Set[Edge]]


class Criterion(Enum):
    MSE = "mse"
    F1 = "f1"


def mse(theta_hat: HermitianMatrix, theta_true: HermitianMatrix) -> float:
    """
    2/(p(p-1)) * sum_{q<r} |theta_hat_qr - theta_true_qr|^2 for one replicate.

    The diagonal is excluded. p = 1 has no off-diagonal entries and gives 0.

    Raises:
        ShapeMismatch: If the dimensions differ
    """
    if theta_hat.dim != theta_true.dim:
        raise ShapeMismatch(f"Cannot compare {theta_hat.dim}x{theta_hat.dim} with {theta_true.dim}x{theta_true.dim}")
    p = theta_hat.dim
    if p < 2:
        return 0.0
    difference = theta_hat.off_diagonal_upper() - theta_true.off_diagonal_upper()
    return float(2.0 * np.sum(np.abs(difference) ** 2) / (p * (p - 1)))


@dataclass(frozen=True)
class ClassificationScores:
    f1: float
    tpr: float
    fpr: float

    def to_dict(self) -> Dict[str, float]:
        return {"f1": self.f1, "tpr": self.tpr, "fpr": self.fpr}


def _normalise(edges: Set[Edge]) -> Set[Edge]:
    return {(min(q, r), max(q, r)) for q, r in edges if q != r}


def classification_scores(est_edges: Set[Edge], true_edges: Set[Edge], p: int) -> ClassificationScores:
    """
    F1 = TP / (TP + (FP + FN)/2), TPR = TP/|true|, FPR = FP/(p(p-1)/2 - |true|).

    Conventions for empty denominators: F1 = 1 when both sets are empty,
    TPR = 1 when there are no true edges, FPR = 0 when every pair is an edge.
    """
    estimated = _normalise(set(est_edges))
    truth = _normalise(set(true_edges))
    tp = len(estimated & truth)
    fp = len(estimated - truth)
    fn = len(truth - estimated)
    denominator = tp + 0.5 * (fp + fn)
    f1 = 1.0 if denominator == 0 else tp / denominator
    tpr = 1.0 if not truth else tp / len(truth)
    negatives = p * (p - 1) // 2 - len(truth)
    fpr = 0.0 if negatives <= 0 else fp / negatives
    return ClassificationScores(f1=f1, tpr=tpr, fpr=fpr)


def lambda_grid(
    S_hat: SpectralMatrix,
    n: int = 20,
    low: float = 1e-3,
    high: float = 10.0,
) -> np.ndarray:
    """n log-spaced values spanning [low, high] * max_q S_hat_qq."""
    if n < 1:
        raise InvalidArgument(f"Grid size must be >= 1, got {n}")
    scale = float(np.max(S_hat.diagonal()))
    if not scale > 0:
        raise InvalidArgument("Periodogram has no positive diagonal entry to scale the grid")
    return np.logspace(math.log10(low), math.log10(high), n) * scale


def score_estimate(result: RSEResult, truth: Truth, zero_tol: float = 0.0) -> Dict[str, float]:
    """MSE and edge-recovery scores of one estimate against the ground truth."""
    theta_true, true_edges = truth
    graph = extract_graph(result, zero_tol=zero_tol)
    scores = classification_scores(graph.edge_set(), true_edges, theta_true.dim)
    return {"mse": mse(result.theta, theta_true), **scores.to_dict()}


def evaluate_grid(
    S_hat: SpectralMatrix,
    lambdas: Sequence[float],
    truth: Truth,
    penalty: Union[Penalty, str] = Penalty.LASSO,
    config: Optional[RSEConfig] = None,
) -> List[Dict[str, float]]:
    """Scores of the estimator at every lambda of the grid, in grid order."""
    penalty = Penalty(penalty)
    if penalty is Penalty.RIDGE:
        results = [ridge_estimate(S_hat, lam) for lam in lambdas]
    else:
        results = lasso_path(S_hat, lambdas, config)
    return [score_estimate(result, truth) for result in results]


def _best_index(scores: Sequence[float], criterion: Criterion) -> int:
    # grid sorted ascending: first extreme value is the smallest lambda among ties
    values = np.asarray(scores, dtype=float)
    if criterion is Criterion.MSE:
        return int(np.argmin(values))
    return int(np.argmax(values))


@dataclass
class TuningReport:
    """
    Outcome of grid_select().

    Attributes:
        criterion: 'mse' or 'f1'
        lambda_grid: Ascending grid
        scores: scores[i][j] is the criterion for replicate i at lambda_grid[j]
        replicate_optima: Per-replicate optimal lambda
        lambda_star: Mean of the per-replicate optima
    """
    criterion: Criterion
    lambda_grid: List[float]
    scores: List[List[float]]
    replicate_optima: List[float]
    lambda_star: float
    penalty: Penalty = Penalty.LASSO
    seed: Optional[int] = None

    def mean_scores(self) -> List[float]:
        return np.mean(np.asarray(self.scores), axis=0).tolist()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "criterion": self.criterion.value,
            "penalty": self.penalty.value,
            "seed": self.seed,
            "lambda_grid": list(self.lambda_grid),
            "mean_scores": self.mean_scores(),
            "replicate_scores": self.scores,
            "replicate_optima": list(self.replicate_optima),
            "lambda_star": self.lambda_star,
        }


def select_lambda(
    scores: Sequence[Sequence[float]],
    lambdas: Sequence[float],
    criterion: Union[Criterion, str],
    penalty: Union[Penalty, str] = Penalty.LASSO,
) -> TuningReport:
    """
    Reduce a replicate x lambda score table to lambda*.

    Each replicate picks its best lambda (min MSE / max F1, ties to the
    smaller lambda) and lambda* is the arithmetic mean of those picks.
    """
    criterion = Criterion(criterion)
    if len(lambdas) == 0:
        raise InvalidArgument("lambda grid is empty")
    order = np.argsort(lambdas)
    grid = np.asarray(lambdas, dtype=float)[order]
    table = np.asarray(scores, dtype=float)
    if table.ndim != 2 or table.shape[1] != grid.size or table.shape[0] == 0:
        raise ShapeMismatch(f"Score table of shape {table.shape} does not match {grid.size} lambdas")
    table = table[:, order]
    optima = [float(grid[_best_index(row, criterion)]) for row in table]
    return TuningReport(
        criterion=criterion,
        lambda_grid=grid.tolist(),
        scores=table.tolist(),
        replicate_optima=optima,
        lambda_star=float(np.mean(optima)),
        penalty=Penalty(penalty),
    )


def grid_select(
    replicates: Sequence[SpectralMatrix],
    lambdas: Sequence[float],
    criterion: Union[Criterion, str],
    truth: Truth,
    penalty: Union[Penalty, str] = Penalty.LASSO,
    config: Optional[RSEConfig] = None,
    n_jobs: int = 1,
) -> TuningReport:
    """
    Choose lambda* on training replicates with known ground truth.

    Raises:
        InvalidArgument: If the grid or the replicate list is empty
    """
    criterion = Criterion(criterion)
    if len(lambdas) == 0:
        raise InvalidArgument("lambda grid is empty")
    if len(replicates) == 0:
        raise InvalidArgument("No training replicates supplied")
    lambdas = sorted(float(lam) for lam in lambdas)
    jobs = (delayed(evaluate_grid)(S_hat, lambdas, truth, penalty, config) for S_hat in replicates)
    evaluations = Parallel(n_jobs=n_jobs)(jobs)
    table = [[entry[criterion.value] for entry in evaluation] for evaluation in evaluations]
    report = select_lambda(table, lambdas, criterion, penalty)
    log.info(f"[tune] {Penalty(penalty).value}/{criterion.value}: lambda* = {report.lambda_star:.4g}")
    return report


def degrees_of_freedom(theta: HermitianMatrix, count_diagonal: bool = True) -> int:
    """Nonzero entries of the upper triangle, diagonal optional."""
    k = 0 if count_diagonal else 1
    return int(np.count_nonzero(theta.data[np.triu_indices(theta.dim, k=k)]))


def ebic(
    result: RSEResult,
    S_hat: SpectralMatrix,
    m_eff: Optional[int] = None,
    p: Optional[int] = None,
    gamma: float = 0.5,
    count_diagonal: bool = True,
) -> float:
    """
    2 m_eff nll(Theta, S_hat) + df log(m_eff) + 4 gamma df log(p).

    Args:
        result: Estimate (normally from a lasso path)
        S_hat: Periodogram the estimate was fitted to
        m_eff: Effective sample size; defaults to S_hat.m_eff
        p: Dimension; defaults to S_hat.dim
        gamma: eBIC hyper-parameter (0 gives BIC)
        count_diagonal: Count diagonal entries in the degrees of freedom

    Raises:
        InvalidArgument: If m_eff < 1
    """
    m_eff = S_hat.m_eff if m_eff is None else m_eff
    p = S_hat.dim if p is None else p
    if m_eff < 1:
        raise InvalidArgument(f"m_eff must be >= 1, got {m_eff}")
    df = degrees_of_freedom(result.theta, count_diagonal)
    fit = 2.0 * m_eff * whittle_nll(result.theta, S_hat)
    return fit + df * math.log(m_eff) + 4.0 * gamma * df * math.log(p)


@dataclass
class EbicPath:
    lambdas: List[float]
    values: List[float]
    degrees_of_freedom: List[int]
    gamma: float
    selected: int

    @property
    def lambda_star(self) -> float:
        return self.lambdas[self.selected]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "criterion": "ebic",
            "gamma": self.gamma,
            "lambda_grid": self.lambdas,
            "ebic": self.values,
            "df": self.degrees_of_freedom,
            "lambda_star": self.lambda_star,
        }


def select_by_ebic(
    S_hat: SpectralMatrix,
    lambdas: Sequence[float],
    config: Optional[RSEConfig] = None,
    gamma: float = 0.5,
    count_diagonal: bool = True,
) -> Tuple[RSEResult, EbicPath]:
    """Fit the lasso path and keep the eBIC minimiser, ties to the larger lambda."""
    if len(lambdas) == 0:
        raise InvalidArgument("lambda grid is empty")
    grid = sorted(float(lam) for lam in lambdas)
    results = lasso_path(S_hat, grid, config)
    values = [ebic(r, S_hat, gamma=gamma, count_diagonal=count_diagonal) for r in results]
    best = min(range(len(grid)), key=lambda i: (values[i], -grid[i]))
    path = EbicPath(
        lambdas=grid,
        values=values,
        degrees_of_freedom=[degrees_of_freedom(r.theta, count_diagonal) for r in results],
        gamma=gamma,
        selected=best,
    )
    log.info(f"[ebic] selected lambda = {grid[best]:.4g} (df={path.degrees_of_freedom[best]})")
    return results[best], path


@dataclass
class MetricReport:
    """Per-replicate metrics for one estimator, with mean and standard error."""
    mse: List[float] = field(default_factory=list)
    f1: List[float] = field(default_factory=list)
    tpr: List[float] = field(default_factory=list)
    fpr: List[float] = field(default_factory=list)
    failures: int = 0
    lambda_star: Optional[float] = None

    def add(self, scores: Dict[str, float]) -> None:
        for name in ("mse", "f1", "tpr", "fpr"):
            if name in scores:
                getattr(self, name).append(float(scores[name]))

    @staticmethod
    def _summary(values: List[float]) -> Dict[str, Any]:
        n = len(values)
        if n == 0:
            return {"mean": None, "se": None, "n": 0}
        data = np.asarray(values)
        se = float(np.std(data, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return {"mean": float(np.mean(data)), "se": se, "n": n}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda_star": self.lambda_star,
            "failures": self.failures,
            "mse": self._summary(self.mse),
            "f1": self._summary(self.f1),
            "tpr": self._summary(self.tpr),
            "fpr": self._summary(self.fpr),
        }
