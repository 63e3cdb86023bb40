"""
Partial Coherence Graphs

Nodes are processes; an edge (q, r) is present when the inverse-spectrum
estimate has a nonzero (q, r) entry, weighted by the partial coherence
|Theta_qr|^2 / (Theta_qq Theta_rr).
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Set, Tuple

import numpy as np

from whittle_graph.errors import NotPositiveDefinite, ShapeMismatch
from whittle_graph.hermitian import (
    Frequency,
    HermitianMatrix,
    frequency_from_json,
    frequency_to_json,
)
from whittle_graph.estimation.estimators import RSEResult

Edge = Tuple[int, int]


def partial_coherence(theta: HermitianMatrix, q: int, r: int) -> float:
    """
    |Theta_qr|^2 / (Theta_qq Theta_rr), clipped to [0, 1].

    Raises:
        NotPositiveDefinite: If Theta_qq or Theta_rr is not positive
    """
    t_qq = theta.data[q, q].real
    t_rr = theta.data[r, r].real
    if t_qq <= 0 or t_rr <= 0:
        raise NotPositiveDefinite(f"Non-positive diagonal entry at {q if t_qq <= 0 else r}")
    value = abs(theta.data[q, r]) ** 2 / (t_qq * t_rr)
    return min(1.0, max(0.0, value))


def partial_coherence_matrix(theta: HermitianMatrix) -> np.ndarray:
    diagonal = np.real(np.diag(theta.data))
    if np.any(diagonal <= 0):
        raise NotPositiveDefinite("Inverse spectrum has a non-positive diagonal entry")
    return np.clip(np.abs(theta.data) ** 2 / np.outer(diagonal, diagonal), 0.0, 1.0)


@dataclass
class PartialCoherenceGraph:
    """
    Weighted undirected graph over p processes.

    Attributes:
        omega: Frequency (rad/s) or Band the graph describes
        p: Number of nodes
        edges: Mapping (q, r) with q < r to partial coherence in (0, 1]
    """
    omega: Frequency
    p: int
    edges: Dict[Edge, float] = field(default_factory=dict)

    def edge_set(self) -> Set[Edge]:
        return set(self.edges)

    def degree(self) -> np.ndarray:
        degrees = np.zeros(self.p, dtype=int)
        for q, r in self.edges:
            degrees[q] += 1
            degrees[r] += 1
        return degrees

    def isolated_nodes(self) -> Set[int]:
        return {int(n) for n in np.flatnonzero(self.degree() == 0)}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega": frequency_to_json(self.omega),
            "p": self.p,
            "edges": [
                {"q": q, "r": r, "pc": weight}
                for (q, r), weight in sorted(self.edges.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PartialCoherenceGraph":
        edges = {}
        for edge in data.get("edges", []):
            q, r = int(edge["q"]), int(edge["r"])
            edges[(min(q, r), max(q, r))] = float(edge["pc"])
        return cls(omega=frequency_from_json(data["omega"]), p=int(data["p"]), edges=edges)


def graph_from_theta(theta: HermitianMatrix, omega: Frequency = 0.0, zero_tol: float = 0.0) -> PartialCoherenceGraph:
    """Edges where |Theta_qr| > zero_tol, weighted by partial coherence."""
    weights = partial_coherence_matrix(theta)
    rows, cols = np.triu_indices(theta.dim, k=1)
    magnitude = np.abs(theta.data[rows, cols])
    edges = {
        (int(q), int(r)): float(weights[q, r])
        for q, r, keep in zip(rows, cols, magnitude > zero_tol)
        if keep
    }
    return PartialCoherenceGraph(omega=omega, p=theta.dim, edges=edges)


def extract_graph(result: RSEResult, zero_tol: float = 0.0) -> PartialCoherenceGraph:
    """
    Partial coherence graph of an estimate.

    zero_tol = 0 suits lasso output, which is exactly sparse. Ridge and
    inverted-periodogram estimates are dense, so zero_tol = 0 gives the
    complete graph for them.
    """
    return graph_from_theta(result.theta, omega=result.omega, zero_tol=zero_tol)


@dataclass
class GraphComparison:
    """Edges shared by two graphs over the same nodes, and edges unique to each."""
    common: Set[Edge]
    only_first: Set[Edge]
    only_second: Set[Edge]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "common": [list(e) for e in sorted(self.common)],
            "only_first": [list(e) for e in sorted(self.only_first)],
            "only_second": [list(e) for e in sorted(self.only_second)],
        }


def compare_graphs(first: PartialCoherenceGraph, second: PartialCoherenceGraph) -> GraphComparison:
    """Split the edges of two graphs (e.g. two experimental conditions)."""
    if first.p != second.p:
        raise ShapeMismatch(f"Graphs have {first.p} and {second.p} nodes")
    a, b = first.edge_set(), second.edge_set()
    return GraphComparison(common=a & b, only_first=a - b, only_second=b - a)
