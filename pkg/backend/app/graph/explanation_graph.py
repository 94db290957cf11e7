"""
Directed explanation graphs and their thresholded redundancy graphs.

The adjacency of the explanation graph is the transpose of the bivariate
matrix: A[i][j] = m[j][i], the influence of j when i is present. An edge
i -> j survives into the redundancy graph when |A[i][j]| <= gamma.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import networkx as nx
import numpy as np

from backend.app.core.exceptions import InvalidConfig, InvalidMatrix
from backend.app.shapley.types import InteractionMatrix

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = 1e-5


@dataclass
class ExplanationGraph:
    """Weighted digraph over features, zero diagonal"""

    adjacency: np.ndarray

    @property
    def d(self) -> int:
        return self.adjacency.shape[0]

    def interaction(self) -> np.ndarray:
        """Bivariate matrix behind the graph, diagonal dropped"""
        return self.adjacency.T.copy()


@dataclass
class RedundancyGraph:
    """Boolean digraph of near-zero explanation edges"""

    edges: np.ndarray
    gamma: float

    @property
    def d(self) -> int:
        return self.edges.shape[0]

    @property
    def edge_count(self) -> int:
        return int(self.edges.sum())

    def edge_list(self) -> List[Tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.edges))]

    def to_networkx(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.d))
        G.add_edges_from(self.edge_list())
        return G

    @classmethod
    def from_edges(cls, d: int, edges, gamma: float = DEFAULT_GAMMA) -> "RedundancyGraph":
        matrix = np.zeros((d, d), dtype=bool)
        for i, j in edges:
            if i != j:
                matrix[i, j] = True
        return cls(matrix, gamma)


def build_graph(m: Union[InteractionMatrix, np.ndarray]) -> ExplanationGraph:
    """Explanation graph of a bivariate matrix"""
    values = m.m if isinstance(m, InteractionMatrix) else np.asarray(m, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise InvalidMatrix("interaction matrix must be square", {"shape": list(values.shape)})
    if not np.isfinite(values).all():
        raise InvalidMatrix("interaction matrix contains non-finite entries")
    adjacency = values.T.copy()
    np.fill_diagonal(adjacency, 0.0)
    return ExplanationGraph(adjacency)


def threshold(g: ExplanationGraph, gamma: float = DEFAULT_GAMMA) -> RedundancyGraph:
    """Keep the edges whose absolute weight is at most gamma"""
    if gamma < 0 or not np.isfinite(gamma):
        raise InvalidConfig("gamma must be a finite value >= 0", {"gamma": gamma})
    edges = np.abs(g.adjacency) <= gamma
    np.fill_diagonal(edges, False)
    return RedundancyGraph(edges, float(gamma))


def density(h: RedundancyGraph) -> float:
    """Edges over d(d-1)"""
    if h.d < 2:
        raise InvalidConfig("density needs at least two nodes", {"d": h.d})
    return h.edge_count / (h.d * (h.d - 1))


def transitivity_violations(h: RedundancyGraph, limit: Optional[int] = None) -> List[Tuple[int, int, int]]:
    """Triples (i, j, k) with edges i->j and j->k but no edge i->k, for i != k"""
    E = h.edges
    two_step = (E.astype(np.int64) @ E.astype(np.int64)) > 0
    missing = two_step & ~E
    np.fill_diagonal(missing, False)

    violations = []
    for i, k in zip(*np.nonzero(missing)):
        for j in np.nonzero(E[i] & E[:, k])[0]:
            violations.append((int(i), int(j), int(k)))
            if limit is not None and len(violations) >= limit:
                return violations
    return violations


def is_transitive(h: RedundancyGraph) -> bool:
    return not transitivity_violations(h, limit=1)
