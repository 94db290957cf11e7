"""
Strongly connected components and the condensation DAG of a redundancy graph.

Components are listed in canonical order: members sorted, components
ordered by their smallest member.
"""

from dataclasses import dataclass
from typing import List, Tuple

import networkx as nx
import numpy as np

from backend.app.graph.explanation_graph import RedundancyGraph


@dataclass
class Condensation:
    components: List[Tuple[int, ...]]
    dag_edges: List[Tuple[int, int]]
    component_of: np.ndarray

    @property
    def size(self) -> int:
        return len(self.components)

    def dag(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.size))
        G.add_edges_from(self.dag_edges)
        return G


def _canonical(groups) -> List[Tuple[int, ...]]:
    return sorted((tuple(sorted(int(v) for v in group)) for group in groups), key=lambda c: c[0])


def scc(h: RedundancyGraph) -> Condensation:
    """SCC partition of h with the induced component DAG"""
    G = h.to_networkx()
    components = _canonical(nx.strongly_connected_components(G))

    component_of = np.empty(h.d, dtype=np.int64)
    for c, members in enumerate(components):
        component_of[list(members)] = c

    dag_edges = sorted(
        {(int(component_of[i]), int(component_of[j])) for i, j in h.edge_list() if component_of[i] != component_of[j]}
    )
    return Condensation(components, dag_edges, component_of)


def mutual_groups(condensation: Condensation) -> List[Tuple[int, ...]]:
    """Mutually redundant feature groups: components with two or more members"""
    return [c for c in condensation.components if len(c) >= 2]


def weak_components(h: RedundancyGraph) -> List[Tuple[int, ...]]:
    return _canonical(nx.weakly_connected_components(h.to_networkx()))
