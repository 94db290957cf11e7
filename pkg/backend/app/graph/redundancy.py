"""
Directional redundancy: sinks and sources of the condensed redundancy graph,
and PageRank feature ranking on the explanation graph.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from backend.app.graph.condensation import Condensation, scc, weak_components
from backend.app.graph.explanation_graph import ExplanationGraph, RedundancyGraph
from backend.app.graph.pagerank import DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_TOL, RankScores, pagerank
from backend.app.shapley.types import Attribution

logger = logging.getLogger(__name__)

SOFTPLUS_SHIFT = 1e-70


@dataclass
class ComponentDetail:
    """One weakly connected piece of the redundancy graph"""

    nodes: Tuple[int, ...]
    components: List[Tuple[int, ...]]
    scores: List[float]
    sink: Optional[Tuple[int, ...]] = None
    source: Optional[Tuple[int, ...]] = None

    @property
    def isolated(self) -> bool:
        return len(self.components) == 1


@dataclass
class SinkSourceResult:
    sinks: List[int]
    sources: List[int]
    details: List[ComponentDetail] = field(default_factory=list)
    condensation: Optional[Condensation] = None


def sinks_sources(
    h: RedundancyGraph,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SinkSourceResult:
    """Highest (sink) and lowest (source) PageRank components of every weak component.

    A weak component that condenses to a single node is reported in
    neither set.
    """
    condensation = scc(h)
    dag_edges = condensation.dag_edges
    sinks, sources, details = set(), set(), []

    for nodes in weak_components(h):
        comp_ids = sorted({int(condensation.component_of[v]) for v in nodes})
        members = [condensation.components[c] for c in comp_ids]
        if len(comp_ids) == 1:
            details.append(ComponentDetail(nodes, members, [1.0]))
            continue

        local = {c: k for k, c in enumerate(comp_ids)}
        adjacency = np.zeros((len(comp_ids), len(comp_ids)))
        for a, b in dag_edges:
            if a in local and b in local:
                adjacency[local[a], local[b]] = 1.0

        rank = pagerank(adjacency, damping=damping, tol=tol, max_iter=max_iter)
        sink, source = members[rank.argmax()], members[rank.argmin()]
        sinks.update(sink)
        sources.update(source)
        details.append(ComponentDetail(nodes, members, rank.scores.tolist(), sink=sink, source=source))

    return SinkSourceResult(sorted(sinks), sorted(sources), details, condensation)


def softplus(x: np.ndarray) -> np.ndarray:
    """ln(1 + e^x), overflow-safe"""
    return np.logaddexp(0.0, x)


def redundancy_rank(
    g: ExplanationGraph,
    personalization: Optional[Attribution] = None,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RankScores:
    """PageRank on the softplus of the shifted explanation graph; higher is more influential"""
    weights = softplus(g.adjacency + SOFTPLUS_SHIFT)
    np.fill_diagonal(weights, 0.0)
    p = np.abs(personalization.phi) if personalization is not None else None
    return pagerank(weights, damping=damping, personalization=p, tol=tol, max_iter=max_iter)
