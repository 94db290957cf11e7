"""
Tests for weighted, personalized PageRank.
"""

import networkx as nx
import numpy as np
import pytest

from backend.app.core.exceptions import DimensionMismatch, InvalidConfig, InvalidMatrix
from backend.app.graph.pagerank import pagerank


def networkx_scores(W, damping, personalization=None):
    G = nx.DiGraph()
    G.add_nodes_from(range(len(W)))
    for i, j in zip(*np.nonzero(W)):
        G.add_edge(int(i), int(j), weight=float(W[i, j]))
    p = None if personalization is None else {k: float(v) for k, v in enumerate(personalization)}
    scores = nx.pagerank(G, alpha=damping, personalization=p, tol=1e-13, max_iter=10000, weight="weight")
    return np.array([scores[k] for k in range(len(W))])


@pytest.mark.unit
class TestPagerank:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_networkx(self, seed):
        rng = np.random.default_rng(seed)
        W = rng.random((6, 6)) * (rng.random((6, 6)) < 0.5)
        np.fill_diagonal(W, 0.0)
        W[5] = 0.0  # dangling node
        ours = pagerank(W, damping=0.85, tol=1e-13)
        assert ours.converged
        np.testing.assert_allclose(ours.scores, networkx_scores(W, 0.85), atol=1e-8)

    def test_personalized_matches_networkx(self):
        rng = np.random.default_rng(3)
        W = rng.random((5, 5))
        np.fill_diagonal(W, 0.0)
        p = np.array([0.5, 0.1, 0.0, 0.3, 0.1])
        ours = pagerank(W, damping=0.7, personalization=p, tol=1e-13)
        assert ours.personalized
        np.testing.assert_allclose(ours.scores, networkx_scores(W, 0.7, p), atol=1e-8)

    def test_scores_are_a_distribution(self):
        scores = pagerank(np.random.default_rng(0).random((4, 4))).scores
        assert scores.sum() == pytest.approx(1.0)
        assert (scores > 0).all()

    def test_no_edges_is_uniform(self):
        np.testing.assert_allclose(pagerank(np.zeros((4, 4))).scores, 0.25)

    def test_zero_personalization_falls_back_to_uniform(self):
        W = np.array([[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(pagerank(W, personalization=np.zeros(2)).scores, pagerank(W).scores)

    def test_ties_break_towards_lower_index(self):
        rank = pagerank(np.zeros((3, 3)))
        assert rank.ranking().tolist() == [0, 1, 2]
        assert rank.argmax() == 0
        assert rank.argmin() == 0

    def test_chain_ordering(self):
        rank = pagerank(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert rank.argmax() == 1
        assert rank.argmin() == 0

    def test_reports_non_convergence(self):
        W = np.array([[0.0, 1.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        rank = pagerank(W, max_iter=1)
        assert not rank.converged
        assert rank.iterations == 1
        assert rank.scores.sum() == pytest.approx(1.0)

    def test_empty_graph(self):
        rank = pagerank(np.zeros((0, 0)))
        assert rank.d == 0 and rank.converged

    def test_validation(self):
        with pytest.raises(InvalidMatrix):
            pagerank(np.ones((2, 3)))
        with pytest.raises(InvalidMatrix):
            pagerank(np.array([[0.0, -1.0], [0.0, 0.0]]))
        with pytest.raises(InvalidConfig):
            pagerank(np.zeros((2, 2)), damping=1.0)
        with pytest.raises(DimensionMismatch):
            pagerank(np.zeros((2, 2)), personalization=np.ones(3))
        with pytest.raises(InvalidConfig):
            pagerank(np.zeros((2, 2)), personalization=np.array([1.0, -1.0]))
