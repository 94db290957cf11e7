"""
Tests for gamma sweeps and graph averaging.
"""

import numpy as np
import pytest

from backend.app.analytics.sweeps import average_graph, gamma_density_sweep, validate_gammas
from backend.app.core.exceptions import DimensionMismatch, InvalidConfig
from backend.app.graph.explanation_graph import build_graph
from backend.app.shapley.types import InteractionMatrix


@pytest.mark.unit
class TestValidateGammas:
    def test_accepts_increasing(self):
        assert validate_gammas([0, 1e-5, 1]) == [0.0, 1e-5, 1.0]

    @pytest.mark.parametrize("gammas", [[], [0.1, 0.1], [1.0, 0.5], [-1.0, 0.0]])
    def test_rejects(self, gammas):
        with pytest.raises(InvalidConfig):
            validate_gammas(gammas)


@pytest.mark.unit
class TestGammaSweep:
    def test_dictator_density(self, dictator_explanation):
        _, matrix = dictator_explanation
        rows = gamma_density_sweep([build_graph(matrix)], [0.0, 1e-5, 1.0])
        assert [row.density for row in rows] == pytest.approx([4 / 6, 4 / 6, 1.0])
        assert all(row.sink_masked_accuracy is None for row in rows)
        assert rows[0].instances == 1

    def test_with_predictor(self, dictator, dictator_explanation):
        dataset, p = dictator
        _, matrix = dictator_explanation
        graphs = [build_graph(matrix)] * len(dataset)
        rows = gamma_density_sweep(graphs, [0.0, 1.0], p, dataset.instances)
        assert [row.sink_masked_accuracy for row in rows] == [1.0, 1.0]

    def test_needs_graphs(self):
        with pytest.raises(InvalidConfig):
            gamma_density_sweep([], [0.0])


@pytest.mark.unit
class TestAverageGraph:
    def test_grouped_means(self):
        matrices = [
            InteractionMatrix(np.full((2, 2), v), method="exact") for v in (1.0, 3.0, 10.0)
        ]
        averaged = average_graph(matrices, groups=["a", "a", "b"])
        assert list(averaged) == ["a", "b"]
        np.testing.assert_allclose(averaged["a"].m, 2.0)
        np.testing.assert_allclose(averaged["b"].m, 10.0)
        assert averaged["a"].sample_count == 2
        assert averaged["a"].method == "exact"

    def test_single_group_by_default(self):
        averaged = average_graph([InteractionMatrix(np.eye(2), method="sampling")])
        assert list(averaged) == ["all"]

    def test_mixed_dimensions(self):
        with pytest.raises(DimensionMismatch):
            average_graph([InteractionMatrix(np.eye(2), method="exact"), InteractionMatrix(np.eye(3), method="exact")])

    def test_group_count(self):
        with pytest.raises(DimensionMismatch):
            average_graph([InteractionMatrix(np.eye(2), method="exact")], groups=["a", "b"])
