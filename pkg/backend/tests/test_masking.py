"""
Tests for the masking-based evaluation protocols.
"""

import numpy as np
import pytest

from backend.app.analytics.masking import directional_masking, mr_masking_curve, posthoc_accuracy, removal_curve
from backend.app.core.exceptions import DimensionMismatch, InvalidConfig, UnlabeledDataset
from backend.app.graph.explanation_graph import RedundancyGraph, build_graph, threshold
from backend.app.model.baseline import BaselineSpec
from backend.app.model.dataset import Dataset
from backend.app.model.predictors import train_logistic

ZERO = BaselineSpec.zero()


def dictator_graphs(dataset, matrix):
    h = threshold(build_graph(matrix), 1e-5)
    return [h] * len(dataset)


@pytest.mark.unit
class TestPosthocAccuracy:
    def test_keep_everything(self, dictator):
        dataset, p = dictator
        assert posthoc_accuracy(p, dataset.instances, [[0, 1, 2]] * len(dataset), ZERO) == 1.0

    def test_masking_the_dictator(self, dictator):
        dataset, p = dictator
        # ties resolve to class 0, so only the negative half still agrees
        assert posthoc_accuracy(p, dataset.instances, [[1, 2]] * len(dataset), ZERO) == 0.5

    def test_label_mode(self, dictator):
        dataset, p = dictator
        assert posthoc_accuracy(p, dataset.instances, [[0]] * len(dataset), ZERO, compare_to="label") == 1.0
        unlabeled = Dataset.from_arrays(dataset.matrix())
        with pytest.raises(UnlabeledDataset):
            posthoc_accuracy(p, unlabeled.instances, [[0]] * len(dataset), ZERO, compare_to="label")

    def test_keep_set_count(self, dictator):
        dataset, p = dictator
        with pytest.raises(DimensionMismatch):
            posthoc_accuracy(p, dataset.instances, [[0]], ZERO)
        with pytest.raises(InvalidConfig):
            posthoc_accuracy(p, [], [], ZERO)


@pytest.mark.unit
class TestMutualRedundancyCurve:
    def test_planted_copies_are_interchangeable(self, planted):
        model = train_logistic(planted, epochs=50, seed=0)
        h = RedundancyGraph.from_edges(6, [(a, b) for a in range(3) for b in range(3) if a != b])
        curve = mr_masking_curve(model, planted.instances, [h] * len(planted), [0.0, 0.5, 1.0], ZERO, trials=3)
        assert curve.values() == [1.0, 1.0, 1.0]
        assert curve.trials == 3
        assert curve.cardinalities[0] == [0] * len(planted)
        assert curve.cardinalities[-1] == [2] * len(planted)

    def test_no_groups_means_nothing_masked(self, dictator):
        dataset, p = dictator
        empty = [RedundancyGraph.from_edges(3, [])] * len(dataset)
        curve = mr_masking_curve(p, dataset.instances, empty, [0.0, 1.0], ZERO)
        assert curve.values() == [1.0, 1.0]
        assert curve.cardinalities[-1] == [0] * len(dataset)

    def test_seeded(self, dictator):
        dataset, p = dictator
        h = RedundancyGraph.from_edges(3, [(0, 1), (1, 0), (1, 2), (2, 1)])
        graphs = [h] * len(dataset)
        a = mr_masking_curve(p, dataset.instances, graphs, [0.0, 0.5, 1.0], ZERO, trials=4, seed=3)
        b = mr_masking_curve(p, dataset.instances, graphs, [0.0, 0.5, 1.0], ZERO, trials=4, seed=3)
        assert a == b

    def test_fraction_validation(self, dictator):
        dataset, p = dictator
        graphs = [RedundancyGraph.from_edges(3, [])] * len(dataset)
        with pytest.raises(InvalidConfig):
            mr_masking_curve(p, dataset.instances, graphs, [0.5, 0.5], ZERO)
        with pytest.raises(InvalidConfig):
            mr_masking_curve(p, dataset.instances, graphs, [0.0, 1.5], ZERO)
        with pytest.raises(DimensionMismatch):
            mr_masking_curve(p, dataset.instances, graphs[:2], [0.0], ZERO)


@pytest.mark.unit
class TestDirectionalMasking:
    def test_dictator(self, dictator, dictator_explanation):
        dataset, p = dictator
        _, matrix = dictator_explanation
        report = directional_masking(p, dataset.instances, dictator_graphs(dataset, matrix), ZERO)
        assert report.accuracy_sink_masked == 100.0
        assert report.accuracy_source_masked == 50.0
        assert report.pct_features_masked_sink == pytest.approx(200.0 / 3)
        assert report.pct_features_masked_source == pytest.approx(100.0 / 3)
        assert report.instances[0].sinks == [1, 2]
        assert report.instances[0].sources == [0]
        assert report.instances[0].instance_id == "row-0"


@pytest.mark.unit
class TestRemovalCurve:
    def test_ranking_order_matters(self, dictator):
        dataset, p = dictator
        n = len(dataset)
        good = removal_curve(p, dataset.instances, [[0, 1, 2]] * n, [0.0, 1 / 3, 1.0], ZERO)
        bad = removal_curve(p, dataset.instances, [[1, 2, 0]] * n, [0.0, 1 / 3, 1.0], ZERO)
        assert good.values() == [1.0, 1.0, 0.5]
        assert bad.values() == [1.0, 0.5, 0.5]
        assert good.cardinalities[1] == [1] * n

    def test_ranking_count(self, dictator):
        dataset, p = dictator
        with pytest.raises(DimensionMismatch):
            removal_curve(p, dataset.instances, [[0, 1, 2]], [0.0], ZERO)
