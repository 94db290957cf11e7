"""
Tests for the built-in torch predictors and model persistence.
"""

import json

import numpy as np
import pytest

from backend.app.core.exceptions import DimensionMismatch, InvalidConfig, UnlabeledDataset
from backend.app.model.dataset import Dataset
from backend.app.model.predictors import (
    PredictorKind,
    load_predictor,
    logistic_from_weights,
    predict_batch,
    predict_labels,
    save_predictor,
    train_logistic,
    train_mlp,
)


@pytest.mark.unit
class TestLogistic:
    def test_fixed_weights(self):
        p = logistic_from_weights([[-1.0, 0.0], [1.0, 0.0]])
        probs = predict_batch(p, np.array([[0.0, 5.0], [30.0, 0.0]]))
        np.testing.assert_allclose(probs[0], [0.5, 0.5])
        assert probs[1, 1] == 1.0
        np.testing.assert_allclose(probs.sum(axis=1), 1.0)

    def test_weight_shapes(self):
        with pytest.raises(InvalidConfig):
            logistic_from_weights([[1.0, 2.0]])
        with pytest.raises(DimensionMismatch):
            logistic_from_weights(np.zeros((2, 3)), bias=np.zeros(3))

    def test_training_separates_planted_data(self, planted):
        p = train_logistic(planted, epochs=50, lr=0.1, seed=0)
        assert p.kind == PredictorKind.LOGISTIC
        assert (predict_labels(p, planted.instances) == planted.labels()).all()

    def test_training_is_deterministic(self, planted):
        a = train_logistic(planted, epochs=20, seed=3)
        b = train_logistic(planted, epochs=20, seed=3)
        for la, lb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(la["weight"], lb["weight"])
            np.testing.assert_array_equal(la["bias"], lb["bias"])

    def test_single_class_labels(self, rng):
        dataset = Dataset.from_arrays(rng.normal(size=(12, 3)), np.zeros(12, dtype=int), class_count=2)
        p = train_logistic(dataset, seed=0)
        assert (predict_batch(p, dataset.matrix())[:, 0] > 0.5).all()

    def test_unlabeled_dataset(self):
        dataset = Dataset.from_arrays(np.ones((4, 2)))
        with pytest.raises(UnlabeledDataset):
            train_logistic(dataset)

    def test_bad_hyperparameters(self, planted):
        with pytest.raises(InvalidConfig):
            train_logistic(planted, epochs=0)
        with pytest.raises(InvalidConfig):
            train_logistic(planted, lr=0.0)


@pytest.mark.unit
class TestMlp:
    def test_learns_planted_data(self, planted):
        p = train_mlp(planted, hidden=8, epochs=100, lr=0.1, seed=0, batch_size=8)
        assert p.hidden == 8
        accuracy = float(np.mean(predict_labels(p, planted.instances) == planted.labels()))
        assert accuracy >= 0.95

    def test_seeded(self, planted):
        a = train_mlp(planted, hidden=4, epochs=5, seed=1)
        b = train_mlp(planted, hidden=4, epochs=5, seed=1)
        np.testing.assert_array_equal(predict_batch(a, planted.matrix()), predict_batch(b, planted.matrix()))

    def test_fits_xor(self):
        dataset = Dataset.from_arrays([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]], [0, 1, 1, 0], class_count=2)
        p = train_mlp(dataset, hidden=8, epochs=5000, lr=0.5, seed=0, batch_size=4)
        np.testing.assert_array_equal(predict_labels(p, dataset.instances), [0, 1, 1, 0])

    def test_hidden_must_be_positive(self, planted):
        with pytest.raises(InvalidConfig):
            train_mlp(planted, hidden=0)


@pytest.mark.unit
class TestBatches:
    def test_empty_batch(self):
        p = logistic_from_weights(np.zeros((3, 4)))
        assert predict_batch(p, []).shape == (0, 3)
        assert predict_batch(p, np.zeros((0, 4))).shape == (0, 3)

    def test_dimension_mismatch(self, dictator):
        _, p = dictator
        with pytest.raises(DimensionMismatch):
            predict_batch(p, np.zeros((2, 5)))

    def test_instances_and_arrays_agree(self, dictator):
        dataset, p = dictator
        np.testing.assert_array_equal(predict_batch(p, dataset.instances), predict_batch(p, dataset.matrix()))


@pytest.mark.unit
class TestPersistence:
    def test_round_trip(self, tmp_path, planted):
        for p in (train_logistic(planted, epochs=5), train_mlp(planted, hidden=3, epochs=2)):
            path = tmp_path / f"{p.kind.value}.json"
            save_predictor(p, path)
            loaded = load_predictor(path)
            assert loaded.kind == p.kind
            assert loaded.hidden == p.hidden
            np.testing.assert_array_equal(
                predict_batch(loaded, planted.matrix()), predict_batch(p, planted.matrix())
            )

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{not json")
        with pytest.raises(InvalidConfig):
            load_predictor(path)

    def test_shape_mismatch(self, tmp_path):
        path = tmp_path / "model.json"
        save_predictor(logistic_from_weights(np.zeros((2, 3))), path)
        payload = json.loads(path.read_text())
        payload["d"] = 5
        path.write_text(json.dumps(payload))
        with pytest.raises(InvalidConfig):
            load_predictor(path)
