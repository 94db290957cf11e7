"""
Tests for the external model adapter protocol.
"""

import subprocess

import numpy as np
import pytest

from backend.app.core.exceptions import AdapterProtocolError, InvalidConfig
from backend.app.model.adapter import AdapterPredictor
from backend.app.model.baseline import BaselineSpec
from backend.app.model.predictors import predict_batch, save_predictor, train_mlp
from backend.app.shapley.exact import exact_explain
from backend.app.utility.games import model_utility
from backend.tests.conftest import adapter_command


def fixed(mode="ok", d=3):
    return adapter_command("fixed_distribution_adapter.py", "--d", str(d), "--probs", "0.25,0.75", "--mode", mode)


@pytest.mark.integration
class TestAdapterProtocol:
    def test_meta_and_predict(self):
        with AdapterPredictor(fixed(), batch_size=2) as p:
            assert (p.d, p.class_count) == (3, 2)
            probs = p.predict_proba(np.zeros((5, 3)))
            np.testing.assert_allclose(probs, [[0.25, 0.75]] * 5)
            assert p.calls == 3

    def test_constant_model_has_empty_explanation(self, dictator):
        dataset, _ = dictator
        with AdapterPredictor(fixed()) as p:
            u = model_utility(p, dataset.instances[0], BaselineSpec.zero())
            assert u.target == 1
            phi, matrix = exact_explain(u)
        np.testing.assert_allclose(phi.phi, 0.0, atol=1e-15)
        off_diagonal = matrix.m[~np.eye(3, dtype=bool)]
        np.testing.assert_allclose(off_diagonal, 0.0, atol=1e-15)
        np.testing.assert_allclose(np.diag(matrix.m), 0.75)

    @pytest.mark.parametrize("mode", ["error", "garbage", "exit"])
    def test_misbehaving_adapter(self, mode):
        p = AdapterPredictor(fixed(mode))
        try:
            with pytest.raises(AdapterProtocolError):
                p.predict_proba(np.zeros((1, 3)))
        finally:
            p.close()

    def test_rows_must_be_distributions(self):
        command = adapter_command("fixed_distribution_adapter.py", "--d", "2", "--probs", "0.2,0.3")
        with AdapterPredictor(command) as p:
            with pytest.raises(AdapterProtocolError):
                p.predict_proba(np.zeros((2, 2)))

    def test_missing_executable(self, tmp_path):
        with pytest.raises(AdapterProtocolError):
            AdapterPredictor(str(tmp_path / "no-such-adapter"))

    def test_unparsable_command(self):
        with pytest.raises(InvalidConfig):
            AdapterPredictor("python 'unterminated")

    def test_fork_opens_a_new_process(self):
        with AdapterPredictor(fixed()) as p:
            with p.fork() as q:
                assert q is not p
                assert q._process.pid != p._process.pid
                np.testing.assert_array_equal(q.predict_proba(np.ones((2, 3))), p.predict_proba(np.ones((2, 3))))

    def test_weights_adapter_matches_builtin(self, tmp_path, planted):
        model = train_mlp(planted, hidden=4, epochs=3, seed=0)
        path = tmp_path / "model.json"
        save_predictor(model, path)
        with AdapterPredictor(adapter_command("weights_adapter.py", str(path))) as p:
            assert (p.d, p.class_count) == (planted.d, 2)
            np.testing.assert_allclose(
                p.predict_proba(planted.matrix()), predict_batch(model, planted.matrix()), atol=1e-9
            )

    def test_failed_handshake_stops_child(self, monkeypatch):
        started = []
        popen = subprocess.Popen

        def recording_popen(*args, **kwargs):
            process = popen(*args, **kwargs)
            started.append(process)
            return process

        monkeypatch.setattr(subprocess, "Popen", recording_popen)
        with pytest.raises(AdapterProtocolError, match="model failed to load"):
            AdapterPredictor(fixed("meta-error"))
        assert len(started) == 1
        assert started[0].poll() is not None
