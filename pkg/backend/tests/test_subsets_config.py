"""
Tests for subset masks, settings loading and run configuration.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from backend.app.core.config import (
    ExplanationMethod,
    ModelKind,
    ModelSpec,
    RunConfig,
    kernel_default_samples,
    load_settings,
)
from backend.app.core.exceptions import (
    AdapterProtocolError,
    DimensionMismatch,
    GameTooLarge,
    InvalidConfig,
    RegressionSingular,
    VerificationFailure,
)
from backend.app.core.subsets import bits_to_masks, from_mask, full_mask, masks_to_bits, popcount, to_mask


@pytest.mark.unit
class TestSubsets:
    def test_index_collection_to_mask(self):
        assert to_mask([0, 2], 3) == 5
        assert to_mask(set(), 3) == 0
        assert to_mask(5, 3) == 5
        assert from_mask(5, 3) == [0, 2]
        assert full_mask(4) == 15

    def test_out_of_range(self):
        with pytest.raises(DimensionMismatch):
            to_mask([3], 3)
        with pytest.raises(DimensionMismatch):
            to_mask(8, 3)
        with pytest.raises(InvalidConfig):
            to_mask([0], 64)

    def test_bits_round_trip_and_popcount(self):
        masks = np.arange(8)
        bits = masks_to_bits(masks, 3)
        assert bits.shape == (8, 3)
        assert bits[6].tolist() == [False, True, True]
        np.testing.assert_array_equal(bits_to_masks(bits), masks)
        assert popcount(masks, 3).tolist() == [0, 1, 1, 2, 1, 2, 2, 3]


@pytest.mark.unit
class TestSettings:
    def test_default_file(self):
        settings = load_settings()
        assert settings.graph.gamma == 1e-5
        assert settings.graph.damping == 0.85
        assert settings.explanation.method == ExplanationMethod.SAMPLING
        assert settings.evaluation.fractions[0] == 0.0 and settings.evaluation.fractions[-1] == 1.0

    def test_missing_explicit_file(self, tmp_path):
        with pytest.raises(InvalidConfig):
            load_settings(tmp_path / "nope.yaml")

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("graph:\n  gamma: 1.0e-3\n  colour: blue\n")
        with pytest.raises(InvalidConfig):
            load_settings(path)

    def test_partial_file_keeps_defaults(self, tmp_path):
        path = tmp_path / "partial.yaml"
        path.write_text("graph:\n  gamma: 0.001\n")
        settings = load_settings(path)
        assert settings.graph.gamma == 0.001
        assert settings.graph.damping == 0.85

    def test_exact_cap_above_fifteen_rejected(self, tmp_path):
        path = tmp_path / "wide.yaml"
        path.write_text("explanation:\n  exact_max_features: 16\n")
        with pytest.raises(InvalidConfig):
            load_settings(path)


@pytest.mark.unit
class TestModelSpec:
    def test_builtins(self):
        assert ModelSpec.parse("builtin:logistic").kind == ModelKind.BUILTIN_LOGISTIC
        assert ModelSpec.parse(" builtin:mlp ").kind == ModelKind.BUILTIN_MLP

    def test_adapter_keeps_inner_quotes(self):
        spec = ModelSpec.parse("adapter:'/opt/my python/bin/python' serve.py --d 3")
        assert spec.kind == ModelKind.ADAPTER
        assert spec.target == "'/opt/my python/bin/python' serve.py --d 3"

    def test_wrapped_target_is_unquoted(self):
        assert ModelSpec.parse('saved:"out/model.json"').target == "out/model.json"

    @pytest.mark.parametrize("text", ["", "logistic", "adapter:", "saved:  "])
    def test_invalid(self, text):
        with pytest.raises(InvalidConfig):
            ModelSpec.parse(text)


@pytest.mark.unit
class TestRunConfig:
    def test_exact_size_guard(self):
        config = RunConfig(method="exact")
        config.check_dimension(15)
        with pytest.raises(GameTooLarge):
            config.check_dimension(20)

    def test_guard_only_applies_to_exact(self):
        RunConfig(method="sampling").check_dimension(40)

    def test_sample_defaults(self):
        assert kernel_default_samples(10) == 2 * (2 * 10 + 2048)
        assert RunConfig(method="kernel").samples_for(10) == 4136
        assert RunConfig(method="sampling").samples_for(10) == 1000
        assert RunConfig(method="sampling", samples=7).samples_for(10) == 7

    def test_ranges(self):
        with pytest.raises(ValidationError):
            RunConfig(damping=1.0)
        with pytest.raises(ValidationError):
            RunConfig(gamma=-1.0)

    def test_exact_cap_cannot_be_raised(self):
        RunConfig(method="exact", exact_max_features=15).check_dimension(15)
        with pytest.raises(ValidationError):
            RunConfig(method="exact", exact_max_features=16)


@pytest.mark.unit
class TestExitCodes:
    def test_codes(self):
        assert InvalidConfig("x").exit_code == 2
        assert GameTooLarge("x").exit_code == 2
        assert AdapterProtocolError("x").exit_code == 3
        assert RegressionSingular("x").exit_code == 3
        assert VerificationFailure("x").exit_code == 1

    def test_message_carries_details(self):
        text = str(InvalidConfig("bad gamma", {"gamma": -1}))
        assert "bad gamma" in text and "gamma=-1" in text
