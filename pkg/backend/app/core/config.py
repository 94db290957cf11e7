"""
RedunFlow configuration.

Defaults come from ``config/default.yaml`` and are validated into pydantic
models; command line flags are layered on top into a ``RunConfig``.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from backend.app.core.exceptions import GameTooLarge, InvalidConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[3] / "config" / "default.yaml"


class ExplanationMethod(str, Enum):
    """Supported explanation estimators"""

    EXACT = "exact"
    SAMPLING = "sampling"
    KERNEL = "kernel"


class AppSettings(BaseModel):
    name: str = "RedunFlow"
    version: str = "0.1.0"
    log_level: str = "INFO"

    model_config = ConfigDict(extra="forbid")


class TrainingSettings(BaseModel):
    """Hyperparameters of the built-in learners"""

    epochs: int = Field(200, ge=1)
    lr: float = Field(0.1, gt=0)
    hidden: int = Field(16, ge=1)
    batch_size: int = Field(32, ge=1)
    init_scale: float = Field(0.01, ge=0)
    seed: int = 0

    model_config = ConfigDict(extra="forbid")


class ExplanationSettings(BaseModel):
    method: ExplanationMethod = ExplanationMethod.SAMPLING
    sampling_samples: int = Field(1000, ge=1)
    kernel_samples: Optional[int] = Field(None, ge=1)
    exact_max_features: int = Field(15, ge=1, le=15)
    adapter_batch_size: int = Field(256, ge=1)
    reference_draws: int = Field(1, ge=1)
    limit: int = Field(500, ge=1)
    jobs: int = Field(1, ge=1)

    model_config = ConfigDict(extra="forbid")


class GraphSettings(BaseModel):
    gamma: float = Field(1e-5, ge=0)
    damping: float = Field(0.85, gt=0, lt=1)
    tol: float = Field(1e-10, gt=0)
    max_iter: int = Field(1000, ge=1)
    personalize: bool = False

    model_config = ConfigDict(extra="forbid")


class EvaluationSettings(BaseModel):
    fractions: List[float] = Field(default_factory=lambda: [i / 10 for i in range(11)])
    trials: int = Field(5, ge=1)
    random_rankings: int = Field(20, ge=1)
    compare_to: str = "prediction"
    gammas: List[float] = Field(default_factory=lambda: [0.0, 1e-5, 1.0])

    model_config = ConfigDict(extra="forbid")

    @field_validator("fractions")
    @classmethod
    def validate_fractions(cls, v):
        if any(f < 0 or f > 1 for f in v):
            raise ValueError("fractions must lie in [0, 1]")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("fractions must be strictly increasing")
        return v

    @field_validator("compare_to")
    @classmethod
    def validate_compare_to(cls, v):
        if v not in ("prediction", "label"):
            raise ValueError("compare_to must be 'prediction' or 'label'")
        return v


class RedunFlowSettings(BaseModel):
    """Complete settings tree loaded from YAML"""

    app: AppSettings = Field(default_factory=AppSettings)
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    explanation: ExplanationSettings = Field(default_factory=ExplanationSettings)
    graph: GraphSettings = Field(default_factory=GraphSettings)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)

    model_config = ConfigDict(extra="forbid")


def load_settings(path: Optional[Union[str, Path]] = None) -> RedunFlowSettings:
    """Load RedunFlow settings from YAML, falling back to built-in defaults"""
    config_path = Path(path) if path else DEFAULT_CONFIG_PATH

    if not config_path.exists():
        if path:
            raise InvalidConfig("configuration file not found", {"path": str(config_path)})
        logger.warning(f"Default config not found at {config_path}, using built-in defaults")
        return RedunFlowSettings()

    with open(config_path, "r") as f:
        raw = yaml.safe_load(f) or {}

    try:
        return RedunFlowSettings(**raw)
    except ValidationError as e:
        raise InvalidConfig("invalid configuration file", {"path": str(config_path), "errors": e.error_count()}) from e


class ModelKind(str, Enum):
    BUILTIN_LOGISTIC = "builtin:logistic"
    BUILTIN_MLP = "builtin:mlp"
    ADAPTER = "adapter"
    SAVED = "saved"


class ModelSpec(BaseModel):
    """Parsed ``--model`` flag"""

    kind: ModelKind
    target: Optional[str] = None  # adapter command line or saved model path

    model_config = ConfigDict(extra="forbid", frozen=True)

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        text = text.strip()
        if text in (ModelKind.BUILTIN_LOGISTIC.value, ModelKind.BUILTIN_MLP.value):
            return cls(kind=ModelKind(text))
        for prefix, kind in (("adapter:", ModelKind.ADAPTER), ("saved:", ModelKind.SAVED)):
            if text.startswith(prefix):
                target = text[len(prefix):].strip()
                if len(target) >= 2 and target[0] == target[-1] and target[0] in "'\"":
                    target = target[1:-1].strip()
                if not target:
                    raise InvalidConfig(f"empty {prefix} target in --model")
                return cls(kind=kind, target=target)
        raise InvalidConfig(
            "unrecognised --model value",
            {"value": text, "expected": "builtin:logistic|builtin:mlp|adapter:<cmd>|saved:<path>"},
        )


class RunConfig(BaseModel):
    """Validated configuration of one command invocation"""

    data: Optional[Path] = None
    model: ModelSpec = Field(default_factory=lambda: ModelSpec(kind=ModelKind.BUILTIN_LOGISTIC))
    method: ExplanationMethod = ExplanationMethod.SAMPLING
    samples: Optional[int] = Field(None, ge=1)
    baseline: str = "zero"
    gamma: float = Field(1e-5, ge=0)
    damping: float = Field(0.85, gt=0, lt=1)
    personalize: bool = False
    seed: int = 0
    jobs: int = Field(1, ge=1)
    limit: int = Field(500, ge=1)
    out: Path = Path("out")
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    exact_max_features: int = Field(15, ge=1, le=15)
    adapter_batch_size: int = Field(256, ge=1)
    reference_draws: int = Field(1, ge=1)
    tol: float = Field(1e-10, gt=0)
    max_iter: int = Field(1000, ge=1)

    model_config = ConfigDict(extra="forbid")

    def check_dimension(self, d: int):
        """Enforce the size guard of the exact method"""
        if self.method == ExplanationMethod.EXACT and d > self.exact_max_features:
            raise GameTooLarge(
                "exact method requires d <= exact_max_features",
                {"d": d, "max": self.exact_max_features},
            )

    def samples_for(self, d: int) -> int:
        """Sample count for the configured method on a d-feature problem"""
        if self.samples is not None:
            return self.samples
        if self.method == ExplanationMethod.KERNEL:
            return kernel_default_samples(d)
        return 1000


def kernel_default_samples(d: int) -> int:
    """Doubled kernel default, 2 * (2d + 2048)"""
    return 2 * (2 * d + 2048)
