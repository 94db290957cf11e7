"""
Baseline substitution for removed features.

A removed coordinate is replaced by zero, a fixed vector, the dataset mean
or a row drawn from a reference set.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from backend.app.core.exceptions import DimensionMismatch, InvalidConfig
from backend.app.core.subsets import SubsetLike, masks_to_bits, to_mask
from backend.app.model.dataset import Dataset, Instance, load_dataset

logger = logging.getLogger(__name__)


class BaselineMode(str, Enum):
    ZERO = "zero"
    FIXED = "fixed"
    MEAN = "mean"
    REFERENCE = "reference"


class BaselineSpec(BaseModel):
    """How absent features are filled in"""

    mode: BaselineMode = BaselineMode.ZERO
    values: Optional[List[float]] = Field(None, description="Fixed or mean vector")
    references: Optional[List[List[float]]] = Field(None, description="Reference rows")
    draws: int = Field(1, ge=1, description="References averaged per utility evaluation")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def validate_mode(self):
        if self.mode in (BaselineMode.FIXED, BaselineMode.MEAN) and not self.values:
            raise ValueError(f"{self.mode.value} baseline needs a value vector")
        if self.mode == BaselineMode.REFERENCE and not self.references:
            raise ValueError("reference baseline needs a non-empty reference set")
        return self

    @property
    def deterministic(self) -> bool:
        return self.mode != BaselineMode.REFERENCE

    @classmethod
    def zero(cls) -> "BaselineSpec":
        return cls(mode=BaselineMode.ZERO)

    @classmethod
    def fixed(cls, values) -> "BaselineSpec":
        return cls(mode=BaselineMode.FIXED, values=[float(v) for v in values])

    @classmethod
    def dataset_mean(cls, dataset: Dataset) -> "BaselineSpec":
        if len(dataset) == 0:
            raise InvalidConfig("mean baseline needs a non-empty dataset")
        return cls(mode=BaselineMode.MEAN, values=dataset.matrix().mean(axis=0).tolist())

    @classmethod
    def reference_set(cls, rows, draws: int = 1) -> "BaselineSpec":
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        return cls(mode=BaselineMode.REFERENCE, references=rows.tolist(), draws=draws)

    @classmethod
    def from_cli(cls, text: str, dataset: Optional[Dataset] = None, draws: int = 1) -> "BaselineSpec":
        """Parse ``zero | mean | fixed:<csv-row> | refs:<csv>``"""
        text = text.strip()
        if text == "zero":
            spec = cls.zero()
        elif text == "mean":
            if dataset is None:
                raise InvalidConfig("mean baseline requires --data")
            spec = cls.dataset_mean(dataset)
        elif text.startswith("fixed:"):
            try:
                values = [float(v) for v in text[len("fixed:"):].split(",")]
            except ValueError as e:
                raise InvalidConfig(f"invalid fixed baseline: {e}") from e
            spec = cls.fixed(values)
        elif text.startswith("refs:"):
            refs = load_dataset(Path(text[len("refs:"):]))
            if len(refs) == 0:
                raise InvalidConfig("reference baseline file has no rows")
            spec = cls.reference_set(refs.matrix(), draws=draws)
        else:
            raise InvalidConfig("unrecognised --baseline value", {"value": text})

        if dataset is not None:
            spec.check_dimension(dataset.d)
        return spec

    def check_dimension(self, d: int):
        if self.values is not None and len(self.values) != d:
            raise DimensionMismatch("baseline vector length differs from d", {"length": len(self.values), "d": d})
        if self.references is not None and len(self.references[0]) != d:
            raise DimensionMismatch(
                "reference rows differ from d", {"length": len(self.references[0]), "d": d}
            )

    def sample(self, d: int, rng: Optional[np.random.Generator] = None, size: int = 1) -> np.ndarray:
        """Baseline rows of shape (size, d); reference rows are drawn with rng"""
        self.check_dimension(d)
        if self.mode == BaselineMode.ZERO:
            return np.zeros((size, d))
        if self.mode in (BaselineMode.FIXED, BaselineMode.MEAN):
            return np.tile(np.asarray(self.values, dtype=np.float64), (size, 1))
        refs = np.asarray(self.references, dtype=np.float64)
        if rng is None:
            rng = np.random.default_rng(0)
        return refs[rng.integers(0, len(refs), size=size)]


def mask_batch(
    X: np.ndarray,
    keep: np.ndarray,
    baseline: BaselineSpec,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Copy kept coordinates from X and fill the rest from the baseline.

    X is (n, d) or a single (d,) row broadcast against keep; keep is a
    boolean membership matrix of shape (n, d).
    """
    keep = np.atleast_2d(np.asarray(keep, dtype=bool))
    X = np.asarray(X, dtype=np.float64)
    n, d = keep.shape
    if X.shape[-1] != d:
        raise DimensionMismatch("keep matrix and inputs disagree on d", {"inputs": X.shape[-1], "keep": d})
    fill = baseline.sample(d, rng, size=n)
    return np.where(keep, X, fill)


def mask_instance(
    x: Instance,
    keep: SubsetLike,
    baseline: BaselineSpec,
    rng: Optional[np.random.Generator] = None,
) -> Instance:
    """Masked copy of x; x itself is unmodified"""
    mask = to_mask(keep, x.d)
    bits = masks_to_bits(np.array([mask]), x.d)
    row = mask_batch(x.array(), bits, baseline, rng)[0]
    return x.model_copy(update={"values": row.tolist()})
