"""
Instances and datasets, the unit of explanation.

Dataset files are CSV with a header row, feature columns in order, and an
optional final column named ``label`` holding integer class indices.
"""

import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from backend.app.core.exceptions import DatasetFormatError, DimensionMismatch

logger = logging.getLogger(__name__)

LABEL_COLUMN = "label"


class Instance(BaseModel):
    """A single feature vector with optional label and id"""

    values: List[float] = Field(..., description="Real-valued feature vector")
    label: Optional[int] = Field(None, ge=0, description="Class index")
    id: Optional[str] = Field(None, description="Stable identifier")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("values")
    @classmethod
    def validate_finite(cls, v):
        if not v:
            raise ValueError("instance must have at least one feature")
        if not all(math.isfinite(x) for x in v):
            raise ValueError("instance values must be finite")
        return v

    @property
    def d(self) -> int:
        return len(self.values)

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    @classmethod
    def from_array(cls, values: Sequence[float], label: Optional[int] = None, id: Optional[str] = None) -> "Instance":
        return cls(values=[float(v) for v in values], label=label, id=id)


class Dataset(BaseModel):
    """Ordered collection of instances sharing dimension d"""

    d: int = Field(..., ge=1)
    class_count: int = Field(..., ge=2)
    instances: List[Instance] = Field(default_factory=list)
    feature_names: Optional[List[str]] = None

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def validate_shapes(self):
        for inst in self.instances:
            if inst.d != self.d:
                raise ValueError(f"instance {inst.id} has {inst.d} values, expected {self.d}")
            if inst.label is not None and inst.label >= self.class_count:
                raise ValueError(f"label {inst.label} outside [0, {self.class_count})")
        if self.feature_names is not None and len(self.feature_names) != self.d:
            raise ValueError("feature_names must have d entries")
        return self

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def has_labels(self) -> bool:
        return bool(self.instances) and all(inst.label is not None for inst in self.instances)

    def matrix(self) -> np.ndarray:
        if not self.instances:
            return np.zeros((0, self.d))
        return np.vstack([inst.array() for inst in self.instances])

    def labels(self) -> Optional[np.ndarray]:
        if not self.has_labels:
            return None
        return np.asarray([inst.label for inst in self.instances], dtype=np.int64)

    def head(self, limit: int) -> "Dataset":
        return self.model_copy(update={"instances": self.instances[:limit]})

    @classmethod
    def from_arrays(
        cls,
        X: np.ndarray,
        y: Optional[np.ndarray] = None,
        class_count: Optional[int] = None,
        feature_names: Optional[List[str]] = None,
    ) -> "Dataset":
        """Build a dataset from a feature matrix and optional labels"""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise DimensionMismatch("feature matrix must be 2-D", {"shape": X.shape})
        if y is not None and len(y) != len(X):
            raise DimensionMismatch("labels and rows disagree", {"rows": len(X), "labels": len(y)})
        if class_count is None:
            class_count = max(2, int(np.max(y)) + 1) if y is not None and len(y) else 2
        instances = [
            Instance.from_array(
                row,
                label=None if y is None else int(y[k]),
                id=f"row-{k}",
            )
            for k, row in enumerate(X)
        ]
        return cls(d=X.shape[1], class_count=class_count, instances=instances, feature_names=feature_names)


def load_dataset(path: Union[str, Path], class_count: Optional[int] = None) -> Dataset:
    """Load a CSV dataset following the header/feature/label contract"""
    path = Path(path)
    if not path.exists():
        raise DatasetFormatError("dataset file not found", {"path": str(path)})

    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DatasetFormatError(f"could not parse CSV: {e}", {"path": str(path)}) from e

    if df.shape[1] == 0:
        raise DatasetFormatError("dataset has no columns", {"path": str(path)})

    y = None
    if df.columns[-1] == LABEL_COLUMN:
        labels = df[LABEL_COLUMN]
        if labels.isna().any() or not np.all(np.equal(np.mod(labels, 1), 0)):
            raise DatasetFormatError("label column must hold integer class indices", {"path": str(path)})
        y = labels.to_numpy(dtype=np.int64)
        if (y < 0).any():
            raise DatasetFormatError("labels must be non-negative", {"path": str(path)})
        df = df.drop(columns=[LABEL_COLUMN])

    if df.shape[1] == 0:
        raise DatasetFormatError("dataset has no feature columns", {"path": str(path)})

    try:
        X = df.to_numpy(dtype=np.float64)
    except ValueError as e:
        raise DatasetFormatError(f"non-numeric feature values: {e}", {"path": str(path)}) from e
    if not np.isfinite(X).all():
        raise DatasetFormatError("feature values must be finite", {"path": str(path)})

    try:
        dataset = Dataset.from_arrays(X, y, class_count=class_count, feature_names=[str(c) for c in df.columns])
    except ValidationError as e:
        raise DatasetFormatError(f"invalid dataset: {e.errors()[0]['msg']}", {"path": str(path)}) from e

    logger.info(f"Loaded {len(dataset)} instances with d={dataset.d} from {path}")
    return dataset


def save_dataset(dataset: Dataset, path: Union[str, Path]):
    """Write a dataset back to the CSV contract"""
    names = dataset.feature_names or [f"x{i}" for i in range(dataset.d)]
    df = pd.DataFrame(dataset.matrix(), columns=names)
    labels = dataset.labels()
    if labels is not None:
        df[LABEL_COLUMN] = labels
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
