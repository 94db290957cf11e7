#!/usr/bin/env python3
"""
Synthetic datasets with planted redundancy
"""

from typing import Tuple

import numpy as np

from backend.app.core.exceptions import InvalidConfig
from backend.app.model.dataset import Dataset
from backend.app.model.predictors import TorchPredictor, logistic_from_weights


def planted_redundancy_dataset(
    n: int = 200,
    copies: int = 3,
    noise: int = 3,
    seed: int = 0,
    noise_scale: float = 0.1,
) -> Dataset:
    """Label = sign of one signal that is duplicated across ``copies`` columns.

    Signal magnitudes lie in [20, 40] with alternating signs, so the classes
    are balanced and a linear model saturates on any single copy. The
    remaining ``noise`` columns are small gaussian noise.
    """
    if n < 2 or copies < 1 or noise < 0:
        raise InvalidConfig("planted dataset needs n >= 2, copies >= 1, noise >= 0")
    rng = np.random.default_rng(seed)
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    signal = signs * rng.uniform(20.0, 40.0, size=n)
    X = np.column_stack([np.tile(signal[:, None], (1, copies)), rng.normal(0.0, noise_scale, size=(n, noise))])
    y = (signal > 0).astype(np.int64)
    names = [f"copy_{k}" for k in range(copies)] + [f"noise_{k}" for k in range(noise)]
    return Dataset.from_arrays(X, y, class_count=2, feature_names=names)


def dictator_fixture(n: int = 20, d: int = 3, scale: float = 30.0) -> Tuple[Dataset, TorchPredictor]:
    """Dataset and logistic model that read feature 0 only"""
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    X = np.ones((n, d))
    X[:, 0] = signs * scale
    y = (signs > 0).astype(np.int64)
    weight = np.zeros((2, d))
    weight[0, 0], weight[1, 0] = -1.0, 1.0
    dataset = Dataset.from_arrays(X, y, class_count=2, feature_names=[f"x{i}" for i in range(d)])
    return dataset, logistic_from_weights(weight)
