#!/usr/bin/env python3
"""
Black-box predictors for RedunFlow

Built-in learners are small float64 torch networks (multinomial logistic
regression and a one-hidden-layer tanh MLP) trained reproducibly from a
seed. External models are reached through the adapter protocol in
``backend.app.model.adapter``.
"""

import json
import logging
from abc import ABC, abstractmethod
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn as nn

from backend.app.core.exceptions import (
    DimensionMismatch,
    InvalidConfig,
    TrainingDiverged,
    UnlabeledDataset,
)
from backend.app.model.dataset import Dataset, Instance

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-6


class PredictorKind(str, Enum):
    """Supported predictor kinds"""

    LOGISTIC = "builtin-logistic"
    MLP = "builtin-mlp"
    ADAPTER = "external-adapter"


class Predictor(ABC):
    """A classifier mapping (n, d) inputs to (n, class_count) probabilities"""

    kind: PredictorKind
    d: int
    class_count: int

    @abstractmethod
    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Probability rows for a non-empty (n, d) float64 matrix"""

    def fork(self) -> "Predictor":
        """Handle safe to use from another worker"""
        return self

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()


class TorchPredictor(Predictor):
    """Built-in predictor backed by an ``nn.Sequential`` of Linear layers"""

    def __init__(self, kind: PredictorKind, network: nn.Sequential, d: int, class_count: int):
        self.kind = kind
        self.network = network.double().eval()
        self.d = d
        self.class_count = class_count
        for param in self.network.parameters():
            param.requires_grad_(False)

    @property
    def hidden(self) -> Optional[int]:
        linears = self.linear_layers()
        return linears[0].out_features if len(linears) > 1 else None

    def linear_layers(self) -> List[nn.Linear]:
        return [layer for layer in self.network if isinstance(layer, nn.Linear)]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            logits = self.network(torch.as_tensor(X, dtype=torch.float64))
            return torch.softmax(logits, dim=1).numpy()

    def parameters(self) -> List[Dict[str, np.ndarray]]:
        return [
            {"weight": layer.weight.detach().numpy().copy(), "bias": layer.bias.detach().numpy().copy()}
            for layer in self.linear_layers()
        ]


def _linear_network(d: int, class_count: int, hidden: Optional[int] = None) -> nn.Sequential:
    if hidden is None:
        return nn.Sequential(nn.Linear(d, class_count)).double()
    return nn.Sequential(nn.Linear(d, hidden), nn.Tanh(), nn.Linear(hidden, class_count)).double()


def _training_arrays(dataset: Dataset, epochs: int, lr: float) -> Tuple[torch.Tensor, torch.Tensor]:
    if not dataset.has_labels:
        raise UnlabeledDataset("training requires every instance to carry a label", {"instances": len(dataset)})
    if epochs < 1:
        raise InvalidConfig("epochs must be >= 1", {"epochs": epochs})
    if lr <= 0:
        raise InvalidConfig("lr must be > 0", {"lr": lr})
    X = torch.as_tensor(dataset.matrix(), dtype=torch.float64)
    y = torch.as_tensor(dataset.labels(), dtype=torch.long)
    return X, y


def _sgd_step(network: nn.Module, optimizer, criterion, X: torch.Tensor, y: torch.Tensor, epoch: int):
    optimizer.zero_grad()
    loss = criterion(network(X), y)
    if not torch.isfinite(loss):
        raise TrainingDiverged("non-finite training loss", {"epoch": epoch, "loss": float(loss)})
    loss.backward()
    optimizer.step()
    return loss


def train_logistic(
    dataset: Dataset,
    epochs: int = 200,
    lr: float = 0.1,
    seed: int = 0,
    init_scale: float = 0.01,
) -> TorchPredictor:
    """Multinomial logistic regression by full-batch gradient descent"""
    X, y = _training_arrays(dataset, epochs, lr)

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        network = _linear_network(dataset.d, dataset.class_count)
        with torch.no_grad():
            nn.init.normal_(network[0].weight, mean=0.0, std=init_scale)
            nn.init.zeros_(network[0].bias)

        optimizer = torch.optim.SGD(network.parameters(), lr=lr)
        criterion = nn.CrossEntropyLoss()
        network.train()
        for epoch in range(epochs):
            loss = _sgd_step(network, optimizer, criterion, X, y, epoch)
            if epoch % 50 == 0:
                logger.debug(f"logistic epoch {epoch}, loss: {loss.item():.6f}")

    logger.info(f"Trained logistic model: d={dataset.d}, classes={dataset.class_count}, epochs={epochs}")
    return TorchPredictor(PredictorKind.LOGISTIC, network, dataset.d, dataset.class_count)


def train_mlp(
    dataset: Dataset,
    hidden: int = 16,
    epochs: int = 200,
    lr: float = 0.1,
    seed: int = 0,
    batch_size: int = 32,
) -> TorchPredictor:
    """One-hidden-layer tanh network by mini-batch SGD"""
    if hidden < 1:
        raise InvalidConfig("hidden must be >= 1", {"hidden": hidden})
    if batch_size < 1:
        raise InvalidConfig("batch_size must be >= 1", {"batch_size": batch_size})
    X, y = _training_arrays(dataset, epochs, lr)
    n = len(y)

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        network = _linear_network(dataset.d, dataset.class_count, hidden)
        shuffler = torch.Generator().manual_seed(seed)

        optimizer = torch.optim.SGD(network.parameters(), lr=lr)
        criterion = nn.CrossEntropyLoss()
        network.train()
        for epoch in range(epochs):
            order = torch.randperm(n, generator=shuffler)
            for start in range(0, n, batch_size):
                idx = order[start:start + batch_size]
                loss = _sgd_step(network, optimizer, criterion, X[idx], y[idx], epoch)
            if epoch % 100 == 0:
                logger.debug(f"mlp epoch {epoch}, loss: {loss.item():.6f}")

    logger.info(f"Trained MLP: d={dataset.d}, hidden={hidden}, classes={dataset.class_count}, epochs={epochs}")
    return TorchPredictor(PredictorKind.MLP, network, dataset.d, dataset.class_count)


def logistic_from_weights(weight: np.ndarray, bias: Optional[np.ndarray] = None) -> TorchPredictor:
    """Logistic predictor with explicit (class_count, d) weights"""
    weight = np.atleast_2d(np.asarray(weight, dtype=np.float64))
    class_count, d = weight.shape
    if class_count < 2:
        raise InvalidConfig("logistic weights need at least two class rows", {"shape": weight.shape})
    bias = np.zeros(class_count) if bias is None else np.asarray(bias, dtype=np.float64)
    if bias.shape != (class_count,):
        raise DimensionMismatch("bias length differs from class count", {"bias": bias.shape, "classes": class_count})
    network = _linear_network(d, class_count)
    with torch.no_grad():
        network[0].weight.copy_(torch.as_tensor(weight))
        network[0].bias.copy_(torch.as_tensor(bias))
    return TorchPredictor(PredictorKind.LOGISTIC, network, d, class_count)


def _as_matrix(batch: Union[np.ndarray, Sequence[Instance]], d: int) -> np.ndarray:
    if isinstance(batch, np.ndarray):
        X = np.atleast_2d(batch.astype(np.float64, copy=False)) if batch.size else batch.reshape(0, d)
    elif not len(batch):
        X = np.zeros((0, d))
    else:
        X = np.asarray([inst.values for inst in batch], dtype=np.float64)
    if X.shape[1] != d:
        raise DimensionMismatch("instance dimension differs from predictor d", {"instance": X.shape[1], "d": d})
    return X


def predict_batch(p: Predictor, batch: Union[np.ndarray, Sequence[Instance]]) -> np.ndarray:
    """Class probabilities, one row per instance"""
    X = _as_matrix(batch, p.d)
    if len(X) == 0:
        return np.zeros((0, p.class_count))
    return p.predict_proba(X)


def predict_labels(p: Predictor, batch: Union[np.ndarray, Sequence[Instance]]) -> np.ndarray:
    """Argmax class per instance"""
    return np.argmax(predict_batch(p, batch), axis=1)


def save_predictor(p: TorchPredictor, path: Union[str, Path]):
    """Write a built-in predictor's weights as JSON"""
    payload: Dict[str, Any] = {
        "kind": p.kind.value,
        "d": p.d,
        "class_count": p.class_count,
        "hidden": p.hidden,
        "layers": [{k: v.tolist() for k, v in layer.items()} for layer in p.parameters()],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)


def load_predictor(path: Union[str, Path]) -> TorchPredictor:
    """Inverse of save_predictor"""
    path = Path(path)
    try:
        with open(path, "r") as f:
            payload = json.load(f)
        kind = PredictorKind(payload["kind"])
        d, class_count, hidden = int(payload["d"]), int(payload["class_count"]), payload.get("hidden")
        layers = payload["layers"]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise InvalidConfig(f"cannot load saved model: {e}", {"path": str(path)}) from e

    if kind == PredictorKind.ADAPTER:
        raise InvalidConfig("saved models must be built-in", {"path": str(path)})

    network = _linear_network(d, class_count, hidden if kind == PredictorKind.MLP else None)
    linears = [layer for layer in network if isinstance(layer, nn.Linear)]
    if len(linears) != len(layers):
        raise InvalidConfig("saved layer count does not match model kind", {"path": str(path)})
    try:
        with torch.no_grad():
            for linear, saved in zip(linears, layers):
                linear.weight.copy_(torch.as_tensor(saved["weight"], dtype=torch.float64))
                linear.bias.copy_(torch.as_tensor(saved["bias"], dtype=torch.float64))
    except (RuntimeError, KeyError) as e:
        raise InvalidConfig(f"saved weights do not fit the model shape: {e}", {"path": str(path)}) from e
    return TorchPredictor(kind, network, d, class_count)
