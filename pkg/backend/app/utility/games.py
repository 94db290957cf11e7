"""
Coalition games over feature subsets.

A game maps canonical subset masks to reals and memoizes every value it
computes. Filtered games answer from their base game's cache and never
evaluate coalitions that miss their group.
"""

import logging
import threading
from typing import Callable, Dict, FrozenSet, Optional, Sequence

import numpy as np

from backend.app.core.exceptions import DimensionMismatch, GameTooLarge, InvalidConfig
from backend.app.core.subsets import (
    MAX_MASK_FEATURES,
    SubsetLike,
    from_mask,
    full_mask,
    masks_to_bits,
    to_mask,
)
from backend.app.model.baseline import BaselineSpec, mask_batch
from backend.app.model.dataset import Instance
from backend.app.model.predictors import Predictor, predict_batch

logger = logging.getLogger(__name__)

ENUMERATION_MAX_FEATURES = 20


class CoalitionGame:
    """Utility u: P(D) -> R with a memo cache keyed by subset mask"""

    def __init__(
        self,
        d: int,
        batch_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        name: str = "game",
    ):
        if d < 1 or d > MAX_MASK_FEATURES:
            raise InvalidConfig("player count must lie in [1, 63]", {"d": d})
        self.d = d
        self.name = name
        self._batch_fn = batch_fn
        self._cache: Dict[int, float] = {}
        self._lock = threading.Lock()
        self._eval_count = 0

    @property
    def eval_count(self) -> int:
        """Number of distinct subsets evaluated so far"""
        return self._eval_count

    @property
    def full(self) -> int:
        return full_mask(self.d)

    def _evaluate(self, masks: np.ndarray) -> np.ndarray:
        """Uncached values for an array of distinct masks"""
        if self._batch_fn is None:
            raise NotImplementedError
        return np.asarray(self._batch_fn(masks), dtype=np.float64)

    def values(self, masks) -> np.ndarray:
        """Cached values for an array of masks, evaluating misses in one batch"""
        masks = np.asarray(masks, dtype=np.int64).reshape(-1)
        with self._lock:
            missing = [m for m in np.unique(masks).tolist() if m not in self._cache]
        if missing:
            fresh = self._evaluate(np.asarray(missing, dtype=np.int64))
            with self._lock:
                for m, v in zip(missing, fresh.tolist()):
                    if m not in self._cache:
                        self._cache[m] = v
                        self._eval_count += 1
        with self._lock:
            return np.array([self._cache[m] for m in masks.tolist()], dtype=np.float64)

    def __call__(self, subset: SubsetLike) -> float:
        return float(self.values([to_mask(subset, self.d)])[0])

    @classmethod
    def from_function(cls, d: int, fn: Callable[[FrozenSet[int]], float], name: str = "function") -> "CoalitionGame":
        """Wrap a set function taking a frozenset of feature indices"""

        def batch(masks: np.ndarray) -> np.ndarray:
            return np.array([fn(frozenset(from_mask(int(m), d))) for m in masks], dtype=np.float64)

        return cls(d, batch, name=name)

    @classmethod
    def from_table(cls, table: Sequence[float], name: str = "table") -> "CoalitionGame":
        """Game given by its 2^d values in mask order"""
        table = np.asarray(table, dtype=np.float64)
        d = int(np.log2(len(table))) if len(table) else 0
        if d < 1 or len(table) != 1 << d:
            raise DimensionMismatch("table length must be a power of two >= 2", {"length": len(table)})
        return cls(d, lambda masks: table[masks], name=name)


class FilteredGame(CoalitionGame):
    """u restricted to coalitions containing every member of group, zero elsewhere"""

    def __init__(self, base: CoalitionGame, group: int):
        self.base = base
        self.group = group
        self.d = base.d
        self.name = f"{base.name}|{from_mask(group, base.d)}"

    @property
    def eval_count(self) -> int:
        return self.base.eval_count

    def values(self, masks) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64).reshape(-1)
        out = np.zeros(len(masks))
        contains = (masks & self.group) == self.group
        if contains.any():
            out[contains] = self.base.values(masks[contains])
        return out


def filter_multi(u: CoalitionGame, group: SubsetLike) -> FilteredGame:
    """Game equal to u(S) when group is a subset of S, else 0"""
    mask = to_mask(group, u.d)
    if mask == 0:
        raise InvalidConfig("filter group must be non-empty")
    if isinstance(u, FilteredGame):
        return FilteredGame(u.base, u.group | mask)
    return FilteredGame(u, mask)


def filter_game(u: CoalitionGame, i: int) -> FilteredGame:
    """The filtered utility u_i"""
    if not 0 <= int(i) < u.d:
        raise DimensionMismatch("feature index out of range", {"index": i, "d": u.d})
    return filter_multi(u, [int(i)])


def enumerate_all(u: CoalitionGame, max_features: int = ENUMERATION_MAX_FEATURES) -> np.ndarray:
    """Values of u on all 2^d subsets in mask order"""
    if u.d > max_features:
        raise GameTooLarge("game too large to enumerate", {"d": u.d, "max": max_features})
    return u.values(np.arange(1 << u.d, dtype=np.int64))


class ModelGame(CoalitionGame):
    """u(S) = probability of the target class on x with features outside S masked"""

    def __init__(
        self,
        predictor: Predictor,
        x: np.ndarray,
        baseline: BaselineSpec,
        target: int,
        root_seed: int = 0,
        batch_size: int = 256,
    ):
        super().__init__(len(x), name="model")
        self.predictor = predictor
        self.x = np.asarray(x, dtype=np.float64)
        self.baseline = baseline
        self.target = target
        self.root_seed = root_seed
        self.batch_size = batch_size

    def _rows(self, masks: np.ndarray) -> np.ndarray:
        bits = masks_to_bits(masks, self.d)
        if self.baseline.deterministic:
            return mask_batch(self.x, bits, self.baseline)
        # one generator per subset so a value never depends on evaluation order
        draws = self.baseline.draws
        blocks = [
            mask_batch(
                self.x,
                np.repeat(bits[k:k + 1], draws, axis=0),
                self.baseline,
                np.random.default_rng([self.root_seed, int(m)]),
            )
            for k, m in enumerate(masks.tolist())
        ]
        return np.vstack(blocks)

    def _evaluate(self, masks: np.ndarray) -> np.ndarray:
        rows = self._rows(masks)
        chunk = self.batch_size * (1 if self.baseline.deterministic else self.baseline.draws)
        probs = np.concatenate(
            [predict_batch(self.predictor, rows[s:s + chunk])[:, self.target] for s in range(0, len(rows), chunk)]
        )
        if not self.baseline.deterministic:
            probs = probs.reshape(len(masks), self.baseline.draws).mean(axis=1)
        return probs


def model_utility(
    p: Predictor,
    x: Instance,
    baseline: BaselineSpec,
    target: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    batch_size: int = 256,
) -> ModelGame:
    """Coalition game of a predictor around one instance"""
    if x.d != p.d:
        raise DimensionMismatch("instance dimension differs from predictor d", {"instance": x.d, "d": p.d})
    baseline.check_dimension(x.d)
    if target is None:
        target = int(np.argmax(predict_batch(p, [x])[0]))
    if not 0 <= target < p.class_count:
        raise InvalidConfig("target class out of range", {"target": target, "classes": p.class_count})
    root_seed = int(rng.integers(0, 2**63 - 1)) if rng is not None else 0
    return ModelGame(p, x.array(), baseline, target, root_seed=root_seed, batch_size=batch_size)
