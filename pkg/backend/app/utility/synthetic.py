"""
Synthetic coalition games with known structure.
"""

import logging
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from backend.app.core.subsets import full_mask, masks_to_bits
from backend.app.utility.games import CoalitionGame

logger = logging.getLogger(__name__)

RANDOM_MAX_FEATURES = 20


class GameFamily(str, Enum):
    DICTATOR = "dictator"
    AND_ALL = "and_all"
    OR_DUPLICATE = "or_duplicate"
    XOR_PAIR = "xor_pair"
    RANDOM_MONOTONE = "random_monotone"
    RANDOM = "random"


class SyntheticGameSpec(BaseModel):
    """Parameters of one synthetic game"""

    family: GameFamily
    d: int = Field(..., ge=1, le=63)
    index: int = Field(0, ge=0, description="Dictator feature")
    pair: Tuple[int, int] = Field((0, 1), description="Feature pair of or_duplicate / xor_pair")
    seed: int = 0
    density: float = Field(0.1, gt=0, le=1, description="Expected share of non-zero Mobius masses")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def validate_indices(self):
        if self.family == GameFamily.DICTATOR and self.index >= self.d:
            raise ValueError("dictator index must be < d")
        if self.family in (GameFamily.OR_DUPLICATE, GameFamily.XOR_PAIR):
            a, b = self.pair
            if a == b or not (0 <= a < self.d and 0 <= b < self.d):
                raise ValueError("pair must hold two distinct indices < d")
        if self.family in (GameFamily.RANDOM_MONOTONE, GameFamily.RANDOM) and self.d > RANDOM_MAX_FEATURES:
            raise ValueError(f"random families support d <= {RANDOM_MAX_FEATURES}")
        return self


def monotone_table(d: int, seed: int, density: float = 0.1) -> np.ndarray:
    """u(S) = sum of non-negative masses m(T) over T subset of S, in mask order"""
    rng = np.random.default_rng(seed)
    size = 1 << d
    active = rng.random(size) < density
    active[0] = False
    if not active.any():
        active[rng.integers(1, size)] = True
    masses = np.where(active, 1.0 - rng.random(size), 0.0)

    # subset-sum (zeta transform) over the lattice
    table = masses.copy()
    masks = np.arange(size)
    for i in range(d):
        has_i = (masks >> i) & 1 == 1
        table[has_i] += table[masks[has_i] ^ (1 << i)]
    return table


def make_synthetic(spec: SyntheticGameSpec) -> CoalitionGame:
    """Build the game described by spec"""
    d = spec.d
    name = spec.family.value

    if spec.family == GameFamily.DICTATOR:
        i = spec.index
        return CoalitionGame(d, lambda masks: ((masks >> i) & 1).astype(np.float64), name=f"dictator({i})")

    if spec.family == GameFamily.AND_ALL:
        full = full_mask(d)
        return CoalitionGame(d, lambda masks: (masks == full).astype(np.float64), name=name)

    if spec.family in (GameFamily.OR_DUPLICATE, GameFamily.XOR_PAIR):
        a, b = spec.pair
        pair_mask = (1 << a) | (1 << b)
        if spec.family == GameFamily.OR_DUPLICATE:
            fn = lambda masks: ((masks & pair_mask) != 0).astype(np.float64)  # noqa: E731
        else:
            fn = lambda masks: (masks_to_bits(masks & pair_mask, d).sum(axis=1) % 2).astype(np.float64)  # noqa: E731
        return CoalitionGame(d, fn, name=f"{name}({a},{b})")

    if spec.family == GameFamily.RANDOM_MONOTONE:
        return CoalitionGame.from_table(monotone_table(d, spec.seed, spec.density), name=f"{name}({spec.seed})")

    table = np.random.default_rng(spec.seed).random(1 << d)
    return CoalitionGame.from_table(table, name=f"{name}({spec.seed})")


def synthetic(family: str, d: int, seed: Optional[int] = None, **kwargs) -> CoalitionGame:
    """Shorthand for make_synthetic(SyntheticGameSpec(...))"""
    params = dict(family=GameFamily(family), d=d, **kwargs)
    if seed is not None:
        params["seed"] = seed
    return make_synthetic(SyntheticGameSpec(**params))
