"""
Canonical subset encoding.

Feature subsets are d-bit integer masks (bit i set <=> feature i present),
valid for d <= 63. Enumeration order is the integer order of the masks.
"""

from typing import Iterable, List, Union

import numpy as np

from backend.app.core.exceptions import DimensionMismatch, InvalidConfig

MAX_MASK_FEATURES = 63

SubsetLike = Union[int, np.integer, Iterable[int]]


def full_mask(d: int) -> int:
    return (1 << d) - 1


def to_mask(subset: SubsetLike, d: int) -> int:
    """Convert an index collection (or an int mask) to a canonical mask"""
    if d > MAX_MASK_FEATURES:
        raise InvalidConfig("subset masks support at most 63 features", {"d": d})
    if isinstance(subset, (int, np.integer)):
        mask = int(subset)
        if mask < 0 or mask >> d:
            raise DimensionMismatch("subset mask out of range", {"mask": mask, "d": d})
        return mask
    mask = 0
    for i in subset:
        i = int(i)
        if not 0 <= i < d:
            raise DimensionMismatch("feature index out of range", {"index": i, "d": d})
        mask |= 1 << i
    return mask


def from_mask(mask: int, d: int) -> List[int]:
    return [i for i in range(d) if (mask >> i) & 1]


def masks_to_bits(masks: np.ndarray, d: int) -> np.ndarray:
    """Boolean membership matrix of shape (len(masks), d)"""
    masks = np.asarray(masks, dtype=np.int64).reshape(-1)
    return ((masks[:, None] >> np.arange(d, dtype=np.int64)[None, :]) & 1).astype(bool)


def bits_to_masks(bits: np.ndarray) -> np.ndarray:
    """Inverse of masks_to_bits"""
    bits = np.asarray(bits, dtype=bool)
    d = bits.shape[1]
    weights = np.left_shift(np.int64(1), np.arange(d, dtype=np.int64))
    return (bits.astype(np.int64) * weights[None, :]).sum(axis=1)


def popcount(masks: np.ndarray, d: int) -> np.ndarray:
    return masks_to_bits(masks, d).sum(axis=1)
