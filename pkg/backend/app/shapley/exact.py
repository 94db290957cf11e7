"""
Exact Shapley values and bivariate matrices by full enumeration.
"""

import logging
from math import comb
from typing import Tuple

import numpy as np

from backend.app.core.exceptions import GameTooLarge
from backend.app.core.subsets import masks_to_bits
from backend.app.shapley.types import Attribution, InteractionMatrix
from backend.app.utility.games import CoalitionGame, enumerate_all

logger = logging.getLogger(__name__)

EXACT_MAX_FEATURES = 15


def shapley_weights(d: int) -> np.ndarray:
    """w[s] = s!(d-s-1)!/d! for coalitions of size s not containing the player"""
    return np.array([1.0 / (d * comb(d - 1, s)) for s in range(d)])


def _enumerate(u: CoalitionGame, max_features: int):
    if u.d > max_features:
        raise GameTooLarge("exact method requires d <= %d" % max_features, {"d": u.d, "max": max_features})
    table = enumerate_all(u)
    masks = np.arange(1 << u.d, dtype=np.int64)
    bits = masks_to_bits(masks, u.d)
    return table, masks, bits, bits.sum(axis=1)


def exact_explain(
    u: CoalitionGame, max_features: int = EXACT_MAX_FEATURES
) -> Tuple[Attribution, InteractionMatrix]:
    """Shapley values and the bivariate matrix from one enumeration of u"""
    d = u.d
    table, masks, bits, sizes = _enumerate(u, max_features)
    w = shapley_weights(d)

    phi = np.zeros(d)
    m = np.zeros((d, d))
    for i in range(d):
        without = ~bits[:, i]
        S = masks[without]
        gain = table[S | (1 << i)]
        weighted = w[sizes[without]]
        delta = gain - table[S]
        phi[i] = weighted @ delta
        m[i] = (weighted * delta) @ bits[without]
        # u_i vanishes on every S without i
        m[i, i] = weighted @ gain

    logger.debug(f"exact explanation of {u.name}: d={d}, evaluations={u.eval_count}")
    return (
        Attribution(phi, method="exact", sample_count=1 << d),
        InteractionMatrix(m, method="exact", sample_count=1 << d),
    )


def exact_shapley(u: CoalitionGame, max_features: int = EXACT_MAX_FEATURES) -> Attribution:
    """Shapley values of u by full enumeration"""
    d = u.d
    table, masks, bits, sizes = _enumerate(u, max_features)
    w = shapley_weights(d)
    phi = np.zeros(d)
    for i in range(d):
        without = ~bits[:, i]
        S = masks[without]
        phi[i] = w[sizes[without]] @ (table[S | (1 << i)] - table[S])
    return Attribution(phi, method="exact", sample_count=1 << d)


def exact_bivariate(u: CoalitionGame, max_features: int = EXACT_MAX_FEATURES) -> InteractionMatrix:
    return exact_explain(u, max_features)[1]
