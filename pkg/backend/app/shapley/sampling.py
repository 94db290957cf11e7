"""
Permutation-sampling estimates of Shapley values and bivariate matrices.

For each feature i, M uniform permutations are drawn from a substream
derived from (seed, i). The marginal of adding i to its prefix counts
towards phi_i, and towards m[i][j] for every j already in the prefix.
"""

import logging
from typing import Tuple

import numpy as np
from joblib import Parallel, delayed

from backend.app.core.exceptions import InvalidConfig
from backend.app.core.subsets import bits_to_masks
from backend.app.shapley.types import Attribution, InteractionMatrix
from backend.app.utility.games import CoalitionGame

logger = logging.getLogger(__name__)

DEFAULT_PERMUTATIONS = 1000


def feature_stream(seed: int, i: int) -> np.random.Generator:
    """Generator for feature i, independent of worker scheduling"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))


def _feature_row(u: CoalitionGame, i: int, M: int, seed: int) -> Tuple[float, np.ndarray]:
    d = u.d
    rng = feature_stream(seed, i)
    perms = rng.permuted(np.tile(np.arange(d), (M, 1)), axis=1)

    # position[k, j] = place of feature j in permutation k
    position = np.empty_like(perms)
    np.put_along_axis(position, perms, np.arange(d)[None, :].repeat(M, axis=0), axis=1)
    prefix_bits = position < position[:, [i]]

    prefix = bits_to_masks(prefix_bits)
    values = u.values(np.concatenate([prefix | (1 << i), prefix]))
    with_i, without_i = values[:M], values[M:]
    delta = with_i - without_i

    row = (delta @ prefix_bits) / M
    row[i] = with_i.mean()
    return float(delta.sum() / M), row


def sampling_bivariate(
    u: CoalitionGame,
    M: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    jobs: int = 1,
) -> Tuple[Attribution, InteractionMatrix]:
    """Unbiased estimates of Shapley values and the bivariate matrix"""
    if M < 1:
        raise InvalidConfig("sample count must be >= 1", {"samples": M})

    if jobs > 1 and u.d > 1:
        rows = Parallel(n_jobs=jobs, prefer="threads")(delayed(_feature_row)(u, i, M, seed) for i in range(u.d))
    else:
        rows = [_feature_row(u, i, M, seed) for i in range(u.d)]

    phi = np.array([r[0] for r in rows])
    m = np.vstack([r[1] for r in rows])
    logger.debug(f"sampled explanation of {u.name}: d={u.d}, M={M}, evaluations={u.eval_count}")
    return (
        Attribution(phi, method="sampling", sample_count=M, seed=seed),
        InteractionMatrix(m, method="sampling", sample_count=M, seed=seed),
    )
