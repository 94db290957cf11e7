"""
Weighted, personalized PageRank by power iteration.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy import linalg as LA

from backend.app.core.exceptions import DimensionMismatch, InvalidConfig, InvalidMatrix

logger = logging.getLogger(__name__)

DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000


@dataclass
class RankScores:
    scores: np.ndarray
    damping: float
    personalized: bool
    iterations: int
    converged: bool

    @property
    def d(self) -> int:
        return len(self.scores)

    def ranking(self) -> np.ndarray:
        """Feature indices by descending score, lower index first on ties"""
        return np.lexsort((np.arange(self.d), -self.scores))

    def argmax(self) -> int:
        return int(self.ranking()[0])

    def argmin(self) -> int:
        return int(np.lexsort((np.arange(self.d), self.scores))[0])


def _personalization(personalization: Optional[np.ndarray], n: int) -> np.ndarray:
    if personalization is None:
        return np.full(n, 1.0 / n)
    p = np.asarray(personalization, dtype=np.float64).reshape(-1)
    if len(p) != n:
        raise DimensionMismatch("personalization length differs from node count", {"length": len(p), "n": n})
    if (p < 0).any() or not np.isfinite(p).all():
        raise InvalidConfig("personalization must be finite and non-negative")
    total = p.sum()
    return p / total if total > 0 else np.full(n, 1.0 / n)


def pagerank(
    adjacency: np.ndarray,
    damping: float = DEFAULT_DAMPING,
    personalization: Optional[np.ndarray] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RankScores:
    """Stationary scores of s = (1 - damping) p + damping * (walk on row-normalized weights).

    Mass leaving dangling nodes and the teleport mass are both returned
    through p. Stops when the L1 change is at most tol or after max_iter
    steps; non-convergence is reported on the result.
    """
    W = np.asarray(adjacency, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InvalidMatrix("adjacency must be square", {"shape": list(W.shape)})
    if not np.isfinite(W).all() or (W < 0).any():
        raise InvalidMatrix("adjacency weights must be finite and non-negative")
    if not 0 < damping < 1:
        raise InvalidConfig("damping must lie in (0, 1)", {"damping": damping})

    n = W.shape[0]
    personalized = personalization is not None
    if n == 0:
        return RankScores(np.zeros(0), damping, personalized, 0, True)

    p = _personalization(personalization, n)
    out_degree = W.sum(axis=1)
    P = np.divide(W, out_degree[:, None], out=np.zeros_like(W), where=out_degree[:, None] > 0)

    v = np.full(n, 1.0 / n)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new_v = damping * (v @ P)
        new_v += (LA.norm(v, 1) - LA.norm(new_v, 1)) * p
        delta = LA.norm(new_v - v, 1)
        v = new_v
        if delta <= tol:
            converged = True
            break

    if not converged:
        logger.warning(f"PageRank did not converge in {max_iter} iterations (last change {delta:.3e})")
    return RankScores(v / v.sum(), damping, personalized, iterations, converged)
