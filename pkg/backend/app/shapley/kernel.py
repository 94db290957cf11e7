"""
Kernel-regression estimates of Shapley values and bivariate matrices.

Coalitions are fair-coin draws with the empty and full sets rejected, each
weighted by the Shapley kernel. The efficiency constraint is eliminated by
expressing the last feature through the others, and the weighted design is
factorized once; every filtered game then costs a single triangular solve.
"""

import logging
from math import comb
from typing import Optional

import numpy as np
from scipy.linalg import qr, solve_triangular

from backend.app.core.config import kernel_default_samples
from backend.app.core.exceptions import InvalidConfig, RegressionSingular
from backend.app.core.subsets import bits_to_masks
from backend.app.shapley.types import Attribution, InteractionMatrix
from backend.app.utility.games import CoalitionGame

logger = logging.getLogger(__name__)


def kernel_weight(d: int, size: int) -> float:
    """(d-1) / (C(d, size) * size * (d - size))"""
    if not 0 < size < d:
        raise InvalidConfig("kernel weight defined for 0 < size < d", {"d": d, "size": size})
    return (d - 1) / (comb(d, size) * size * (d - size))


def draw_coalitions(d: int, M: int, rng: np.random.Generator) -> np.ndarray:
    """M fair-coin coalitions of shape (M, d), excluding the empty and full sets"""
    drawn = []
    have = 0
    while have < M:
        batch = rng.random((2 * (M - have) + 8, d)) < 0.5
        sizes = batch.sum(axis=1)
        batch = batch[(sizes > 0) & (sizes < d)]
        drawn.append(batch)
        have += len(batch)
    return np.vstack(drawn)[:M]


class KernelSolver:
    """Constrained weighted least squares over a fixed coalition sample"""

    def __init__(self, X: np.ndarray, weights: np.ndarray):
        self.X = X.astype(np.float64)
        self.d = X.shape[1]
        self.sqrt_w = np.sqrt(weights)
        Z = self.X[:, :-1] - self.X[:, [-1]]
        self.Q, self.R = qr(self.sqrt_w[:, None] * Z, mode="economic")

        diag = np.abs(np.diag(self.R))
        tol = max(Z.shape) * np.finfo(np.float64).eps * (diag.max() if diag.size else 0.0)
        rank = int((diag > tol).sum())
        if rank < self.d - 1:
            raise RegressionSingular(
                "kernel regression is rank deficient; increase the sample count",
                {"rank": rank, "required": self.d - 1, "samples": len(X)},
            )

    def solve(self, Y: np.ndarray, f0: float, fx: float) -> np.ndarray:
        """Shapley estimate with phi summing to fx - f0"""
        target = Y - f0 - self.X[:, -1] * (fx - f0)
        head = solve_triangular(self.R, self.Q.T @ (self.sqrt_w * target))
        return np.append(head, (fx - f0) - head.sum())


def kernel_bivariate(
    u: CoalitionGame,
    M: Optional[int] = None,
    seed: int = 0,
    return_parts: bool = False,
):
    """Shapley values and bivariate matrix by kernel regression.

    Column j of the matrix is the estimate for the game filtered on j,
    obtained from the label vector Y * X[:, j]. With ``return_parts`` the
    complementary estimates for Y * (1 - X[:, j]) are returned as a third
    element, stacked column-wise like the matrix.
    """
    d = u.d
    if d < 2:
        raise InvalidConfig("kernel method requires d >= 2", {"d": d})
    if M is None:
        M = kernel_default_samples(d)
    if M < d + 2:
        raise InvalidConfig("kernel method requires samples >= d + 2", {"samples": M, "d": d})

    rng = np.random.default_rng(seed)
    X = draw_coalitions(d, M, rng)
    sizes = X.sum(axis=1)
    weights = np.array([0.0] + [kernel_weight(d, s) for s in range(1, d)] + [0.0])[sizes]

    f0, fx = u.values([0, (1 << d) - 1])
    Y = u.values(bits_to_masks(X))
    solver = KernelSolver(X, weights)

    phi = solver.solve(Y, f0, fx)
    plus = np.zeros((d, d))
    minus = np.zeros((d, d))
    for j in range(d):
        present = X[:, j]
        # u_j(empty) = 0 and u_j(D) = u(D); the complement takes the rest
        plus[:, j] = solver.solve(Y * present, 0.0, fx)
        minus[:, j] = solver.solve(Y * ~present, f0, 0.0)
        plus[-1, j] = phi[-1] - minus[-1, j]

    logger.debug(f"kernel explanation of {u.name}: d={d}, M={M}, evaluations={u.eval_count}")
    attribution = Attribution(phi, method="kernel", sample_count=M, seed=seed)
    matrix = InteractionMatrix(plus, method="kernel", sample_count=M, seed=seed)
    if return_parts:
        return attribution, matrix, minus
    return attribution, matrix
