"""
Explanation results: univariate attributions and bivariate interaction matrices.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from backend.app.core.exceptions import InvalidMatrix


@dataclass
class Attribution:
    """Per-feature Shapley values"""

    phi: np.ndarray
    method: str
    sample_count: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.float64).reshape(-1)
        if not np.isfinite(self.phi).all():
            raise InvalidMatrix("attribution contains non-finite values", {"method": self.method})

    @property
    def d(self) -> int:
        return len(self.phi)


@dataclass
class InteractionMatrix:
    """Bivariate explanation, m[i][j] = importance of feature i given j present"""

    m: np.ndarray
    method: str
    sample_count: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.float64)
        if self.m.ndim != 2 or self.m.shape[0] != self.m.shape[1]:
            raise InvalidMatrix("interaction matrix must be square", {"shape": list(self.m.shape)})
        if not np.isfinite(self.m).all():
            raise InvalidMatrix("interaction matrix contains non-finite values", {"method": self.method})

    @property
    def d(self) -> int:
        return self.m.shape[0]

    def column(self, j: int) -> np.ndarray:
        """Shapley values of the game filtered on feature j"""
        return self.m[:, j]
