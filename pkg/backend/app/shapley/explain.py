"""
Method dispatch for explanations.
"""

from typing import Optional, Tuple, Union

from backend.app.core.config import ExplanationMethod
from backend.app.core.exceptions import InvalidConfig
from backend.app.shapley.exact import EXACT_MAX_FEATURES, exact_explain
from backend.app.shapley.kernel import kernel_bivariate
from backend.app.shapley.sampling import DEFAULT_PERMUTATIONS, sampling_bivariate
from backend.app.shapley.types import Attribution, InteractionMatrix
from backend.app.utility.games import CoalitionGame


def explain_game(
    u: CoalitionGame,
    method: Union[str, ExplanationMethod] = ExplanationMethod.SAMPLING,
    samples: Optional[int] = None,
    seed: int = 0,
    jobs: int = 1,
    exact_max_features: int = EXACT_MAX_FEATURES,
) -> Tuple[Attribution, InteractionMatrix]:
    """(phi, E2) of u by the chosen estimator"""
    try:
        method = ExplanationMethod(method)
    except ValueError as e:
        raise InvalidConfig("unknown explanation method", {"method": str(method)}) from e

    if method == ExplanationMethod.EXACT:
        return exact_explain(u, max_features=exact_max_features)
    if method == ExplanationMethod.SAMPLING:
        return sampling_bivariate(u, M=samples or DEFAULT_PERMUTATIONS, seed=seed, jobs=jobs)
    return kernel_bivariate(u, M=samples, seed=seed)
