#!/usr/bin/env python3
"""
Insertion and deletion AUC of feature rankings
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import auc

from backend.app.analytics.models import AucResult
from backend.app.core.exceptions import InvalidConfig
from backend.app.model.baseline import BaselineSpec
from backend.app.model.dataset import Instance
from backend.app.model.predictors import Predictor, predict_batch

logger = logging.getLogger(__name__)


def _validate_ranking(ranking: Sequence[int], d: int) -> np.ndarray:
    order = np.asarray(ranking, dtype=np.int64).reshape(-1)
    if len(order) != d or not np.array_equal(np.sort(order), np.arange(d)):
        raise InvalidConfig("ranking must be a permutation of the features", {"ranking": order.tolist(), "d": d})
    return order


def insertion_deletion_auc(
    p: Predictor,
    x: Instance,
    ranking: Sequence[int],
    baseline: BaselineSpec,
    rng: Optional[np.random.Generator] = None,
    target: Optional[int] = None,
) -> AucResult:
    """Areas under the insertion and deletion curves of a ranking.

    Deletion removes features from x in ranking order, insertion adds them
    to the baseline in the same order; both track the probability of the
    originally predicted class over steps t/d, t = 0..d.
    """
    d = x.d
    order = _validate_ranking(ranking, d)
    row = x.array()
    if target is None:
        target = int(np.argmax(predict_batch(p, row[None, :])[0]))
    fill = baseline.sample(d, rng, size=1)[0]

    # inserted[t] holds the first t ranked features
    inserted = np.zeros((d + 1, d), dtype=bool)
    for t in range(1, d + 1):
        inserted[t, order[:t]] = True

    insertion_rows = np.where(inserted, row, fill)
    deletion_rows = np.where(~inserted, row, fill)
    probs = predict_batch(p, np.vstack([insertion_rows, deletion_rows]))[:, target]
    insertion, deletion = probs[: d + 1], probs[d + 1:]

    steps = np.arange(d + 1) / d
    return AucResult(
        iauc=float(auc(steps, insertion)),
        dauc=float(auc(steps, deletion)),
        insertion=insertion.tolist(),
        deletion=deletion.tolist(),
        target=target,
    )


def random_ranking_auc(
    p: Predictor,
    x: Instance,
    baseline: BaselineSpec,
    trials: int = 20,
    seed: int = 0,
) -> Tuple[float, float]:
    """Mean (iAUC, dAUC) of uniformly random rankings"""
    if trials < 1:
        raise InvalidConfig("trials must be >= 1", {"trials": trials})
    rng = np.random.default_rng(seed)
    results = [
        insertion_deletion_auc(p, x, rng.permutation(x.d), baseline, rng=np.random.default_rng(seed))
        for _ in range(trials)
    ]
    return float(np.mean([r.iauc for r in results])), float(np.mean([r.dauc for r in results]))
