#!/usr/bin/env python3
"""
Masking-based evaluation of redundancy graphs

Post-hoc accuracy is the share of instances whose masked prediction
matches the unmasked one (or the dataset label in label mode).
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from backend.app.analytics.models import (
    CurveMetric,
    CurvePoint,
    DirectionalDetail,
    DirectionalReport,
    MaskingCurve,
)
from backend.app.core.enhanced_logging import create_component_logger
from backend.app.core.exceptions import DimensionMismatch, InvalidConfig, UnlabeledDataset
from backend.app.core.subsets import SubsetLike, masks_to_bits, to_mask
from backend.app.graph.condensation import mutual_groups, scc
from backend.app.graph.explanation_graph import RedundancyGraph
from backend.app.graph.redundancy import sinks_sources
from backend.app.model.baseline import BaselineSpec
from backend.app.model.dataset import Instance
from backend.app.model.predictors import Predictor, predict_labels

logger = logging.getLogger(__name__)
eval_logger = create_component_logger("evaluation")


def _matrix(instances: Sequence[Instance]) -> np.ndarray:
    if not instances:
        raise InvalidConfig("evaluation needs at least one instance")
    return np.vstack([inst.array() for inst in instances])


def _reference_labels(p: Predictor, instances: Sequence[Instance], X: np.ndarray, compare_to: str) -> np.ndarray:
    if compare_to == "label":
        if any(inst.label is None for inst in instances):
            raise UnlabeledDataset("label comparison needs labelled instances")
        return np.asarray([inst.label for inst in instances])
    if compare_to != "prediction":
        raise InvalidConfig("compare_to must be 'prediction' or 'label'", {"compare_to": compare_to})
    return predict_labels(p, X)


def _agreement(p: Predictor, X: np.ndarray, keep: np.ndarray, fill: np.ndarray, reference: np.ndarray) -> np.ndarray:
    masked = np.where(keep, X, fill)
    return predict_labels(p, masked) == reference


def _keep_bits(keep_sets: Sequence[SubsetLike], d: int) -> np.ndarray:
    return masks_to_bits(np.array([to_mask(k, d) for k in keep_sets], dtype=np.int64), d)


def _check_graphs(instances: Sequence[Instance], graphs: Sequence[RedundancyGraph]):
    if len(graphs) != len(instances):
        raise DimensionMismatch("one graph per instance required", {"instances": len(instances), "graphs": len(graphs)})


def posthoc_accuracy(
    p: Predictor,
    instances: Sequence[Instance],
    keep_sets: Sequence[SubsetLike],
    baseline: BaselineSpec,
    rng: Optional[np.random.Generator] = None,
    compare_to: str = "prediction",
) -> float:
    """Share of instances whose prediction survives masking everything outside its keep-set"""
    if len(keep_sets) != len(instances):
        raise DimensionMismatch(
            "one keep-set per instance required", {"instances": len(instances), "keep_sets": len(keep_sets)}
        )
    X = _matrix(instances)
    d = X.shape[1]
    reference = _reference_labels(p, instances, X, compare_to)
    fill = baseline.sample(d, rng, size=len(X))
    return float(_agreement(p, X, _keep_bits(keep_sets, d), fill, reference).mean())


def mr_masking_curve(
    p: Predictor,
    instances: Sequence[Instance],
    graphs: Sequence[RedundancyGraph],
    fractions: Sequence[float],
    baseline: BaselineSpec,
    trials: int = 5,
    seed: int = 0,
    compare_to: str = "prediction",
) -> MaskingCurve:
    """Post-hoc accuracy while randomly masking members of mutually redundant groups.

    One random member of every group is never masked; at fraction f the
    first round(f * pool) of the remaining members are removed, so
    fraction 1.0 leaves exactly one node per group.
    """
    _check_graphs(instances, graphs)
    if trials < 1:
        raise InvalidConfig("trials must be >= 1", {"trials": trials})
    if any(f < 0 or f > 1 for f in fractions) or any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise InvalidConfig("fractions must lie in [0, 1] and increase strictly", {"fractions": list(fractions)})

    X = _matrix(instances)
    n, d = X.shape
    reference = _reference_labels(p, instances, X, compare_to)
    groups = [mutual_groups(scc(h)) for h in graphs]

    results = np.zeros((trials, len(fractions)))
    cardinalities: List[List[int]] = [[0] * n for _ in fractions]
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
        fill = baseline.sample(d, rng, size=n)

        pools = []
        for instance_groups in groups:
            pool: List[int] = []
            for group in instance_groups:
                keeper = group[int(rng.integers(len(group)))]
                pool.extend(v for v in group if v != keeper)
            pools.append(rng.permutation(np.asarray(pool, dtype=np.int64)))

        for k, fraction in enumerate(fractions):
            keep = np.ones((n, d), dtype=bool)
            for row, pool in enumerate(pools):
                count = int(round(fraction * len(pool)))
                keep[row, pool[:count]] = False
                cardinalities[k][row] = count
            results[trial, k] = _agreement(p, X, keep, fill, reference).mean()

    curve = MaskingCurve(
        metric=CurveMetric.POSTHOC_ACCURACY,
        points=[
            CurvePoint(fraction=float(f), value=float(results[:, k].mean()), std=float(results[:, k].std()))
            for k, f in enumerate(fractions)
        ],
        cardinalities=cardinalities,
        trials=trials,
    )
    eval_logger.log_evaluation("mutual_redundancy", n, {"values": curve.values()})
    return curve


def directional_masking(
    p: Predictor,
    instances: Sequence[Instance],
    graphs: Sequence[RedundancyGraph],
    baseline: BaselineSpec,
    rng: Optional[np.random.Generator] = None,
    compare_to: str = "prediction",
    damping: float = 0.85,
) -> DirectionalReport:
    """Mask every sink, then separately every source, of each instance's graph"""
    _check_graphs(instances, graphs)
    X = _matrix(instances)
    n, d = X.shape
    reference = _reference_labels(p, instances, X, compare_to)
    fill = baseline.sample(d, rng, size=n)

    results = [sinks_sources(h, damping=damping) for h in graphs]
    keep_sink = np.ones((n, d), dtype=bool)
    keep_source = np.ones((n, d), dtype=bool)
    for row, result in enumerate(results):
        keep_sink[row, result.sinks] = False
        keep_source[row, result.sources] = False

    sink_agrees = _agreement(p, X, keep_sink, fill, reference)
    source_agrees = _agreement(p, X, keep_source, fill, reference)

    details = [
        DirectionalDetail(
            instance_id=inst.id or f"row-{row}",
            sinks=result.sinks,
            sources=result.sources,
            sink_masked_agrees=bool(sink_agrees[row]),
            source_masked_agrees=bool(source_agrees[row]),
        )
        for row, (inst, result) in enumerate(zip(instances, results))
    ]
    report = DirectionalReport(
        accuracy_sink_masked=100.0 * float(sink_agrees.mean()),
        accuracy_source_masked=100.0 * float(source_agrees.mean()),
        pct_features_masked_sink=100.0 * float((~keep_sink).sum(axis=1).mean()) / d,
        pct_features_masked_source=100.0 * float((~keep_source).sum(axis=1).mean()) / d,
        instances=details,
    )
    eval_logger.log_evaluation(
        "directional",
        n,
        {"sink_masked": report.accuracy_sink_masked, "source_masked": report.accuracy_source_masked},
    )
    return report


def removal_curve(
    p: Predictor,
    instances: Sequence[Instance],
    rankings: Sequence[Sequence[int]],
    fractions: Sequence[float],
    baseline: BaselineSpec,
    rng: Optional[np.random.Generator] = None,
    compare_to: str = "prediction",
) -> MaskingCurve:
    """Post-hoc accuracy after masking the lowest-ranked share of features"""
    if len(rankings) != len(instances):
        raise DimensionMismatch("one ranking per instance required")
    X = _matrix(instances)
    n, d = X.shape
    reference = _reference_labels(p, instances, X, compare_to)
    fill = baseline.sample(d, rng, size=n)

    points, cardinalities = [], []
    for fraction in fractions:
        count = int(round(fraction * d))
        keep = np.ones((n, d), dtype=bool)
        for row, ranking in enumerate(rankings):
            if count:
                keep[row, np.asarray(ranking)[d - count:]] = False
        points.append(CurvePoint(fraction=float(fraction), value=float(_agreement(p, X, keep, fill, reference).mean())))
        cardinalities.append([count] * n)
    return MaskingCurve(metric=CurveMetric.POSTHOC_ACCURACY, points=points, cardinalities=cardinalities)
