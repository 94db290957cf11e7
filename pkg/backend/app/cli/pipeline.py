#!/usr/bin/env python3
"""
RedunFlow pipeline: configuration assembly, model resolution, per-instance
explanation and graph analysis, and the evaluation harness behind the CLI.
"""

import logging
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import ValidationError

from backend.app.analytics.masking import directional_masking, mr_masking_curve, removal_curve
from backend.app.analytics.models import (
    AucResult,
    DirectionalReport,
    ExplanationRecord,
    MaskingCurve,
    create_explanation_record,
)
from backend.app.analytics.ranking import insertion_deletion_auc, random_ranking_auc
from backend.app.analytics.sweeps import average_graph
from backend.app.cli.records import load_records, record_path, read_record, write_record
from backend.app.core.config import (
    ExplanationMethod,
    ModelKind,
    RedunFlowSettings,
    RunConfig,
    kernel_default_samples,
)
from backend.app.core.enhanced_logging import create_component_logger
from backend.app.core.exceptions import DimensionMismatch, InvalidConfig
from backend.app.graph.explanation_graph import ExplanationGraph, RedundancyGraph, build_graph, threshold
from backend.app.graph.pagerank import RankScores
from backend.app.graph.redundancy import SinkSourceResult, redundancy_rank, sinks_sources
from backend.app.model.adapter import AdapterPredictor
from backend.app.model.baseline import BaselineSpec
from backend.app.model.dataset import Dataset, Instance, load_dataset
from backend.app.model.predictors import Predictor, load_predictor, train_logistic, train_mlp
from backend.app.shapley.explain import explain_game
from backend.app.shapley.types import Attribution, InteractionMatrix
from backend.app.utility.games import model_utility

logger = logging.getLogger(__name__)
run_logger = create_component_logger("pipeline")


def build_run_config(settings: RedunFlowSettings, **flags) -> RunConfig:
    """Layer command line flags (None = not given) over the settings file"""
    values = dict(
        method=settings.explanation.method,
        gamma=settings.graph.gamma,
        damping=settings.graph.damping,
        personalize=settings.graph.personalize,
        seed=settings.training.seed,
        jobs=settings.explanation.jobs,
        limit=settings.explanation.limit,
        training=settings.training,
        exact_max_features=settings.explanation.exact_max_features,
        adapter_batch_size=settings.explanation.adapter_batch_size,
        reference_draws=settings.explanation.reference_draws,
        tol=settings.graph.tol,
        max_iter=settings.graph.max_iter,
    )
    values.update({k: v for k, v in flags.items() if v is not None})

    method = ExplanationMethod(values["method"])
    if values.get("samples") is None:
        if method == ExplanationMethod.SAMPLING:
            values["samples"] = settings.explanation.sampling_samples
        elif method == ExplanationMethod.KERNEL:
            values["samples"] = settings.explanation.kernel_samples

    try:
        return RunConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        raise InvalidConfig(f"invalid option {'.'.join(str(x) for x in first['loc'])}: {first['msg']}") from e


def require_data(config: RunConfig) -> Dataset:
    if config.data is None:
        raise InvalidConfig("--data is required for this command")
    return load_dataset(config.data)


def resolve_predictor(config: RunConfig, dataset: Dataset) -> Predictor:
    """Train, load or connect to the model named by --model"""
    spec, training = config.model, config.training
    if spec.kind == ModelKind.BUILTIN_LOGISTIC:
        predictor = train_logistic(
            dataset, epochs=training.epochs, lr=training.lr, seed=config.seed, init_scale=training.init_scale
        )
    elif spec.kind == ModelKind.BUILTIN_MLP:
        predictor = train_mlp(
            dataset,
            hidden=training.hidden,
            epochs=training.epochs,
            lr=training.lr,
            seed=config.seed,
            batch_size=training.batch_size,
        )
    elif spec.kind == ModelKind.ADAPTER:
        predictor = AdapterPredictor(spec.target, batch_size=config.adapter_batch_size)
    else:
        predictor = load_predictor(spec.target)

    if predictor.d != dataset.d:
        predictor.close()
        raise DimensionMismatch("model and dataset disagree on d", {"model": predictor.d, "dataset": dataset.d})
    return predictor


def resolve_baseline(config: RunConfig, dataset: Dataset) -> BaselineSpec:
    return BaselineSpec.from_cli(config.baseline, dataset, draws=config.reference_draws)


def instance_id(instance: Instance, index: int) -> str:
    return instance.id or f"row-{index}"


def instance_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(index,))


def analyze_explanation(
    attribution: Attribution,
    matrix: InteractionMatrix,
    gamma: float,
    damping: float,
    personalize: bool = False,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> Tuple[ExplanationGraph, RedundancyGraph, SinkSourceResult, RankScores]:
    """Graph, redundancy graph, sinks/sources and PageRank of one explanation"""
    g = build_graph(matrix)
    h = threshold(g, gamma)
    sink_source = sinks_sources(h, damping=damping, tol=tol, max_iter=max_iter)
    rank = redundancy_rank(
        g, personalization=attribution if personalize else None, damping=damping, tol=tol, max_iter=max_iter
    )
    return g, h, sink_source, rank


def explain_instance(
    predictor: Predictor,
    instance: Instance,
    index: int,
    config: RunConfig,
    baseline: BaselineSpec,
    feature_names: Optional[List[str]] = None,
    timings: bool = False,
) -> ExplanationRecord:
    """Explain one instance end to end"""
    d = instance.d
    config.check_dimension(d)
    stream = instance_seed(config.seed, index)
    u = model_utility(
        predictor,
        instance,
        baseline,
        rng=np.random.default_rng(stream),
        batch_size=config.adapter_batch_size,
    )

    samples = None
    if config.method == ExplanationMethod.SAMPLING:
        samples = config.samples_for(d)
    elif config.method == ExplanationMethod.KERNEL:
        samples = config.samples if config.samples is not None else kernel_default_samples(d)

    start = time.perf_counter()
    attribution, matrix = explain_game(
        u,
        config.method,
        samples=samples,
        seed=int(stream.generate_state(1)[0]),
        exact_max_features=config.exact_max_features,
    )
    matrix.seed = config.seed
    _, h, sink_source, rank = analyze_explanation(
        attribution, matrix, config.gamma, config.damping, config.personalize, config.tol, config.max_iter
    )
    runtime = time.perf_counter() - start

    ident = instance_id(instance, index)
    run_logger.log_explanation(ident, config.method.value, d, samples or 0, u.eval_count, runtime)
    return create_explanation_record(
        ident,
        u.target,
        attribution,
        matrix,
        h,
        sink_source,
        rank,
        damping=config.damping,
        evaluations=u.eval_count,
        feature_names=feature_names,
        runtime_seconds=round(runtime, 6) if timings else None,
    )


def _explain_chunk(
    predictor: Predictor,
    chunk: Sequence[Tuple[int, Instance]],
    config: RunConfig,
    baseline: BaselineSpec,
    feature_names: Optional[List[str]],
    timings: bool,
) -> List[ExplanationRecord]:
    worker = predictor.fork()
    try:
        records = []
        for index, instance in chunk:
            record = explain_instance(worker, instance, index, config, baseline, feature_names, timings)
            write_record(record, config.out)
            records.append(record)
        return records
    finally:
        if worker is not predictor:
            worker.close()


def explain_dataset(
    predictor: Predictor,
    dataset: Dataset,
    config: RunConfig,
    baseline: BaselineSpec,
    resume: bool = False,
    timings: bool = False,
) -> List[ExplanationRecord]:
    """Explain the first --limit instances, writing one record each"""
    config.check_dimension(dataset.d)
    selected = list(enumerate(dataset.instances[: config.limit]))

    done: Dict[int, ExplanationRecord] = {}
    if resume:
        for index, instance in selected:
            path = record_path(config.out, instance_id(instance, index))
            if path.exists():
                done[index] = read_record(path)
        if done:
            run_logger.info("Resuming run", {"skipped": len(done)})
    todo = [(index, instance) for index, instance in selected if index not in done]

    if config.jobs > 1 and len(todo) > 1:
        chunks = [todo[k::config.jobs] for k in range(config.jobs)]
        results = Parallel(n_jobs=config.jobs, prefer="threads")(
            delayed(_explain_chunk)(predictor, chunk, config, baseline, dataset.feature_names, timings)
            for chunk in chunks
            if chunk
        )
        fresh = [record for chunk_records in results for record in chunk_records]
    else:
        fresh = _explain_chunk(predictor, todo, config, baseline, dataset.feature_names, timings)

    by_id = {record.instance_id: record for record in list(done.values()) + fresh}
    return [by_id[instance_id(instance, index)] for index, instance in selected]


def reanalyze_record(
    record: ExplanationRecord,
    gamma: float,
    damping: float,
    personalize: bool,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> ExplanationRecord:
    """Recompute the graph analysis of a stored record at new parameters"""
    attribution = Attribution(np.asarray(record.phi), method=record.method, sample_count=record.samples, seed=record.seed)
    matrix = InteractionMatrix(
        record.interaction_matrix(), method=record.method, sample_count=record.samples, seed=record.seed
    )
    _, h, sink_source, rank = analyze_explanation(attribution, matrix, gamma, damping, personalize, tol, max_iter)
    return create_explanation_record(
        record.instance_id,
        record.target,
        attribution,
        matrix,
        h,
        sink_source,
        rank,
        damping=damping,
        evaluations=record.evaluations,
        feature_names=record.feature_names,
        runtime_seconds=record.runtime_seconds,
    )


def average_records(
    records: Sequence[ExplanationRecord],
    by: str,
    gamma: float,
    damping: float,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> List[Dict]:
    """Mean interaction matrix of all records (by="all") or of each target class, with its graph analysis"""
    if by not in ("all", "target"):
        raise InvalidConfig("average_by must be 'all' or 'target'", {"by": by})
    if not records:
        raise InvalidConfig("no records to average")
    matrices = [InteractionMatrix(r.interaction_matrix(), method=r.method, sample_count=r.samples) for r in records]
    groups = [str(r.target) for r in records] if by == "target" else None

    rows = []
    for label, matrix in average_graph(matrices, groups).items():
        g = build_graph(matrix)
        h = threshold(g, gamma)
        sink_source = sinks_sources(h, damping=damping, tol=tol, max_iter=max_iter)
        rank = redundancy_rank(g, damping=damping, tol=tol, max_iter=max_iter)
        rows.append(
            {
                "group": label,
                "instances": matrix.sample_count,
                "interaction": matrix.m.tolist(),
                "edges": h.edge_list(),
                "sinks": [int(v) for v in sink_source.sinks],
                "sources": [int(v) for v in sink_source.sources],
                "pagerank": rank.scores.tolist(),
                "ranking": rank.ranking().tolist(),
            }
        )
    run_logger.info("Averaged records", {"records": len(records), "by": by, "groups": len(rows)})
    return rows

def match_records(records: Sequence[ExplanationRecord], dataset: Dataset) -> List[Instance]:
    """Instances the records were computed for, in record order"""
    by_id = {instance_id(inst, k): inst for k, inst in enumerate(dataset.instances)}
    instances = []
    for record in records:
        if record.d != dataset.d:
            raise DimensionMismatch("record and dataset disagree on d", {"record": record.d, "dataset": dataset.d})
        if record.instance_id not in by_id:
            raise DimensionMismatch("record has no matching instance", {"instance_id": record.instance_id})
        instances.append(by_id[record.instance_id])
    return instances


def redundancy_graphs(records: Sequence[ExplanationRecord], gamma: Optional[float] = None) -> List[RedundancyGraph]:
    return [threshold(build_graph(r.interaction_matrix()), r.gamma if gamma is None else gamma) for r in records]


def evaluate_records(
    predictor: Predictor,
    records: Sequence[ExplanationRecord],
    dataset: Dataset,
    baseline: BaselineSpec,
    fractions: Sequence[float],
    trials: int,
    random_rankings: int,
    seed: int,
    compare_to: str = "prediction",
) -> Tuple[MaskingCurve, DirectionalReport, List[Dict], Dict[str, MaskingCurve]]:
    """Mutual-redundancy curve, directional report, AUC rows and removal curves"""
    if not records:
        raise InvalidConfig("no records to evaluate")
    if predictor.d != records[0].d:
        raise DimensionMismatch("model and records disagree on d", {"model": predictor.d, "records": records[0].d})
    instances = match_records(records, dataset)
    graphs = redundancy_graphs(records)

    curve = mr_masking_curve(
        predictor, instances, graphs, fractions, baseline, trials=trials, seed=seed, compare_to=compare_to
    )
    report = directional_masking(
        predictor,
        instances,
        graphs,
        baseline,
        rng=np.random.default_rng(seed),
        compare_to=compare_to,
        damping=records[0].damping,
    )

    auc_rows = []
    for k, (record, instance) in enumerate(zip(records, instances)):
        ranked: AucResult = insertion_deletion_auc(
            predictor, instance, record.ranking(), baseline, rng=np.random.default_rng(seed)
        )
        random_iauc, random_dauc = random_ranking_auc(
            predictor, instance, baseline, trials=random_rankings, seed=seed + k
        )
        auc_rows.append(
            {
                "instance_id": record.instance_id,
                "iauc_pagerank": ranked.iauc,
                "dauc_pagerank": ranked.dauc,
                "iauc_random": random_iauc,
                "dauc_random": random_dauc,
            }
        )

    shapley_rankings = [np.lexsort((np.arange(r.d), -np.abs(np.asarray(r.phi)))) for r in records]
    removal = {
        "pagerank": removal_curve(
            predictor, instances, [r.ranking() for r in records], fractions, baseline,
            rng=np.random.default_rng(seed), compare_to=compare_to,
        ),
        "abs_shapley": removal_curve(
            predictor, instances, shapley_rankings, fractions, baseline,
            rng=np.random.default_rng(seed), compare_to=compare_to,
        ),
    }
    return curve, report, auc_rows, removal


__all__ = [
    "analyze_explanation",
    "average_records",
    "build_run_config",
    "evaluate_records",
    "explain_dataset",
    "explain_instance",
    "load_records",
    "match_records",
    "reanalyze_record",
    "redundancy_graphs",
    "require_data",
    "resolve_baseline",
    "resolve_predictor",
]
