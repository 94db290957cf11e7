#!/usr/bin/env python3
"""
RedunFlow command line interface

    redunflow train       --data d.csv --model builtin:logistic --out run/
    redunflow explain     --data d.csv --model ... --method sampling --out run/
    redunflow analyze     --out run/ --gamma 1e-3
    redunflow evaluate    --data d.csv --model ... --out run/
    redunflow sweep-gamma --data d.csv --model ... --out run/ --gammas 0,1e-5,1
    redunflow verify      --seed-range 0..99

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 adapter or runtime error.
"""

import logging
from pathlib import Path
from typing import Optional

import click
import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from backend.app.analytics.sweeps import gamma_density_sweep, validate_gammas
from backend.app.cli import pipeline
from backend.app.cli.records import load_records, write_record, write_summary, write_table
from backend.app.core.config import ExplanationMethod, ModelKind, ModelSpec, load_settings
from backend.app.core.enhanced_logging import create_component_logger, setup_logging
from backend.app.core.exceptions import InvalidConfig, RedunFlowError, VerificationFailure
from backend.app.graph.explanation_graph import build_graph
from backend.app.model.predictors import TorchPredictor, predict_labels, save_predictor
from backend.app.verification.suite import parse_seed_range, run_suite

logger = logging.getLogger(__name__)
cli_logger = create_component_logger("cli")

console = Console()
err_console = Console(stderr=True)


class RedunFlowGroup(click.Group):
    """Turns RedunFlow errors into their exit codes"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except RedunFlowError as e:
            err_console.print(f"[bold red]error:[/bold red] {e}")
            ctx.exit(e.exit_code)
        except ValidationError as e:
            err_console.print(f"[bold red]invalid configuration:[/bold red] {e.error_count()} error(s)")
            ctx.exit(InvalidConfig.exit_code)


def _parse_model(ctx, param, value):
    if value is None:
        return None
    try:
        return ModelSpec.parse(value)
    except InvalidConfig as e:
        raise click.BadParameter(e.message) from e


def _parse_floats(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}") from e


def run_options(func):
    """Flags shared by the commands that touch data and models"""
    options = [
        click.option("--data", type=click.Path(dir_okay=False, path_type=Path), help="CSV dataset with a 'label' column"),
        click.option(
            "--model",
            callback=_parse_model,
            help="builtin:logistic | builtin:mlp | adapter:<command> | saved:<model.json>",
        ),
        click.option("--baseline", help="zero | mean | fixed:<v1,...,vd> | refs:<csv>"),
        click.option("--seed", type=int, help="Root random seed"),
        click.option("--jobs", type=int, help="Parallel workers"),
        click.option("--limit", type=int, help="Number of instances to use"),
        click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Output directory"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def graph_options(func):
    options = [
        click.option("--gamma", type=float, help="Redundancy threshold"),
        click.option("--damping", type=float, help="PageRank damping factor"),
        click.option("--personalize/--no-personalize", default=None, help="Personalize PageRank by |phi|"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _config(ctx: click.Context, **flags):
    return pipeline.build_run_config(ctx.obj["settings"], **flags)


@click.group(cls=RedunFlowGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), help="YAML settings file")
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
@click.option("--log-file", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], log_level: Optional[str], log_file: Optional[Path]):
    """RedunFlow: directional feature interaction and redundancy graphs"""
    settings = load_settings(config_path)
    setup_logging(log_level or settings.app.log_level, log_file)
    ctx.ensure_object(dict)
    ctx.obj["settings"] = settings


@cli.command()
@run_options
@click.pass_context
def train(ctx, **flags):
    """Train a built-in model and save it as model.json"""
    config = _config(ctx, **flags)
    if config.model.kind not in (ModelKind.BUILTIN_LOGISTIC, ModelKind.BUILTIN_MLP):
        raise InvalidConfig("train needs --model builtin:logistic or builtin:mlp")
    dataset = pipeline.require_data(config)
    predictor = pipeline.resolve_predictor(config, dataset)
    assert isinstance(predictor, TorchPredictor)

    path = config.out / "model.json"
    save_predictor(predictor, path)
    accuracy = float(np.mean(predict_labels(predictor, dataset.instances) == dataset.labels()))
    cli_logger.success("Model trained", {"kind": config.model.kind.value, "accuracy": accuracy, "path": path})
    console.print(f"[green]✓[/green] saved {path} (training accuracy {accuracy:.3f}); reuse with --model saved:{path}")


@cli.command()
@run_options
@graph_options
@click.option("--method", type=click.Choice([m.value for m in ExplanationMethod]))
@click.option("--samples", type=int, help="Permutations (sampling) or coalitions (kernel)")
@click.option("--resume", is_flag=True, help="Skip instances whose record already exists")
@click.option("--timings", is_flag=True, help="Store per-instance runtime in the records")
@click.pass_context
def explain(ctx, resume: bool, timings: bool, **flags):
    """Explain instances and write one JSON record per instance"""
    config = _config(ctx, **flags)
    dataset = pipeline.require_data(config)
    baseline = pipeline.resolve_baseline(config, dataset)
    with pipeline.resolve_predictor(config, dataset) as predictor:
        records = pipeline.explain_dataset(predictor, dataset, config, baseline, resume=resume, timings=timings)

    table = Table(title=f"{len(records)} explanation(s) → {config.out}")
    for column in ("instance", "target", "edges", "sources", "sinks", "top feature"):
        table.add_column(column)
    for record in records[:20]:
        ranking = record.ranking()
        table.add_row(
            record.instance_id,
            str(record.target),
            str(len(record.edges)),
            str(record.sources),
            str(record.sinks),
            str(ranking[0]) if ranking else "-",
        )
    console.print(table)


@cli.command()
@graph_options
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Run directory holding records/")
@click.option("--dest", type=click.Path(file_okay=False, path_type=Path), help="Write re-analyzed records here")
@click.option(
    "--average-by",
    type=click.Choice(["all", "target"]),
    help="Also write average_graph.json: the mean matrix of all records or of each target class",
)
@click.pass_context
def analyze(ctx, dest: Optional[Path], average_by: Optional[str], **flags):
    """Re-threshold stored records without re-estimating the matrices"""
    config = _config(ctx, **flags)
    records = load_records(config.out)
    target = dest or config.out
    for record in records:
        fresh = pipeline.reanalyze_record(
            record, config.gamma, config.damping, config.personalize, config.tol, config.max_iter
        )
        write_record(fresh, target)
    cli_logger.success("Records re-analyzed", {"records": len(records), "gamma": config.gamma, "out": target})
    console.print(f"[green]✓[/green] re-analyzed {len(records)} record(s) at gamma={config.gamma:g}")
    if average_by:
        groups = pipeline.average_records(
            records, average_by, config.gamma, config.damping, config.tol, config.max_iter
        )
        path = write_summary({"by": average_by, "gamma": config.gamma, "groups": groups}, target / "average_graph.json")
        for group in groups:
            console.print(f"  group {group['group']}: sources={group['sources']} sinks={group['sinks']}")
        cli_logger.success("Average graphs written", {"groups": len(groups), "path": path})


@cli.command()
@run_options
@click.option("--records", "records_dir", type=click.Path(file_okay=False, path_type=Path), help="Defaults to --out")
@click.option("--fractions", callback=_parse_floats, help="Comma-separated masking fractions")
@click.option("--trials", type=int)
@click.option("--compare-to", type=click.Choice(["prediction", "label"]))
@click.pass_context
def evaluate(ctx, records_dir, fractions, trials, compare_to, **flags):
    """Masking curves, directional masking and insertion/deletion AUC"""
    settings = ctx.obj["settings"].evaluation
    fractions = fractions if fractions is not None else settings.fractions
    trials = trials or settings.trials
    compare_to = compare_to or settings.compare_to

    config = _config(ctx, **flags)
    dataset = pipeline.require_data(config)
    baseline = pipeline.resolve_baseline(config, dataset)
    records = load_records(records_dir or config.out)[: config.limit]
    with pipeline.resolve_predictor(config, dataset) as predictor:
        curve, report, auc_rows, removal = pipeline.evaluate_records(
            predictor,
            records,
            dataset,
            baseline,
            fractions,
            trials=trials,
            random_rankings=settings.random_rankings,
            seed=config.seed,
            compare_to=compare_to,
        )

    out = config.out
    write_table([p.model_dump() for p in curve.points], out / "mr_curve.csv")
    write_table([detail.model_dump() for detail in report.instances], out / "directional.csv")
    write_table(auc_rows, out / "auc.csv")
    write_table(
        [{"ranking": name, **p.model_dump()} for name, c in removal.items() for p in c.points],
        out / "removal_curve.csv",
    )
    summary = {
        "instances": len(records),
        "mr_curve": curve.values(),
        "fractions": list(fractions),
        "accuracy_sink_masked": report.accuracy_sink_masked,
        "accuracy_source_masked": report.accuracy_source_masked,
        "pct_features_masked_sink": report.pct_features_masked_sink,
        "pct_features_masked_source": report.pct_features_masked_source,
        "mean_iauc_pagerank": float(np.mean([r["iauc_pagerank"] for r in auc_rows])),
        "mean_dauc_pagerank": float(np.mean([r["dauc_pagerank"] for r in auc_rows])),
        "mean_iauc_random": float(np.mean([r["iauc_random"] for r in auc_rows])),
        "mean_dauc_random": float(np.mean([r["dauc_random"] for r in auc_rows])),
    }
    write_summary(summary, out / "summary.json")
    cli_logger.log_evaluation("masking", len(records), summary)

    table = Table(title="Evaluation summary")
    table.add_column("metric")
    table.add_column("value", justify="right")
    for key in (
        "accuracy_sink_masked",
        "accuracy_source_masked",
        "mean_iauc_pagerank",
        "mean_iauc_random",
        "mean_dauc_pagerank",
        "mean_dauc_random",
    ):
        table.add_row(key, f"{summary[key]:.4f}")
    console.print(table)


@cli.command("sweep-gamma")
@run_options
@click.option("--records", "records_dir", type=click.Path(file_okay=False, path_type=Path), help="Defaults to --out")
@click.option("--gammas", callback=_parse_floats, help="Strictly increasing, comma-separated")
@click.pass_context
def sweep_gamma(ctx, records_dir, gammas, **flags):
    """Redundancy density and sink-masked accuracy per gamma"""
    gammas = validate_gammas(gammas if gammas is not None else ctx.obj["settings"].evaluation.gammas)
    config = _config(ctx, **flags)
    records = load_records(records_dir or config.out)[: config.limit]
    graphs = [build_graph(r.interaction_matrix()) for r in records]

    if config.data is not None:
        dataset = pipeline.require_data(config)
        instances = pipeline.match_records(records, dataset)
        baseline = pipeline.resolve_baseline(config, dataset)
        with pipeline.resolve_predictor(config, dataset) as predictor:
            rows = gamma_density_sweep(graphs, gammas, predictor, instances, baseline, rng_seed=config.seed)
    else:
        rows = gamma_density_sweep(graphs, gammas)

    write_table(rows, config.out / "gamma_sweep.csv")
    table = Table(title="Gamma sweep")
    for column in ("gamma", "density", "sink-masked accuracy"):
        table.add_column(column, justify="right")
    for row in rows:
        accuracy = "-" if row.sink_masked_accuracy is None else f"{row.sink_masked_accuracy:.4f}"
        table.add_row(f"{row.gamma:g}", f"{row.density:.4f}", accuracy)
    console.print(table)


@cli.command()
@click.option("--seed-range", default="0..99", show_default=True, help="Inclusive range a..b")
@click.option("--inject-fault", is_flag=True, help="Corrupt one matrix entry to prove the suite can fail")
@click.pass_context
def verify(ctx, seed_range: str, inject_fault: bool):
    """Run the synthetic verification suite"""
    report = run_suite(parse_seed_range(seed_range), inject_fault=inject_fault)

    table = Table(title=f"Verification over {len(report.seeds)} seed(s)")
    for column in ("check", "passed", "failed", "first failing seed"):
        table.add_column(column)
    for check in report.checks:
        status = "[green]" if check.ok else "[red]"
        first = "-" if check.first_failure_seed is None else str(check.first_failure_seed)
        table.add_row(f"{status}{check.name}", str(check.passed), str(check.failed), first)
    console.print(table)
    for name, value in report.observations.items():
        console.print(f"  observation {name}: {value}")

    if not report.ok:
        failed = report.failed_checks()[0]
        raise VerificationFailure(
            f"check {failed.name} failed",
            {"seed": failed.first_failure_seed, "detail": failed.detail},
        )
