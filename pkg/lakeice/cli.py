"""
lakeice Command Line Interface

Batch pipeline: train, classify, timeline, phenology, trends, correlate,
compare, simulate, report, plus evaluate, grid-search and show-config.
Every subcommand loads and validates its configuration and inputs before it
writes anything, and leaves a <command>.manifest.json next to its outputs.
"""

import asyncio
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import typer
from pydantic import ValidationError
from rich.panel import Panel
from rich.table import Table

from lakeice import __version__
from lakeice.classify.svm import load_model, save_model
from lakeice.climate.io import (
    write_correlations_csv,
    write_indicators_csv,
    write_mad_csv,
    write_trends_csv,
)
from lakeice.core.config import PipelineConfig
from lakeice.core.console import console, setup_logging
from lakeice.core.exceptions import LakeIceError, MissingInputError
from lakeice.core.files import atomic_write_text, require_file
from lakeice.core.models import (
    ClimateSeries,
    CorrelationEntry,
    PhenologyRecord,
    PixelSample,
    SplitKind,
    SplitPlan,
    SynthTruth,
    TrendResult,
    WinterTimeline,
)
from lakeice.ingest.tables import (
    parse_meteo_stations,
    parse_predictions_csv,
    parse_samples_csv,
    write_predictions_csv,
)
from lakeice.phenology.io import read_phenology_json, write_phenology_json
from lakeice.reporting.summary import (
    ReportSummary,
    build_summary,
    write_phenology_summary,
    write_summary_json,
)
from lakeice.reporting.svg import write_svg_timeline
from lakeice.services.manifest import write_manifest
from lakeice.services.pipeline import LakeIcePipeline
from lakeice.synth.generator import load_truths
from lakeice.timeline.io import parse_timeline_csv, write_timeline_csv

app = typer.Typer(
    name="lakeice",
    help="lakeice: lake ice phenology from optical satellite pixels",
    add_completion=False,
)

ConfigOption = typer.Option(None, "--config", help="TOML config file")
SeedOption = typer.Option(None, "--seed", help="Seed for classifier training and simulation")
OutOption = typer.Option(None, "--out", help="Output directory")
OutlinesOption = typer.Option(None, "--outlines", help="Directory of <lake>.txt outlines")


def print_banner() -> None:
    """Print lakeice banner"""
    banner = f"""
╭─────────────────────────────────────────────────────╮
│                                                     │
│      lakeice {__version__:<39}│
│      Lake ice phenology from satellite pixels       │
│                                                     │
╰─────────────────────────────────────────────────────╯
"""
    console.print(Panel(banner, style="bold cyan"))


@contextmanager
def _guard() -> Iterator[None]:
    """Map failures to a one-line diagnostic and exit status 1 (validation) or 2 (I/O)"""
    try:
        yield
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        console.print(f"[bold red]Error:[/bold red] {where}: {first['msg']}")
        raise typer.Exit(1) from e
    except LakeIceError as e:
        console.print(f"[bold red]Error:[/bold red] {str(e).splitlines()[0]}")
        raise typer.Exit(1) from e
    except OSError as e:
        console.print(f"[bold red]I/O error:[/bold red] {e}")
        raise typer.Exit(2) from e


def _load(
    config_path: Path | None, seed: int | None, out: Path | None, **overrides: Any
) -> PipelineConfig:
    """Config file plus flag overrides; also installs logging"""
    dotted = {key.replace("__", "."): value for key, value in overrides.items()}
    if seed is not None:
        dotted["classifier.seed"] = seed
        dotted["synth.seed"] = seed
    dotted["paths.output_dir"] = out
    settings = PipelineConfig.load(config_path, dotted)
    setup_logging(settings.runtime.log_level, settings.runtime.debug)
    return settings


def _read_samples(settings: PipelineConfig) -> tuple[Path, list[PixelSample]]:
    """Samples CSV, restricted to clean pixels when outlines are configured"""
    samples_path = require_file(settings.paths.samples, "samples")
    rows = parse_samples_csv(samples_path)
    return samples_path, LakeIcePipeline(settings).clean_samples(rows)


def _finish(
    command: str, settings: PipelineConfig, inputs: list[Path], outputs: list[Path]
) -> None:
    out_dir = settings.paths.output_dir
    write_manifest(out_dir, command, settings, inputs, outputs)
    for path in outputs:
        console.print(f"  [dim]→ {path}[/dim]")


@app.command()
def train(
    samples: Path | None = typer.Option(None, help="Samples CSV"),
    cost: float | None = typer.Option(None, help="SVM cost C (default 0.1)"),
    max_samples: int | None = typer.Option(None, help="Cap on training samples"),
    outlines: Path | None = OutlinesOption,
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Fit the pixel classifier and write model.json
    """
    with _guard():
        settings = _load(
            config,
            seed,
            out,
            paths__samples=samples,
            classifier__cost=cost,
            classifier__max_train_samples=max_samples,
            paths__outlines=outlines,
        )
        samples_path, rows = _read_samples(settings)
        model = LakeIcePipeline(settings).train(rows)
        model_path = save_model(settings.paths.output_dir / "model.json", model)
        _finish("train", settings, [samples_path], [model_path])


@app.command()
def classify(
    model: Path | None = typer.Option(None, help="Model JSON from train"),
    samples: Path | None = typer.Option(None, help="Samples CSV"),
    outlines: Path | None = OutlinesOption,
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Predict frozen / non_frozen for every clear pixel
    """
    with _guard():
        settings = _load(
            config, seed, out, paths__model=model, paths__samples=samples, paths__outlines=outlines
        )
        model_path = require_file(settings.paths.model, "model")
        linear_model = load_model(model_path)
        samples_path, rows = _read_samples(settings)
        predictions = LakeIcePipeline(settings).classify(linear_model, rows)
        path = write_predictions_csv(settings.paths.output_dir / "predictions.csv", predictions)
        console.print(f"[green]✓[/green] Classified {len(predictions)} pixels")
        _finish("classify", settings, [model_path, samples_path], [path])


@app.command()
def timeline(
    predictions: Path | None = typer.Option(None, help="Predictions CSV from classify"),
    min_cloud_free: float | None = typer.Option(None, help="Admission threshold (default 0.30)"),
    sigma: float | None = typer.Option(None, help="Smoothing sigma in days (default 0.6)"),
    window: float | None = typer.Option(None, help="Smoothing window width in days (default 3)"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Build raw and smoothed per-winter timelines
    """
    with _guard():
        settings = _load(
            config,
            seed,
            out,
            paths__predictions=predictions,
            timeline__min_cloud_free=min_cloud_free,
            timeline__sigma_days=sigma,
            timeline__window_days=window,
        )
        predictions_path = require_file(settings.paths.predictions, "predictions")
        rows = parse_predictions_csv(predictions_path)
        raw, smoothed = asyncio.run(LakeIcePipeline(settings).build_timelines(rows))
        path = write_timeline_csv(settings.paths.output_dir / "timeline.csv", [*raw, *smoothed])
        _finish("timeline", settings, [predictions_path], [path])


@app.command()
def phenology(
    timeline: Path | None = typer.Option(None, help="Timeline CSV"),
    overrides: Path | None = typer.Option(None, help="Manual corrections YAML"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Fit FUS, FUE, BUS and BUE per lake-winter
    """
    with _guard():
        settings = _load(config, seed, out, paths__timeline=timeline, paths__overrides=overrides)
        timeline_path = require_file(settings.paths.timeline, "timeline")
        if settings.paths.overrides is not None:
            require_file(settings.paths.overrides, "overrides")
        timelines = parse_timeline_csv(timeline_path)
        records = asyncio.run(LakeIcePipeline(settings).fit_records(timelines))
        path = write_phenology_json(settings.paths.output_dir / "phenology.json", records)
        inputs = [timeline_path] + ([settings.paths.overrides] if settings.paths.overrides else [])
        _finish("phenology", settings, inputs, [path])


@app.command()
def trends(
    phenology: Path | None = typer.Option(None, help="Phenology JSON"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Per-event linear trends in days per annum
    """
    with _guard():
        settings = _load(config, seed, out, paths__phenology=phenology)
        phenology_path = require_file(settings.paths.phenology, "phenology")
        results = LakeIcePipeline(settings).trends(read_phenology_json(phenology_path))
        path = write_trends_csv(settings.paths.output_dir / "trends.csv", results)

        table = Table(title="LIP trends (d/a)")
        for column in ("lake", "event", "slope", "winters", "corrected"):
            table.add_column(column)
        for t in results:
            table.add_row(
                t.lake_id,
                t.event.value,
                f"{t.slope_d_per_a:+.2f}",
                str(t.n_winters),
                "✓" if t.corrected else "✗",
            )
        console.print(table)
        _finish("trends", settings, [phenology_path], [path])


@app.command()
def correlate(
    phenology: Path | None = typer.Option(None, help="Phenology JSON"),
    meteo: Path | None = typer.Option(None, help="Station weather CSV"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Correlate LIP events with winter climate indicators
    """
    with _guard():
        settings = _load(config, seed, out, paths__phenology=phenology, paths__meteo=meteo)
        phenology_path = require_file(settings.paths.phenology, "phenology")
        meteo_path = require_file(settings.paths.meteo, "meteo")
        records = read_phenology_json(phenology_path)
        entries, indicators = LakeIcePipeline(settings).correlate(
            records, parse_meteo_stations(meteo_path)
        )
        out_dir = settings.paths.output_dir
        outputs = [write_correlations_csv(out_dir / "correlations.csv", entries)]
        for lake_id, winters in indicators.items():
            outputs.append(write_indicators_csv(out_dir / f"indicators_{lake_id}.csv", winters))
        available = sum(e.r is not None for e in entries)
        console.print(f"[green]✓[/green] {available} of {len(entries)} correlations available")
        _finish("correlate", settings, [phenology_path, meteo_path], outputs)


@app.command()
def compare(
    timeline: Path | None = typer.Option(None, help="Timeline CSV (first result set)"),
    other: Path | None = typer.Option(None, help="Timeline CSV (second result set)"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Per-winter mean absolute difference of two frozen-percentage series
    """
    with _guard():
        settings = _load(
            config, seed, out, paths__timeline=timeline, paths__compare_timeline=other
        )
        first = require_file(settings.paths.timeline, "timeline")
        second = require_file(settings.paths.compare_timeline, "comparison timeline")
        summaries = LakeIcePipeline.compare(parse_timeline_csv(first), parse_timeline_csv(second))
        path = write_mad_csv(settings.paths.output_dir / "mad.csv", summaries)
        for lake_id, summary in summaries.items():
            console.print(f"  {lake_id}: MAD {summary.mean:.2f} ± {summary.std:.2f}")
        _finish("compare", settings, [first, second], [path])


@app.command()
def simulate(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Generate a ground-truthed synthetic dataset
    """
    with _guard():
        settings = _load(config, seed, out)
        dataset = asyncio.run(LakeIcePipeline(settings).simulate(settings.paths.output_dir))
        console.print(f"[green]✓[/green] Simulated {len(dataset.truths)} lake-winters")
        outputs = [
            dataset.samples_path,
            dataset.meteo_path,
            *dataset.truth_paths,
            *dataset.outline_paths,
        ]
        console.print(f"  [dim]→ {dataset.out_dir}[/dim]")
        write_manifest(settings.paths.output_dir, "simulate", settings, [], outputs)


def _report_context(
    meteo_path: Path | None, truth_dir: Path | None
) -> tuple[list[Path], dict[str, ClimateSeries] | None, list[SynthTruth] | None]:
    """Parse the optional weather and truth inputs; returns (inputs, stations, truths)"""
    inputs: list[Path] = []
    stations = None
    if meteo_path is not None:
        stations = parse_meteo_stations(require_file(meteo_path, "meteo"))
        inputs.append(meteo_path)
    truths = None
    if truth_dir is not None:
        if not truth_dir.is_dir():
            raise MissingInputError(f"Missing input: truth directory not found: {truth_dir}")
        truths = load_truths(truth_dir)
    return inputs, stations, truths


def _build_report(
    settings: PipelineConfig,
    records: list[PhenologyRecord],
    stations: dict[str, ClimateSeries] | None,
    truths: list[SynthTruth] | None,
) -> tuple[list[TrendResult], list[CorrelationEntry] | None, ReportSummary]:
    pipeline = LakeIcePipeline(settings)
    correlations = pipeline.correlate(records, stations)[0] if stations is not None else None
    return pipeline.trends(records), correlations, build_summary(records, truths)


def _write_report(
    settings: PipelineConfig,
    records: list[PhenologyRecord],
    timelines: list[WinterTimeline],
    tables: tuple[list[TrendResult], list[CorrelationEntry] | None, ReportSummary],
) -> list[Path]:
    """Write the report directory from already validated tables"""
    trend_rows, correlations, summary = tables
    report_dir = settings.paths.output_dir / "report"
    outputs = [
        write_phenology_summary(report_dir / "phenology_summary.csv", records),
        write_trends_csv(report_dir / "trends.csv", trend_rows),
        write_summary_json(report_dir / "summary.json", summary),
    ]
    if correlations is not None:
        outputs.append(write_correlations_csv(report_dir / "correlations.csv", correlations))

    raw = {(tl.lake_id, tl.season.id): tl for tl in timelines if not tl.smoothed}
    smooth = {(tl.lake_id, tl.season.id): tl for tl in timelines if tl.smoothed}
    for record in records:
        key = (record.lake_id, record.season.id)
        if key in raw and raw[key].points:
            outputs.append(
                write_svg_timeline(
                    report_dir / "figures" / f"{key[0]}_{key[1]}.svg",
                    raw[key],
                    record,
                    smooth.get(key),
                )
            )
    return outputs


@app.command()
def report(
    phenology: Path | None = typer.Option(None, help="Phenology JSON"),
    timeline: Path | None = typer.Option(None, help="Timeline CSV, enables figures"),
    meteo: Path | None = typer.Option(None, help="Station weather CSV, enables correlations"),
    truth_dir: Path | None = typer.Option(None, help="Synthetic truth directory, enables scores"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Summary tables, figures and summary.json
    """
    with _guard():
        settings = _load(
            config,
            seed,
            out,
            paths__phenology=phenology,
            paths__timeline=timeline,
            paths__meteo=meteo,
            paths__truth_dir=truth_dir,
        )
        phenology_path = require_file(settings.paths.phenology, "phenology")
        records = read_phenology_json(phenology_path)
        inputs = [phenology_path]
        timelines: list[WinterTimeline] = []
        if settings.paths.timeline is not None:
            timelines = parse_timeline_csv(require_file(settings.paths.timeline, "timeline"))
            inputs.append(settings.paths.timeline)
        context_inputs, stations, truths = _report_context(
            settings.paths.meteo, settings.paths.truth_dir
        )
        tables = _build_report(settings, records, stations, truths)
        outputs = _write_report(settings, records, timelines, tables)
        console.print(f"[green]✓[/green] Report written to {settings.paths.output_dir / 'report'}")
        write_manifest(
            settings.paths.output_dir, "report", settings, inputs + context_inputs, outputs
        )


@app.command()
def run(
    samples: Path | None = typer.Option(None, help="Samples CSV"),
    meteo: Path | None = typer.Option(None, help="Station weather CSV"),
    truth_dir: Path | None = typer.Option(None, help="Synthetic truth directory"),
    outlines: Path | None = OutlinesOption,
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Full pipeline: train, classify, timeline, phenology and report
    """
    print_banner()
    with _guard():
        settings = _load(
            config,
            seed,
            out,
            paths__samples=samples,
            paths__meteo=meteo,
            paths__truth_dir=truth_dir,
            paths__outlines=outlines,
        )
        samples_path, rows = _read_samples(settings)
        context_inputs, stations, truths = _report_context(
            settings.paths.meteo, settings.paths.truth_dir
        )
        pipeline = LakeIcePipeline(settings)
        model = pipeline.train(rows)
        predictions = pipeline.classify(model, rows)
        raw, smoothed = asyncio.run(pipeline.build_timelines(predictions))
        records = asyncio.run(pipeline.fit_records(smoothed))
        tables = _build_report(settings, records, stations, truths)

        out_dir = settings.paths.output_dir
        outputs = [
            save_model(out_dir / "model.json", model),
            write_predictions_csv(out_dir / "predictions.csv", predictions),
            write_timeline_csv(out_dir / "timeline.csv", [*raw, *smoothed]),
            write_phenology_json(out_dir / "phenology.json", records),
        ]
        outputs += _write_report(settings, records, [*raw, *smoothed], tables)
        console.print("\n[bold green]✅ Pipeline complete![/bold green]")
        _finish("run", settings, [samples_path, *context_inputs], outputs)


def _split_plan(split: SplitKind, k: int, seed: int) -> SplitPlan:
    return SplitPlan(kind=split, k=k, seed=seed)


@app.command()
def evaluate(
    samples: Path | None = typer.Option(None, help="Samples CSV"),
    split: SplitKind = typer.Option(SplitKind.K_FOLD, help="Split strategy"),
    k: int = typer.Option(4, help="Folds for k_fold"),
    cost: float | None = typer.Option(None, help="SVM cost C"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Cross-validate the classifier (mAcc / mIoU per fold)
    """
    with _guard():
        settings = _load(config, seed, out, paths__samples=samples, classifier__cost=cost)
        samples_path, rows = _read_samples(settings)
        plan = _split_plan(split, k, settings.classifier.seed)
        result = asyncio.run(LakeIcePipeline(settings).evaluate(rows, plan))
        path = atomic_write_text(
            settings.paths.output_dir / f"evaluation_{split.value}.json",
            result.model_dump_json(indent=2) + "\n",
        )

        table = Table(title=f"{result.classifier} / {split.value}")
        for column in ("fold", "train", "test", "mAcc", "mIoU"):
            table.add_column(column)
        for fold in result.folds:
            table.add_row(
                fold.name,
                str(fold.n_train),
                str(fold.n_test),
                f"{fold.m_acc:.1f}",
                f"{fold.m_iou:.1f}",
            )
        table.add_row("mean", "", "", f"{result.mean_m_acc:.1f}", f"{result.mean_m_iou:.1f}")
        console.print(table)
        _finish("evaluate", settings, [samples_path], [path])


@app.command("grid-search")
def grid_search(
    samples: Path | None = typer.Option(None, help="Samples CSV"),
    costs: list[float] | None = typer.Option(None, "--cost", help="Candidate cost (repeatable)"),
    k: int = typer.Option(4, help="Folds"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Pick the SVM cost with the best 4-fold mAcc
    """
    with _guard():
        settings = _load(
            config, seed, out, paths__samples=samples, classifier__grid_costs=costs or None
        )
        samples_path, rows = _read_samples(settings)
        plan = _split_plan(SplitKind.K_FOLD, k, settings.classifier.seed)
        result = LakeIcePipeline(settings).grid_search(rows, plan)
        path = atomic_write_text(
            settings.paths.output_dir / "grid_search.json", result.model_dump_json(indent=2) + "\n"
        )

        table = Table(title="Cost grid")
        for column in ("cost", "mAcc", "mIoU", ""):
            table.add_column(column)
        for row in result.table:
            best = "✓" if row.cost == result.best_cost else ""
            table.add_row(f"{row.cost:g}", f"{row.mean_m_acc:.2f}", f"{row.mean_m_iou:.2f}", best)
        console.print(table)
        _finish("grid-search", settings, [samples_path], [path])


@app.command("show-config")
def show_config(
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
):
    """
    Show current configuration
    """
    print_banner()
    with _guard():
        settings = _load(config, seed, out)

    console.print("\n[bold]Current Configuration:[/bold]\n")

    console.print("[bold cyan]Paths:[/bold cyan]")
    for name, value in settings.paths.model_dump().items():
        console.print(f"  {name}: {value if value is not None else '[dim]-[/dim]'}")

    console.print("\n[bold cyan]Classifier:[/bold cyan]")
    console.print(f"  Name: {settings.classifier.name}")
    console.print(f"  Cost: {settings.classifier.cost}")
    console.print(f"  Seed: {settings.classifier.seed}")
    console.print(f"  Grid: {', '.join(f'{c:g}' for c in settings.classifier.grid_costs)}")
    console.print(f"  Auxiliary months: {'✓' if settings.classifier.auxiliary_months else '✗'}")

    console.print("\n[bold cyan]Timeline:[/bold cyan]")
    console.print(f"  Min cloud-free: {settings.timeline.min_cloud_free:.0%}")
    console.print(f"  Smoothing sigma: {settings.timeline.sigma_days} d")
    console.print(f"  Smoothing window: {settings.timeline.window_days} d")
    console.print(f"  Min clean pixels: {settings.timeline.min_clean_pixels}")

    console.print("\n[bold cyan]Phenology:[/bold cyan]")
    prior = settings.prior
    console.print(
        f"  Prior means: FUS {prior.mu_fus}, FUE {prior.mu_fue}, BUS {prior.mu_bus}, BUE {prior.mu_bue}"
    )
    console.print(f"  Prior sigma: {prior.sigma_days} d")
    console.print(f"  Huber phi: {settings.phenology.huber_phi}")
    excluded = settings.phenology.excluded_lakes
    console.print(f"  Excluded lakes: {', '.join(excluded) if excluded else '[dim]none[/dim]'}")

    console.print("\n[bold cyan]Runtime:[/bold cyan]")
    console.print(f"  Sensor: {settings.sensor.value}")
    console.print(f"  Max Parallel Workers: {settings.runtime.max_parallel_workers}")
    console.print(f"  Log level: {settings.runtime.log_level}")


if __name__ == "__main__":
    app()
