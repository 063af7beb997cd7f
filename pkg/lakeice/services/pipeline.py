"""
Lake ice pipeline - runs the stages over lakes and winters

Independent work items (lake-winter timelines, phenology fits, evaluation
folds, synthetic winters) run concurrently in worker threads, bounded by
runtime.max_parallel_workers. Results come back in submission order, which is
always sorted by key, so outputs do not depend on scheduling.
"""

import asyncio
import logging
from collections.abc import Callable, Iterable, Mapping, Sequence
from pathlib import Path
from typing import TypeVar

from lakeice.classify.evaluation import (
    EvaluationReport,
    GridSearchResult,
    grid_search,
    plan_folds,
    run_fold,
    summarize,
)
from lakeice.classify.registry import Classifier, ClassifierRegistry
from lakeice.classify.training_sets import (
    auxiliary_training_set,
    subsample,
    usable_training_samples,
)
from lakeice.climate.comparison import MadSummary, frozen_series, mad_compare_winters
from lakeice.climate.correlation import correlate_events
from lakeice.climate.indicators import seasons_covered, winter_indicators
from lakeice.climate.statistics import event_trends
from lakeice.core.config import PipelineConfig
from lakeice.core.console import console
from lakeice.core.exceptions import (
    InsufficientDataError,
    InvalidInputError,
    MissingInputError,
    TrainingError,
)
from lakeice.core.models import (
    ClimateSeries,
    CorrelationEntry,
    LinearModel,
    PhenologyRecord,
    PixelLabel,
    PixelPrediction,
    PixelSample,
    SplitPlan,
    TrendResult,
    WinterIndicators,
    WinterTimeline,
)
from lakeice.core.seasons import WinterSeason
from lakeice.ingest.outlines import load_clean_pixels
from lakeice.ingest.sensors import SENSOR_PROFILES
from lakeice.phenology.fitting import fit_phenology
from lakeice.phenology.overrides import apply_override_file, load_overrides
from lakeice.synth.generator import SynthDataset, generate_winter, plan_winters, write_dataset
from lakeice.timeline.builder import (
    Acquisition,
    acquisitions_from_predictions,
    build_timeline,
    drop_small_lakes,
)
from lakeice.timeline.smoothing import gaussian_smooth

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class LakeIcePipeline:
    """
    Runs the lake ice stages with one PipelineConfig.

    Stages: train -> classify -> timelines -> phenology -> trends / correlate,
    plus compare, evaluate, grid search and simulate.
    """

    def __init__(self, config: PipelineConfig | None = None):
        self.config = config or PipelineConfig()

    @property
    def classifier(self) -> Classifier:
        cfg = self.config.classifier
        return ClassifierRegistry.get_classifier(
            cfg.name, cost=cfg.cost, seed=cfg.seed, max_epochs=cfg.max_epochs, tol=cfg.tol
        )

    async def _map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        """Run fn over items in worker threads with a concurrency limit"""
        semaphore = asyncio.Semaphore(self.config.runtime.max_parallel_workers)

        async def run_with_semaphore(item: T) -> R:
            async with semaphore:
                return await asyncio.to_thread(fn, item)

        return list(await asyncio.gather(*[run_with_semaphore(item) for item in items]))

    # classification

    def clean_samples(self, samples: Sequence[PixelSample]) -> list[PixelSample]:
        """
        Keep samples of clean pixels when paths.outlines is set.

        The outline directory holds one <lake>.txt per lake; a lake without an
        outline file is an error.
        """
        outline_dir = self.config.paths.outlines
        if outline_dir is None:
            return list(samples)
        if not outline_dir.is_dir():
            raise MissingInputError(f"Missing input: outline directory not found: {outline_dir}")
        profile = SENSOR_PROFILES[self.config.sensor]
        clean = load_clean_pixels(outline_dir, (s.lake_id for s in samples), profile.gsd_m)
        kept = [s for s in samples if s.pixel_id in clean[s.lake_id]]
        if len(kept) < len(samples):
            logger.info(
                "Dropped %d samples outside the clean pixels of the lake outlines",
                len(samples) - len(kept),
            )
        return kept

    def training_set(self, samples: Sequence[PixelSample]) -> list[PixelSample]:
        """Labelled clear samples, optionally augmented, capped at max_train_samples"""
        cfg = self.config.classifier
        pool = list(samples)
        if cfg.auxiliary_months:
            extra = auxiliary_training_set(s for s in samples if s.label is PixelLabel.UNLABELED)
            logger.info("Added %d auxiliary samples from Sep / Feb acquisitions", len(extra))
            pool.extend(extra)
        usable = usable_training_samples(pool)
        if not usable:
            raise TrainingError("No labelled, cloud-free samples to train on")
        chosen = subsample(usable, cfg.max_train_samples, cfg.seed)
        if len(chosen) < len(usable):
            logger.info("Training on %d of %d labelled samples", len(chosen), len(usable))
        return chosen

    def train(self, samples: Sequence[PixelSample]) -> LinearModel:
        training = self.training_set(samples)
        profile = SENSOR_PROFILES[self.config.sensor]
        if len(training[0].bands) != profile.n_bands:
            logger.warning(
                "Samples carry %d bands, %s delivers %d",
                len(training[0].bands),
                profile.sensor.value,
                profile.n_bands,
            )
        model = self.classifier.fit(training)
        console.print(
            f"[green]✓[/green] Trained {self.config.classifier.name} on {len(training)} samples "
            f"(cost={self.config.classifier.cost})"
        )
        return model

    def classify(self, model: LinearModel, samples: Sequence[PixelSample]) -> list[PixelPrediction]:
        """Predict every clear sample; cloudy samples get no prediction"""
        clear = [s for s in samples if not s.cloudy]
        labels = iter(self.classifier.predict(model, clear))
        return [
            PixelPrediction(
                lake_id=s.lake_id,
                date=s.date,
                pixel_id=s.pixel_id,
                cloudy=s.cloudy,
                prediction=None if s.cloudy else next(labels),
            )
            for s in samples
        ]

    # timelines and phenology

    async def build_timelines(
        self, predictions: Iterable[PixelPrediction]
    ) -> tuple[list[WinterTimeline], list[WinterTimeline]]:
        """
        Raw and smoothed timelines per lake-winter.

        Returns:
            (raw, smoothed), both sorted by lake and winter
        """
        cfg = self.config.timeline
        groups = drop_small_lakes(acquisitions_from_predictions(predictions), cfg.min_clean_pixels)
        keys = sorted(groups, key=lambda k: (k[0], k[1].start_year))

        def build(key: tuple[str, WinterSeason]) -> WinterTimeline:
            lake_id, season = key
            acquisitions: list[Acquisition] = groups[key]
            return build_timeline(acquisitions, season, cfg.min_cloud_free, lake_id=lake_id)

        raw = await self._map(build, keys)
        smoothed = await self._map(self.smooth, raw)
        console.print(f"[green]✓[/green] Built {len(raw)} winter timelines")
        return raw, smoothed

    def smooth(self, tl: WinterTimeline) -> WinterTimeline:
        cfg = self.config.timeline
        return gaussian_smooth(tl, sigma_days=cfg.sigma_days, window_days=cfg.window_days)

    async def fit_records(self, timelines: Sequence[WinterTimeline]) -> list[PhenologyRecord]:
        """
        Fit the LIP dates of every lake-winter.

        Smoothed timelines are used when present; raw ones are smoothed first.
        Excluded lakes are skipped and configured overrides applied.
        """
        smoothed = [tl for tl in timelines if tl.smoothed]
        if not smoothed:
            smoothed = [self.smooth(tl) for tl in timelines]

        excluded = set(self.config.phenology.excluded_lakes)
        for lake_id in sorted({tl.lake_id for tl in smoothed} & excluded):
            console.print(f"[yellow]⊘[/yellow] {lake_id} is excluded, skipping")
        work = sorted(
            (tl for tl in smoothed if tl.lake_id not in excluded),
            key=lambda tl: (tl.lake_id, tl.season.start_year),
        )

        prior, phi = self.config.prior, self.config.phenology.huber_phi
        records = await self._map(lambda tl: fit_phenology(tl, prior, phi), work)

        if self.config.paths.overrides is not None:
            records = apply_override_file(records, load_overrides(self.config.paths.overrides))

        complete = sum(r.complete for r in records)
        console.print(
            f"[green]✓[/green] Fitted {len(records)} lake-winters ({complete} complete)"
        )
        return records

    # climate

    def trends(self, records: Sequence[PhenologyRecord]) -> list[TrendResult]:
        """Corrected trends, then uncorrected ones when any record was overridden"""
        out = event_trends(records, corrected=True)
        if any(r.corrected for r in records):
            out += event_trends(records, corrected=False)
        return out

    @staticmethod
    def station_for(lake_id: str, stations: Mapping[str, ClimateSeries]) -> ClimateSeries:
        """The station named after the lake, or the only station"""
        if lake_id in stations:
            return stations[lake_id]
        if len(stations) == 1:
            return next(iter(stations.values()))
        raise InvalidInputError(
            f"No weather station for {lake_id} (stations: {', '.join(sorted(stations))})"
        )

    @staticmethod
    def indicators(series: ClimateSeries) -> dict[int, WinterIndicators]:
        """Indicators of every winter the series has records in"""
        return {
            season.start_year: winter_indicators(series, season)
            for season in seasons_covered(series)
        }

    def correlate(
        self, records: Sequence[PhenologyRecord], stations: Mapping[str, ClimateSeries]
    ) -> tuple[list[CorrelationEntry], dict[str, list[WinterIndicators]]]:
        """
        Correlation table per lake against its station's indicators.

        Returns:
            Entries sorted by lake, and the indicators used per lake
        """
        entries: list[CorrelationEntry] = []
        used: dict[str, list[WinterIndicators]] = {}
        for lake_id in sorted({r.lake_id for r in records}):
            indicators = self.indicators(self.station_for(lake_id, stations))
            entries += correlate_events([r for r in records if r.lake_id == lake_id], indicators)
            used[lake_id] = [indicators[year] for year in sorted(indicators)]
        return entries, used

    @staticmethod
    def compare(
        a: Sequence[WinterTimeline], b: Sequence[WinterTimeline]
    ) -> dict[str, MadSummary]:
        """Per-lake MAD between the raw frozen percentages of two result sets"""
        out = {}
        lakes_a = {tl.lake_id for tl in a if not tl.smoothed}
        lakes_b = {tl.lake_id for tl in b if not tl.smoothed}
        for lake_id in sorted(lakes_a ^ lakes_b):
            logger.warning("%s appears in only one of the compared result sets", lake_id)
        for lake_id in sorted(lakes_a & lakes_b):
            series_a = frozen_series([tl for tl in a if tl.lake_id == lake_id and not tl.smoothed])
            series_b = frozen_series([tl for tl in b if tl.lake_id == lake_id and not tl.smoothed])
            try:
                out[lake_id] = mad_compare_winters(series_a, series_b)
            except InsufficientDataError as e:
                logger.warning("%s: %s", lake_id, e)
        return out

    # evaluation

    async def evaluate(self, samples: Sequence[PixelSample], plan: SplitPlan) -> EvaluationReport:
        """Score the configured classifier with folds trained in parallel"""
        usable = usable_training_samples(samples)
        folds = plan_folds(usable, plan)
        classifier = self.classifier
        console.print(
            f"[cyan]⚙️  Running {len(folds)} {plan.kind.value} folds on {len(usable)} samples...[/cyan]"
        )
        results = await self._map(lambda fold: run_fold(fold, classifier), folds)
        return summarize(classifier.name, plan, results)

    def grid_search(self, samples: Sequence[PixelSample], plan: SplitPlan) -> GridSearchResult:
        cfg = self.config.classifier
        return grid_search(
            usable_training_samples(samples),
            cfg.grid_costs,
            plan,
            cfg.name,
            seed=cfg.seed,
            max_epochs=cfg.max_epochs,
            tol=cfg.tol,
        )

    # synthetic data

    async def simulate(self, out_dir: Path) -> SynthDataset:
        """Generate the configured synthetic lakes and winters into out_dir"""
        synth, prior = self.config.synth, self.config.prior
        pairs = plan_winters(synth)
        console.print(f"[cyan]⚙️  Generating {len(pairs)} synthetic lake-winters...[/cyan]")
        winters = await self._map(
            lambda pair: generate_winter(synth, pair[0], pair[1], prior=prior), pairs
        )
        return write_dataset(synth, winters, out_dir)
