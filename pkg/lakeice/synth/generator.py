"""
Ground-truthed synthetic dataset generator

Each lake-winter follows a "U with wings" frozen-fraction curve whose
breakpoints are drawn from the phenology prior. Per-pixel band vectors come
from two diagonal Gaussian clusters (open water, ice) plus a bright cloud
cluster. The true LIP dates are the threshold-crossing days of the realised,
cloud-free daily frozen fraction, i.e. what a perfect classifier on a
cloudless lake would report.

Randomness is drawn from a sub-seed of (seed, lake, winter), so every winter
is reproducible on its own and independent of generation order.
"""

import logging
import math
import zlib
from collections.abc import Callable, Sequence
from datetime import date
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, ValidationError

from lakeice.core.config import PriorConfig, SynthConfig
from lakeice.core.exceptions import SynthesisError
from lakeice.core.files import atomic_write_text
from lakeice.core.models import (
    MAX_TRANSITION_DAYS,
    ClimateSeries,
    DailyWeather,
    PixelLabel,
    PixelSample,
    SynthTruth,
)
from lakeice.core.seasons import WinterSeason, date_of
from lakeice.ingest.outlines import write_outline
from lakeice.ingest.tables import format_samples_csv, write_meteo_csv, write_samples_csv
from lakeice.phenology.candidates import HIGH_THRESHOLD, LOW_THRESHOLD
from lakeice.phenology.model import model_nf_array
from lakeice.synth.layout import LakeLayout, lake_layout

logger = logging.getLogger(__name__)

MAX_DRAWS = 10_000
BAND_DECIMALS = 4

# climate link: MWT = intercept - slope * CFD
MWT_INTERCEPT_C = 4.0
MWT_PER_CFD_DAY = 0.05
SEASONAL_AMPLITUDE_C = 9.0
DAILY_TEMPERATURE_STD_C = 2.0
COLDEST_DAY = 140  # mid January


class SynthWinter(BaseModel):
    """Samples and truth of one synthetic lake-winter"""

    model_config = ConfigDict(frozen=True)

    samples: tuple[PixelSample, ...]
    truth: SynthTruth

    def samples_csv(self) -> str:
        return format_samples_csv(list(self.samples))


class SynthDataset(BaseModel):
    out_dir: Path
    samples_path: Path
    meteo_path: Path
    truth_paths: list[Path]
    outline_paths: list[Path]
    truths: list[SynthTruth]


def sub_seed(seed: int, lake_id: str, start_year: int, stream: str = "") -> np.random.SeedSequence:
    """Deterministic per-(seed, lake, winter) seed sequence"""
    return np.random.SeedSequence([seed, zlib.crc32(f"{stream}{lake_id}".encode()), start_year])


def min_clear_pixels(n_pixels: int, threshold: float = 0.30) -> int:
    """Smallest k with k / n_pixels >= threshold"""
    return next(k for k in range(n_pixels + 1) if k / n_pixels >= threshold)


def threshold_crossings(frozen_pct: Sequence[float]) -> tuple[int, int, int, int] | None:
    """
    Event days of a complete daily frozen-percentage series.

    Returns:
        (FUS, FUE, BUS, BUE), or None if an event never occurs
    """

    def first(start: int, hit: Callable[[float, float], bool]) -> int | None:
        for t in range(max(start, 1), len(frozen_pct)):
            if hit(frozen_pct[t], frozen_pct[t - 1]):
                return t
        return None

    fus = first(1, lambda cur, prev: cur >= LOW_THRESHOLD > prev)
    fue = first(1, lambda cur, prev: cur >= HIGH_THRESHOLD > prev)
    if fus is None or fue is None:
        return None
    bus = first(fue, lambda cur, prev: 100.0 - cur >= LOW_THRESHOLD > 100.0 - prev)
    bue = first(fue, lambda cur, prev: 100.0 - cur >= HIGH_THRESHOLD > 100.0 - prev)
    if bus is None or bue is None:
        return None
    return fus, fue, bus, bue


def _draw_shape(
    rng: np.random.Generator, prior: PriorConfig, season: WinterSeason
) -> tuple[int, int, int, int] | None:
    raw = rng.normal(prior.means(season), prior.sigma_days)
    fus, fue, bus, bue = sorted(int(v) for v in np.clip(np.rint(raw), 1, season.length - 2))
    if fue - fus > MAX_TRANSITION_DAYS or bue - bus > MAX_TRANSITION_DAYS or bus <= fue:
        return None
    return fus, fue, bus, bue


def _frozen_counts(
    rng: np.random.Generator, shape: tuple[int, int, int, int], length: int, n: int, noise: float
) -> NDArray[np.int64]:
    frozen = 100.0 - model_nf_array(np.arange(length), shape)
    ramp = (frozen > 0.0) & (frozen < 100.0)
    jitter = rng.uniform(-noise, noise, size=length)
    frozen = np.where(ramp, np.clip(frozen + jitter, 0.5, 99.5), frozen)
    return np.rint(frozen / 100.0 * n).astype(np.int64)


def generate_truth(
    cfg: SynthConfig,
    lake_id: str,
    n_pixels: int,
    season: WinterSeason,
    rng: np.random.Generator,
    prior: PriorConfig | None = None,
) -> tuple[SynthTruth, NDArray[np.int64]]:
    """
    Draw the frozen-fraction curve of one winter.

    Returns:
        Truth record and the number of frozen clean pixels per day

    Raises:
        SynthesisError: If no admissible curve is found within MAX_DRAWS draws
    """
    prior = prior or PriorConfig()
    for _ in range(MAX_DRAWS):
        shape = _draw_shape(rng, prior, season)
        if shape is None:
            continue
        counts = _frozen_counts(rng, shape, season.length, n_pixels, cfg.fraction_noise)
        fractions = counts / n_pixels
        events = threshold_crossings((100.0 * counts / n_pixels).tolist())
        if events is None:
            continue
        try:
            truth = SynthTruth(
                lake_id=lake_id,
                winter=season.id,
                fus=events[0],
                fue=events[1],
                bus=events[2],
                bue=events[3],
                shape_dates=shape,
                daily_frozen_fraction=fractions.tolist(),
            )
        except ValidationError:
            continue
        return truth, counts
    raise SynthesisError(
        f"No admissible ice season for {lake_id} {season.id} after {MAX_DRAWS} draws"
    )


def generate_winter(
    cfg: SynthConfig,
    lake_id: str,
    season: WinterSeason,
    n_pixels: int | None = None,
    prior: PriorConfig | None = None,
    seed: int | None = None,
) -> SynthWinter:
    """
    Synthesize one lake-winter of daily clean-pixel samples.

    Only cloud-free pixels on non-transition days carry a label; label noise
    flips those labels without touching the band vectors. Cloudy days keep
    fewer cloud-free pixels than the 30% admission threshold; a share of them
    (cloud_fn_rate) is flagged clear although the cloudy pixels carry bright
    cloud spectra. Other days have at most max_partial_cover of the pixels
    under cloud.
    """
    n = n_pixels if n_pixels is not None else cfg.lake_sizes[lake_id]
    base_seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(sub_seed(base_seed, lake_id, season.start_year))
    truth, counts = generate_truth(cfg, lake_id, n, season, rng, prior)
    layout = lake_layout(lake_id, n)

    k = cfg.n_bands
    step = cfg.class_separation / math.sqrt(k)
    water_mean = np.zeros(k)
    ice_mean = np.full(k, step)
    cloud_mean = np.full(k, 1.5 * step)
    need = min_clear_pixels(n)

    samples: list[PixelSample] = []
    for day_index in range(season.length):
        day = date_of(day_index, season)
        frozen = np.zeros(n, dtype=bool)
        frozen[rng.permutation(n)[: counts[day_index]]] = True

        if rng.random() < cfg.cloud_rate:
            n_clear = int(rng.integers(0, need))
            missed = bool(rng.random() < cfg.cloud_fn_rate)
        else:
            lowest = max(need, n - math.floor(cfg.max_partial_cover * n))
            n_clear = int(rng.integers(lowest, n + 1))
            missed = False
        covered = np.ones(n, dtype=bool)
        covered[rng.permutation(n)[:n_clear]] = False
        flagged = np.zeros(n, dtype=bool) if missed else covered

        surface = np.where(frozen[:, None], ice_mean, water_mean)
        means = np.where(covered[:, None], cloud_mean, surface)
        bands = np.round(means + rng.standard_normal((n, k)), BAND_DECIMALS)

        settled = counts[day_index] in (0, n)
        flips = rng.random(n) < cfg.label_noise
        for p in range(n):
            label = PixelLabel.UNLABELED
            if settled and not flagged[p]:
                is_frozen = bool(frozen[p]) != bool(flips[p])
                label = PixelLabel.FROZEN if is_frozen else PixelLabel.NON_FROZEN
            samples.append(
                PixelSample(
                    lake_id=lake_id,
                    date=day,
                    pixel_id=layout.pixel_ids[p],
                    cloudy=bool(flagged[p]),
                    label=label,
                    bands=tuple(float(b) for b in bands[p]),
                )
            )
    return SynthWinter(samples=tuple(samples), truth=truth)


def generate_climate(cfg: SynthConfig, lake_id: str, truths: Sequence[SynthTruth]) -> ClimateSeries:
    """
    Daily weather of one lake's station.

    The winter mean temperature is MWT_INTERCEPT_C - MWT_PER_CFD_DAY * CFD of
    the true ice season, plus climate_noise; a zero-mean seasonal cycle and
    daily noise ride on top.
    """
    records: dict[date, DailyWeather] = {}
    for truth in sorted(truths, key=lambda t: t.winter):
        season = truth.season
        rng = np.random.default_rng(sub_seed(cfg.seed, lake_id, season.start_year, stream="meteo:"))
        days = np.arange(season.length)
        cycle = -SEASONAL_AMPLITUDE_C * np.cos(2.0 * np.pi * (days - COLDEST_DAY) / 365.0)
        offset = MWT_INTERCEPT_C - MWT_PER_CFD_DAY * truth.cfd_days
        if cfg.climate_noise > 0:
            offset += cfg.climate_noise * rng.standard_normal()
        weather = rng.normal(0.0, DAILY_TEMPERATURE_STD_C, size=season.length)
        temps = offset + (cycle - cycle.mean()) + (weather - weather.mean())

        daylight = 5.0 + 2.0 * np.cos(2.0 * np.pi * (days - 300) / 365.0)
        sunny = np.clip(rng.normal(daylight, 2.0), 0.0, 12.0)
        rain = rng.gamma(0.6, 4.0, size=season.length)
        wind = rng.gamma(4.0, 3.0, size=season.length)
        for t in days:
            records[date_of(int(t), season)] = DailyWeather(
                tmean_c=float(temps[t]),
                precip_mm=round(float(rain[t]), 1),
                sunshine_h=round(float(sunny[t]), 1),
                wind_kmh=round(float(wind[t]), 1),
            )
    return ClimateSeries(station_id=lake_id, records=records)


def plan_winters(cfg: SynthConfig) -> list[tuple[str, WinterSeason]]:
    """(lake, winter) pairs of a dataset in output order"""
    return [
        (lake_id, WinterSeason(start_year=year))
        for lake_id in sorted(cfg.lake_sizes)
        for year in sorted(cfg.winters)
    ]


def write_dataset(cfg: SynthConfig, winters: Sequence[SynthWinter], out_dir: Path) -> SynthDataset:
    """Write samples, weather, truth and outline files of generated winters"""
    ordered = sorted(winters, key=lambda w: (w.truth.lake_id, w.truth.winter))
    samples = [s for w in ordered for s in w.samples]
    truths = [w.truth for w in ordered]

    samples_path = write_samples_csv(out_dir / "samples.csv", samples)
    lakes = sorted({t.lake_id for t in truths})
    stations = [
        generate_climate(cfg, lake, [t for t in truths if t.lake_id == lake]) for lake in lakes
    ]
    meteo_path = write_meteo_csv(out_dir / "meteo.csv", stations)

    truth_paths = [
        atomic_write_text(
            out_dir / "truth" / f"{t.lake_id}_{t.winter}.json", t.model_dump_json(indent=2) + "\n"
        )
        for t in truths
    ]
    layouts: list[LakeLayout] = [lake_layout(lake, cfg.lake_sizes[lake]) for lake in lakes]
    outline_paths = [
        write_outline(out_dir / "outlines" / f"{layout.lake_id}.txt", layout.outline)
        for layout in layouts
    ]
    logger.info(
        "Wrote %d samples, %d truth records for %d lakes to %s",
        len(samples),
        len(truths),
        len(lakes),
        out_dir,
    )
    return SynthDataset(
        out_dir=out_dir,
        samples_path=samples_path,
        meteo_path=meteo_path,
        truth_paths=truth_paths,
        outline_paths=outline_paths,
        truths=truths,
    )


def generate_dataset(
    cfg: SynthConfig, out_dir: Path, prior: PriorConfig | None = None
) -> SynthDataset:
    """
    Generate every configured lake x winter and write the dataset.

    Layout of out_dir: samples.csv, meteo.csv (one station per lake, named
    after it), truth/<lake>_<winter>.json and outlines/<lake>.txt.
    """
    winters = [
        generate_winter(cfg, lake, season, prior=prior) for lake, season in plan_winters(cfg)
    ]
    return write_dataset(cfg, winters, out_dir)


def load_truths(truth_dir: Path) -> list[SynthTruth]:
    """Read every truth JSON in a directory, sorted by lake and winter"""
    truths = [
        SynthTruth.model_validate_json(p.read_text(encoding="utf-8"))
        for p in sorted(truth_dir.glob("*.json"))
    ]
    return sorted(truths, key=lambda t: (t.lake_id, t.winter))
