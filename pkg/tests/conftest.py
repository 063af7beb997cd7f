"""
Shared fixtures for the lakeice test suite
"""

from collections.abc import Callable
from datetime import date, timedelta

import numpy as np
import pytest

from lakeice.core.config import SynthConfig
from lakeice.core.models import PixelLabel, PixelSample, TimelinePoint, WinterTimeline
from lakeice.core.seasons import WinterSeason, day_of_winter


@pytest.fixture
def season() -> WinterSeason:
    """Non-leap winter 2016-17"""
    return WinterSeason(start_year=2016)


@pytest.fixture
def make_timeline() -> Callable[..., WinterTimeline]:
    """Build a timeline from (day index | date, nf percent) pairs"""

    def make(
        points: list[tuple[int | date, float]],
        lake_id: str = "sils",
        start_year: int = 2003,
        smoothed: bool = False,
    ) -> WinterTimeline:
        season = WinterSeason(start_year=start_year)
        out = []
        for day, nf in points:
            index = day_of_winter(day, season) if isinstance(day, date) else day
            out.append(TimelinePoint(day=index, nf_percent=nf, cloud_free=1.0, n_pixels=10))
        return WinterTimeline(lake_id=lake_id, season=season, points=out, smoothed=smoothed)

    return make


def cluster_samples(
    rng: np.random.Generator,
    n_per_class: int,
    lakes: tuple[str, ...] = ("sils", "silvaplana"),
    winters: tuple[int, ...] = (2010, 2011),
    n_bands: int = 3,
    offset: float = 3.0,
    spread: float = 0.3,
) -> list[PixelSample]:
    """Two well-separated Gaussian clusters, balanced per lake and winter"""
    samples = []
    for lake_id in lakes:
        for year in winters:
            first = date(year, 12, 1)
            for i in range(n_per_class):
                for label, sign in ((PixelLabel.FROZEN, 1.0), (PixelLabel.NON_FROZEN, -1.0)):
                    bands = sign * offset + spread * rng.standard_normal(n_bands)
                    samples.append(
                        PixelSample(
                            lake_id=lake_id,
                            date=first + timedelta(days=i),
                            pixel_id=0 if label is PixelLabel.FROZEN else 1,
                            bands=tuple(float(b) for b in bands),
                            label=label,
                        )
                    )
    return samples


@pytest.fixture
def separable_samples() -> list[PixelSample]:
    """Linearly separable labelled samples over two lakes and two winters"""
    return cluster_samples(np.random.default_rng(7), n_per_class=10)


@pytest.fixture
def tiny_synth() -> SynthConfig:
    """A synthetic dataset small enough for CLI round trips"""
    return SynthConfig(lake_sizes={"a": 6, "b": 4}, winters=[2010, 2011, 2012], n_bands=4)
