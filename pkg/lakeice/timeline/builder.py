"""
Timeline construction from per-pixel classifications

An acquisition contributes one point when at least min_cloud_free of the
lake's clean pixels are cloud-free; its value is the non-frozen share of the
cloud-free clean pixels.
"""

import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from datetime import date

from pydantic import BaseModel, ConfigDict, Field, model_validator

from lakeice.core.exceptions import InvalidInputError, OutOfSeasonError
from lakeice.core.models import PixelLabel, PixelPrediction, TimelinePoint, WinterTimeline
from lakeice.core.seasons import WinterSeason, day_of_winter
from lakeice.ingest.rasters import CloudMask, cloud_free_fraction

logger = logging.getLogger(__name__)

DEFAULT_MIN_CLOUD_FREE = 0.30


class Acquisition(BaseModel):
    """One satellite overpass of one lake, reduced to its clean pixels"""

    model_config = ConfigDict(frozen=True)

    lake_id: str
    date: date
    n_clean: int = Field(..., ge=1)
    predictions: tuple[PixelLabel, ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "Acquisition":
        if len(self.predictions) > self.n_clean:
            raise ValueError("more predictions than clean pixels")
        if PixelLabel.UNLABELED in self.predictions:
            raise ValueError("predictions must be frozen or non_frozen")
        return self

    @property
    def cloud_free(self) -> float:
        return len(self.predictions) / self.n_clean

    @classmethod
    def from_mask(
        cls,
        lake_id: str,
        day: date,
        clean_pixels: Sequence[int],
        mask: CloudMask,
        labels: Mapping[int, PixelLabel],
    ) -> "Acquisition":
        """Build from a cloud mask and a pixel-id -> prediction map"""
        cloud_free_fraction(list(clean_pixels), mask)
        flat = mask.cloudy.reshape(-1)
        clear = [p for p in clean_pixels if not flat[p]]
        missing = [p for p in clear if p not in labels]
        if missing:
            raise InvalidInputError(f"{lake_id} {day}: no prediction for clear pixels {missing[:5]}")
        return cls(
            lake_id=lake_id,
            date=day,
            n_clean=len(clean_pixels),
            predictions=tuple(labels[p] for p in clear),
        )


def frozen_percent(predictions: Sequence[PixelLabel]) -> float:
    """
    Share of frozen pixels among the cloud-free clean pixels, in percent.

    Raises:
        InvalidInputError: If there are no usable pixels
    """
    if not predictions:
        raise InvalidInputError("Frozen percentage of zero pixels is undefined")
    frozen = sum(1 for p in predictions if p is PixelLabel.FROZEN)
    return 100.0 * frozen / len(predictions)


def build_timeline(
    acquisitions: Sequence[Acquisition],
    season: WinterSeason,
    min_cloud_free: float = DEFAULT_MIN_CLOUD_FREE,
    lake_id: str | None = None,
) -> WinterTimeline:
    """
    One point per acquisition that is at least min_cloud_free cloud-free.

    Raises:
        OutOfSeasonError: If an acquisition date lies outside the season
        InvalidInputError: On two acquisitions of the same day
    """
    seen: set[date] = set()
    for acq in acquisitions:
        if not season.contains(acq.date):
            raise OutOfSeasonError(f"Acquisition {acq.date.isoformat()} is outside winter {season.id}")
        if acq.date in seen:
            raise InvalidInputError(
                f"Two acquisitions on {acq.date.isoformat()}; one label per day is allowed"
            )
        seen.add(acq.date)

    points = []
    for acq in sorted(acquisitions, key=lambda a: a.date):
        if acq.cloud_free < min_cloud_free or not acq.predictions:
            continue
        points.append(
            TimelinePoint(
                day=day_of_winter(acq.date, season),
                nf_percent=100.0 - frozen_percent(acq.predictions),
                cloud_free=acq.cloud_free,
                n_pixels=len(acq.predictions),
            )
        )
    name = lake_id if lake_id is not None else (acquisitions[0].lake_id if acquisitions else "")
    logger.debug(
        "%s %s: admitted %d of %d acquisitions", name, season.id, len(points), len(acquisitions)
    )
    return WinterTimeline(lake_id=name, season=season, points=points)


def acquisitions_from_predictions(
    predictions: Iterable[PixelPrediction],
) -> dict[tuple[str, WinterSeason], list[Acquisition]]:
    """
    Group per-pixel predictions into acquisitions per lake and winter.

    Rows dated in the Jun-Aug summer gap are dropped with a warning.

    Raises:
        InvalidInputError: If a pixel appears twice on one date
    """
    by_day: dict[tuple[str, date], dict[int, PixelPrediction]] = defaultdict(dict)
    summer = 0
    for p in predictions:
        if 6 <= p.date.month <= 8:
            summer += 1
            continue
        pixels = by_day[(p.lake_id, p.date)]
        if p.pixel_id in pixels:
            raise InvalidInputError(f"Pixel {p.pixel_id} of {p.lake_id} appears twice on {p.date}")
        pixels[p.pixel_id] = p
    if summer:
        logger.warning("Dropped %d predictions dated Jun-Aug (outside any winter)", summer)

    out: dict[tuple[str, WinterSeason], list[Acquisition]] = defaultdict(list)
    for (lake_id, day), pixels in sorted(by_day.items()):
        labels = [
            pixels[pid].prediction
            for pid in sorted(pixels)
            if not pixels[pid].cloudy and pixels[pid].prediction is not None
        ]
        out[(lake_id, WinterSeason.containing(day))].append(
            Acquisition(lake_id=lake_id, date=day, n_clean=len(pixels), predictions=tuple(labels))
        )
    return dict(out)


def drop_small_lakes(
    groups: Mapping[tuple[str, WinterSeason], list[Acquisition]], min_clean_pixels: int
) -> dict[tuple[str, WinterSeason], list[Acquisition]]:
    """Remove lakes whose clean-pixel count is below min_clean_pixels"""
    sizes: dict[str, int] = defaultdict(int)
    for (lake_id, _), acquisitions in groups.items():
        for acq in acquisitions:
            sizes[lake_id] = max(sizes[lake_id], acq.n_clean)
    small = sorted(lake for lake, n in sizes.items() if n < min_clean_pixels)
    for lake in small:
        logger.warning(
            "Skipping %s: %d clean pixels (minimum %d)", lake, sizes[lake], min_clean_pixels
        )
    return {key: value for key, value in groups.items() if key[0] not in small}
