"""
Mean absolute difference between two frozen-percentage series
"""

from collections import defaultdict
from collections.abc import Mapping
from datetime import date

import numpy as np
from pydantic import BaseModel, Field

from lakeice.core.exceptions import InsufficientDataError
from lakeice.core.models import WinterTimeline
from lakeice.core.seasons import WinterSeason, date_of


class MadSummary(BaseModel):
    """Per-winter MAD plus its across-winter mean and (population) std"""

    per_winter: dict[str, float] = Field(default_factory=dict)
    n_days: dict[str, int] = Field(default_factory=dict)
    mean: float
    std: float


def mad_compare(
    a: Mapping[date, float], b: Mapping[date, float], season: WinterSeason
) -> float:
    """
    Mean of |a_d - b_d| over the season's days present in both series.

    Raises:
        InsufficientDataError: If the series share no day in the season
    """
    common = sorted(d for d in a.keys() & b.keys() if season.contains(d))
    if not common:
        raise InsufficientDataError(f"No common days in winter {season.id}")
    return float(np.mean([abs(a[d] - b[d]) for d in common]))


def mad_summary(values: Mapping[str, float]) -> tuple[float, float]:
    """Mean and standard deviation of per-winter MADs"""
    if not values:
        raise InsufficientDataError("No winters to summarise")
    arr = np.asarray(list(values.values()), dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def mad_compare_winters(a: Mapping[date, float], b: Mapping[date, float]) -> MadSummary:
    """MAD per winter over every winter the two series share days in"""
    by_winter: dict[int, list[date]] = defaultdict(list)
    for d in a.keys() & b.keys():
        if not 6 <= d.month <= 8:
            by_winter[WinterSeason.containing(d).start_year].append(d)
    if not by_winter:
        raise InsufficientDataError("The two series share no winter day")

    per_winter: dict[str, float] = {}
    n_days: dict[str, int] = {}
    for year in sorted(by_winter):
        season = WinterSeason(start_year=year)
        per_winter[season.id] = mad_compare(a, b, season)
        n_days[season.id] = len(by_winter[year])
    mean, std = mad_summary(per_winter)
    return MadSummary(per_winter=per_winter, n_days=n_days, mean=mean, std=std)


def frozen_series(timelines: list[WinterTimeline]) -> dict[date, float]:
    """Frozen percentage per calendar date from timelines of one lake"""
    out: dict[date, float] = {}
    for tl in timelines:
        for p in tl.points:
            out[date_of(p.day, tl.season)] = p.frozen_percent
    return out
