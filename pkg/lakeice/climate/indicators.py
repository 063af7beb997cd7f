"""
Winter meteorological indicators

Missing daily values are skipped, never imputed; every aggregate remembers how
many days contributed.
"""

import logging
from datetime import date

import numpy as np

from lakeice.core.exceptions import InsufficientDataError, InvalidInputError
from lakeice.core.models import (
    AggregationKind,
    AggregationWindow,
    ClimateField,
    ClimateSeries,
    DailyWeather,
    WinterIndicators,
)
from lakeice.core.seasons import WinterSeason

logger = logging.getLogger(__name__)


def window_bounds(season: WinterSeason, window: AggregationWindow) -> tuple[date, date]:
    """Inclusive first/last day of an aggregation window"""
    if window == AggregationWindow.S2D:
        return season.first_day, date(season.start_year, 12, 31)
    if window == AggregationWindow.J2M:
        return date(season.start_year + 1, 1, 1), season.last_day
    return season.first_day, season.last_day


def window_values(
    series: ClimateSeries, season: WinterSeason, window: AggregationWindow, field: ClimateField
) -> list[float]:
    first, last = window_bounds(season, window)
    return [value for _, value in series.values(field, first, last)]


def mwt(series: ClimateSeries, season: WinterSeason) -> float:
    """
    Mean winter temperature over Sep 1 - May 31, degrees C.

    Raises:
        InsufficientDataError: Without any temperature record in the season
    """
    temps = window_values(series, season, AggregationWindow.FULL, ClimateField.TMEAN)
    if not temps:
        raise InsufficientDataError(f"No temperature records for winter {season.id}")
    return float(np.mean(temps))


def afdd(series: ClimateSeries, season: WinterSeason) -> float:
    """
    Accumulated freezing degree-days as a positive magnitude.

    Sum of -tmean over the days with a sub-zero daily mean.
    """
    temps = window_values(series, season, AggregationWindow.FULL, ClimateField.TMEAN)
    if not temps:
        raise InsufficientDataError(f"No temperature records for winter {season.id}")
    return float(sum(-t for t in temps if t < 0.0))


def seasonal_aggregate(
    series: ClimateSeries,
    season: WinterSeason,
    window: AggregationWindow,
    field: ClimateField,
    kind: AggregationKind,
) -> float:
    """
    Sum or mean of a field over a window.

    Raises:
        InsufficientDataError: If the window holds no value of the field
    """
    values = window_values(series, season, window, field)
    if not values:
        raise InsufficientDataError(
            f"No {field.value} records in {window.value} of winter {season.id}"
        )
    if kind == AggregationKind.SUM:
        return float(np.sum(values))
    return float(np.mean(values))


def _optional(
    series: ClimateSeries,
    season: WinterSeason,
    window: AggregationWindow,
    field: ClimateField,
    kind: AggregationKind,
    counts: dict[str, int],
) -> float | None:
    counts[f"{field.value}/{window.value}"] = len(window_values(series, season, window, field))
    try:
        return seasonal_aggregate(series, season, window, field, kind)
    except InsufficientDataError:
        return None


def winter_indicators(series: ClimateSeries, season: WinterSeason) -> WinterIndicators:
    """All indicators of one winter; unavailable ones are None"""
    counts: dict[str, int] = {}
    full, s2d, j2m = AggregationWindow.FULL, AggregationWindow.S2D, AggregationWindow.J2M
    total, mean = AggregationKind.SUM, AggregationKind.MEAN
    sun, rain, wind = ClimateField.SUNSHINE, ClimateField.PRECIP, ClimateField.WIND

    temps = window_values(series, season, full, ClimateField.TMEAN)
    counts[f"{ClimateField.TMEAN.value}/{full.value}"] = len(temps)
    return WinterIndicators(
        season=season,
        mwt_c=mwt(series, season) if temps else None,
        afdd_c=afdd(series, season) if temps else None,
        sunshine_total_h=_optional(series, season, full, sun, total, counts),
        sunshine_s2d_h=_optional(series, season, s2d, sun, total, counts),
        sunshine_j2m_h=_optional(series, season, j2m, sun, total, counts),
        precip_total_mm=_optional(series, season, full, rain, total, counts),
        precip_s2d_mm=_optional(series, season, s2d, rain, total, counts),
        precip_j2m_mm=_optional(series, season, j2m, rain, total, counts),
        wind_mean_kmh=_optional(series, season, full, wind, mean, counts),
        wind_s2d_kmh=_optional(series, season, s2d, wind, mean, counts),
        wind_j2m_kmh=_optional(series, season, j2m, wind, mean, counts),
        day_counts=counts,
    )


def seasons_covered(series: ClimateSeries) -> list[WinterSeason]:
    """Winters with at least one record, ascending"""
    starts = set()
    for day in series.records:
        if not 6 <= day.month <= 8:
            starts.add(WinterSeason.containing(day).start_year)
    return [WinterSeason(start_year=y) for y in sorted(starts)]


def merge_series(
    primary: ClimateSeries, secondary: ClimateSeries, fields: list[ClimateField]
) -> ClimateSeries:
    """
    Combine two stations: the listed fields come from secondary, the rest
    from primary.
    """
    if not fields:
        raise InvalidInputError("merge_series needs at least one field to take from the secondary station")
    taken = {f.value for f in fields}
    records: dict[date, DailyWeather] = {}
    for day in sorted(set(primary.records) | set(secondary.records)):
        a = primary.records.get(day, DailyWeather())
        b = secondary.records.get(day, DailyWeather())
        records[day] = DailyWeather(
            **{f.value: (b.get(f) if f.value in taken else a.get(f)) for f in ClimateField}
        )
    return ClimateSeries(station_id=f"{primary.station_id}+{secondary.station_id}", records=records)
