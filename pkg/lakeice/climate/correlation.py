"""
Correlation of LIP events with winter indicators

Freeze-up events are paired with Sep-Dec aggregates, break-up events with
Jan-May aggregates and the durations with whole-winter aggregates. MWT and
AFDD are paired with every event.
"""

import logging
from collections.abc import Mapping, Sequence

from lakeice.climate.statistics import pearson
from lakeice.core.exceptions import LakeIceError
from lakeice.core.models import (
    AggregationWindow,
    CorrelationEntry,
    LipEvent,
    PhenologyRecord,
    WinterIndicators,
)

logger = logging.getLogger(__name__)

_WINDOW_FOR_EVENT = {
    LipEvent.FUS: AggregationWindow.S2D,
    LipEvent.FUE: AggregationWindow.S2D,
    LipEvent.BUS: AggregationWindow.J2M,
    LipEvent.BUE: AggregationWindow.J2M,
    LipEvent.ICD: AggregationWindow.FULL,
    LipEvent.CFD: AggregationWindow.FULL,
}

_INDICATOR_FIELDS = {
    ("sunshine", AggregationWindow.FULL): "sunshine_total_h",
    ("sunshine", AggregationWindow.S2D): "sunshine_s2d_h",
    ("sunshine", AggregationWindow.J2M): "sunshine_j2m_h",
    ("precip", AggregationWindow.FULL): "precip_total_mm",
    ("precip", AggregationWindow.S2D): "precip_s2d_mm",
    ("precip", AggregationWindow.J2M): "precip_j2m_mm",
    ("wind", AggregationWindow.FULL): "wind_mean_kmh",
    ("wind", AggregationWindow.S2D): "wind_s2d_kmh",
    ("wind", AggregationWindow.J2M): "wind_j2m_kmh",
    ("mwt", AggregationWindow.FULL): "mwt_c",
    ("afdd", AggregationWindow.FULL): "afdd_c",
}


def pairing_plan() -> list[tuple[LipEvent, str, AggregationWindow]]:
    """(event, indicator, window) pairs evaluated by correlate_events"""
    plan = []
    for event in LipEvent:
        plan.append((event, "mwt", AggregationWindow.FULL))
        plan.append((event, "afdd", AggregationWindow.FULL))
        for indicator in ("sunshine", "precip", "wind"):
            plan.append((event, indicator, _WINDOW_FOR_EVENT[event]))
    return plan


def correlate_events(
    records: Sequence[PhenologyRecord],
    indicators: Mapping[int, WinterIndicators],
    plan: Sequence[tuple[LipEvent, str, AggregationWindow]] | None = None,
) -> list[CorrelationEntry]:
    """
    Pearson coefficient per lake and planned pair over the overlapping winters.

    Args:
        records: Phenology records of one or more lakes
        indicators: Winter indicators keyed by start year
        plan: Pairs to evaluate, pairing_plan() by default

    Returns:
        One entry per lake and pair; r is None when fewer than two winters
        overlap or a series is constant
    """
    lakes = sorted({r.lake_id for r in records})
    out = []
    for lake_id in lakes:
        lake_records = sorted(
            (r for r in records if r.lake_id == lake_id), key=lambda r: r.season.start_year
        )
        for event, indicator, window in plan or pairing_plan():
            field = _INDICATOR_FIELDS[(indicator, window)]
            xs, ys = [], []
            for record in lake_records:
                value = record.event(event)
                winter = indicators.get(record.season.start_year)
                other = getattr(winter, field) if winter is not None else None
                if value is not None and other is not None:
                    xs.append(float(value))
                    ys.append(float(other))
            r: float | None = None
            if len(xs) >= 2:
                try:
                    r = pearson(xs, ys)
                except LakeIceError as e:
                    logger.debug("%s %s/%s: %s", lake_id, event.value, indicator, e)
            out.append(
                CorrelationEntry(
                    lake_id=lake_id, event=event, indicator=indicator, window=window, n=len(xs), r=r
                )
            )
    return out
