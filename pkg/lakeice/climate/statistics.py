"""
Pearson correlation and least-squares trends
"""

import logging
from collections import defaultdict
from collections.abc import Mapping, Sequence

import numpy as np
from scipy import stats

from lakeice.core.exceptions import InsufficientDataError, InvalidInputError, UndefinedMetricError
from lakeice.core.models import LipEvent, PhenologyRecord, TrendResult

logger = logging.getLogger(__name__)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Centred, normalised correlation coefficient.

    Raises:
        InvalidInputError: On unequal lengths
        InsufficientDataError: With fewer than 2 pairs
        UndefinedMetricError: If either series is constant
    """
    if len(x) != len(y):
        raise InvalidInputError(f"Series differ in length ({len(x)} vs {len(y)})")
    if len(x) < 2:
        raise InsufficientDataError("Correlation needs at least 2 pairs")
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if np.ptp(xa) == 0 or np.ptp(ya) == 0:
        raise UndefinedMetricError("Correlation of a constant series is undefined")
    return float(stats.pearsonr(xa, ya).statistic)


def linear_trend(
    values: Mapping[int, float | None],
    event: LipEvent,
    lake_id: str = "",
    corrected: bool = True,
) -> TrendResult:
    """
    Ordinary least squares of per-winter values against the winter start year.

    Args:
        values: Value per start year; None marks a missing winter
        event: Event the values belong to

    Returns:
        TrendResult with the slope in days per annum

    Raises:
        InsufficientDataError: With fewer than 2 winters carrying a value
    """
    points = sorted((year, v) for year, v in values.items() if v is not None)
    if len(points) < 2:
        raise InsufficientDataError(
            f"Trend of {event.value} needs at least 2 winters, got {len(points)}"
        )
    years = np.asarray([p[0] for p in points], dtype=np.float64)
    ys = np.asarray([p[1] for p in points], dtype=np.float64)
    fit = stats.linregress(years, ys)
    return TrendResult(
        lake_id=lake_id,
        event=event,
        slope_d_per_a=float(fit.slope),
        intercept=float(fit.intercept),
        n_winters=len(points),
        corrected=corrected,
    )


def uncorrected(record: PhenologyRecord) -> PhenologyRecord:
    """The record as fitted, before manual overrides"""
    if not record.corrected or record.original is None:
        return record
    dates = record.original
    icd = dates["bue"] - dates["fus"] if dates["bue"] is not None and dates["fus"] is not None else None
    cfd = dates["bus"] - dates["fue"] if dates["bus"] is not None and dates["fue"] is not None else None
    return record.model_copy(
        update={**dates, "icd_days": icd, "cfd_days": cfd, "corrected": False, "original": None}
    )


def event_trends(records: Sequence[PhenologyRecord], corrected: bool = True) -> list[TrendResult]:
    """
    Per-lake trends of all six events.

    With corrected=False manual overrides are undone first. Events with fewer
    than two winters are skipped.
    """
    by_lake: dict[str, list[PhenologyRecord]] = defaultdict(list)
    for record in records:
        by_lake[record.lake_id].append(record if corrected else uncorrected(record))

    out = []
    for lake_id in sorted(by_lake):
        for event in LipEvent:
            values = {r.season.start_year: r.event(event) for r in by_lake[lake_id]}
            try:
                out.append(linear_trend(values, event, lake_id=lake_id, corrected=corrected))
            except InsufficientDataError as e:
                logger.info("%s: %s", lake_id, e)
    return out
