"""
Per-lake averages of the LIP events over all winters
"""

from collections import defaultdict
from collections.abc import Sequence
from datetime import timedelta

import numpy as np
from pydantic import BaseModel, Field

from lakeice.core.models import LipEvent, PhenologyRecord
from lakeice.core.seasons import WinterSeason

# non-leap reference season for rendering mean day indices as calendar days
_REFERENCE = WinterSeason(start_year=2001)


class EventAverages(BaseModel):
    lake_id: str
    n_winters: int
    mean_days: dict[LipEvent, float | None] = Field(default_factory=dict)
    mean_dates: dict[LipEvent, str | None] = Field(default_factory=dict)


def calendar_label(day: float) -> str:
    """MM-DD of a (possibly fractional) day index, rounded half up"""
    return (_REFERENCE.first_day + timedelta(days=int(np.floor(day + 0.5)))).strftime("%m-%d")


def event_averages(records: Sequence[PhenologyRecord]) -> list[EventAverages]:
    """Mean day index (dates) and mean length (durations) per lake over present values"""
    by_lake: dict[str, list[PhenologyRecord]] = defaultdict(list)
    for record in records:
        by_lake[record.lake_id].append(record)

    out = []
    for lake_id in sorted(by_lake):
        lake_records = by_lake[lake_id]
        means: dict[LipEvent, float | None] = {}
        labels: dict[LipEvent, str | None] = {}
        for event in LipEvent:
            values = [r.event(event) for r in lake_records if r.event(event) is not None]
            mean = float(np.mean(values)) if values else None
            means[event] = mean
            labels[event] = calendar_label(mean) if event.is_date and mean is not None else None
        out.append(
            EventAverages(
                lake_id=lake_id, n_winters=len(lake_records), mean_days=means, mean_dates=labels
            )
        )
    return out
