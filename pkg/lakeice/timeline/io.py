"""
Timeline CSV: one row per admitted acquisition, raw and smoothed
"""

import csv
import io
from collections.abc import Sequence
from datetime import date
from pathlib import Path

from pydantic import ValidationError

from lakeice.core.exceptions import ParseError
from lakeice.core.files import atomic_write_text, require_file
from lakeice.core.models import TimelinePoint, WinterTimeline
from lakeice.core.seasons import WinterSeason, date_of, day_of_winter

TIMELINE_COLUMNS = [
    "lake_id",
    "winter",
    "date",
    "day_index",
    "nf_percent",
    "cloud_free",
    "n_pixels",
    "smoothed",
]


def format_timeline_csv(timelines: Sequence[WinterTimeline]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TIMELINE_COLUMNS)
    for tl in timelines:
        for p in tl.points:
            writer.writerow(
                [
                    tl.lake_id,
                    tl.season.id,
                    date_of(p.day, tl.season).isoformat(),
                    p.day,
                    repr(p.nf_percent),
                    repr(p.cloud_free),
                    p.n_pixels,
                    1 if tl.smoothed else 0,
                ]
            )
    return buffer.getvalue()


def write_timeline_csv(path: Path, timelines: Sequence[WinterTimeline]) -> Path:
    return atomic_write_text(path, format_timeline_csv(timelines))


def parse_timeline_csv(path: Path) -> list[WinterTimeline]:
    """
    Read timelines back, one per (lake, winter, smoothed) in file order.

    Raises:
        ParseError: On a bad header, malformed row or a day index that
            disagrees with its date
    """
    require_file(path, "timeline")
    groups: dict[tuple[str, str, bool], list[TimelinePoint]] = {}
    seasons: dict[str, WinterSeason] = {}
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != TIMELINE_COLUMNS:
            raise ParseError(path, 1, f"missing header, expected {','.join(TIMELINE_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TIMELINE_COLUMNS):
                raise ParseError(path, lineno, f"expected {len(TIMELINE_COLUMNS)} fields, got {len(row)}")
            lake_id, winter, day_text, index_text, nf, cloud_free, n_pixels, smoothed = row
            try:
                season = seasons.get(winter) or WinterSeason.parse(winter)
                day = date.fromisoformat(day_text)
                index = int(index_text)
                if index != day_of_winter(day, season):
                    raise ParseError(path, lineno, f"day_index {index} does not match {day_text}")
                if smoothed not in ("0", "1"):
                    raise ParseError(path, lineno, f"smoothed must be 0 or 1, got {smoothed!r}")
                point = TimelinePoint(
                    day=index,
                    nf_percent=float(nf),
                    cloud_free=float(cloud_free),
                    n_pixels=int(n_pixels),
                )
            except ParseError:
                raise
            except (ValueError, ValidationError) as e:
                raise ParseError(path, lineno, str(e).splitlines()[0]) from e
            seasons[winter] = season
            groups.setdefault((lake_id, winter, smoothed == "1"), []).append(point)

    timelines = []
    for (lake_id, winter, smoothed), points in groups.items():
        try:
            timelines.append(
                WinterTimeline(
                    lake_id=lake_id, season=seasons[winter], points=points, smoothed=smoothed
                )
            )
        except ValidationError as e:
            raise ParseError(path, 1, f"{lake_id} {winter}: {e.errors()[0]['msg']}") from e
    return timelines
