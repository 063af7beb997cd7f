"""
Timeline figures rendered from a Jinja2 SVG template

Coordinates are printed with two decimals, so equal inputs give
byte-identical documents.
"""

from datetime import date
from pathlib import Path

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape

from lakeice.core.exceptions import InvalidInputError
from lakeice.core.files import atomic_write_text
from lakeice.core.models import DATE_EVENTS, PhenologyRecord, WinterTimeline
from lakeice.core.seasons import day_of_winter
from lakeice.phenology.candidates import HIGH_THRESHOLD, LOW_THRESHOLD
from lakeice.phenology.fitting import effective_dates
from lakeice.phenology.model import model_nf_array

WIDTH = 720
HEIGHT = 320
MARGIN_LEFT = 48
MARGIN_RIGHT = 16
MARGIN_TOP = 24
MARGIN_BOTTOM = 44

_MONTHS = (
    (9, "Sep"),
    (10, "Oct"),
    (11, "Nov"),
    (12, "Dec"),
    (1, "Jan"),
    (2, "Feb"),
    (3, "Mar"),
    (4, "Apr"),
    (5, "May"),
)

_env = Environment(
    loader=FileSystemLoader(Path(__file__).parent / "templates"),
    autoescape=select_autoescape(enabled_extensions=("svg.j2",)),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def _fmt(value: float) -> str:
    return f"{value:.2f}"


class _Frame:
    """Maps (day index, nf percent) to SVG coordinates"""

    def __init__(self, season_length: int):
        self.length = season_length
        self.left = MARGIN_LEFT
        self.right = WIDTH - MARGIN_RIGHT
        self.top = MARGIN_TOP
        self.bottom = HEIGHT - MARGIN_BOTTOM

    def x(self, day: float) -> str:
        return _fmt(self.left + day / (self.length - 1) * (self.right - self.left))

    def y(self, nf: float) -> str:
        return _fmt(self.top + (1.0 - nf / 100.0) * (self.bottom - self.top))

    def polyline(self, days: list[float], values: list[float]) -> str:
        return " ".join(f"{self.x(d)},{self.y(v)}" for d, v in zip(days, values, strict=True))


def render_svg_timeline(
    tl: WinterTimeline,
    record: PhenologyRecord | None = None,
    smoothed: WinterTimeline | None = None,
) -> str:
    """
    SVG of one lake-winter.

    Args:
        tl: Raw timeline, drawn as points
        record: Fitted dates; adds the fitted curve and one marker per present event
        smoothed: Smoothed timeline, drawn as a line

    Raises:
        InvalidInputError: If the timeline has no points
    """
    if not tl.points:
        raise InvalidInputError(f"{tl.lake_id} {tl.season.id}: nothing to draw, timeline is empty")
    season = tl.season
    frame = _Frame(season.length)

    fit_points = ""
    markers = []
    if record is not None:
        dates = (record.fus, record.fue, record.bus, record.bue)
        if any(d is not None for d in dates):
            days = np.arange(season.length)
            curve = model_nf_array(days, effective_dates(dates, season.length))
            fit_points = frame.polyline(days.tolist(), curve.tolist())
        markers = [
            {"event": event.value, "x": frame.x(day)}
            for event, day in zip(DATE_EVENTS, dates, strict=True)
            if day is not None
        ]

    x_ticks = []
    for month, label in _MONTHS:
        year = season.start_year if month >= 9 else season.start_year + 1
        x_ticks.append({"x": frame.x(day_of_winter(date(year, month, 1), season)), "label": label})

    template = _env.get_template("timeline.svg.j2")
    return template.render(
        title=f"{tl.lake_id} {season.id}",
        width=WIDTH,
        height=HEIGHT,
        left=frame.left,
        right=frame.right,
        top=frame.top,
        bottom=frame.bottom,
        y_ticks=[{"y": frame.y(v), "label": f"{v:g}%"} for v in (0.0, 50.0, 100.0)],
        x_ticks=x_ticks,
        thresholds=[frame.y(LOW_THRESHOLD), frame.y(HIGH_THRESHOLD)],
        raw_points=[{"x": frame.x(p.day), "y": frame.y(p.nf_percent)} for p in tl.points],
        smoothed_points=frame.polyline(smoothed.days, smoothed.nf_values) if smoothed else "",
        fit_points=fit_points,
        markers=markers,
    )


def write_svg_timeline(
    path: Path,
    tl: WinterTimeline,
    record: PhenologyRecord | None = None,
    smoothed: WinterTimeline | None = None,
) -> Path:
    return atomic_write_text(path, render_svg_timeline(tl, record, smoothed))
