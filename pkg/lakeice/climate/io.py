"""
Trend, correlation, indicator and MAD report CSVs
"""

import csv
import io
from collections.abc import Mapping, Sequence
from pathlib import Path

from lakeice.climate.comparison import MadSummary
from lakeice.core.files import atomic_write_text
from lakeice.core.models import CorrelationEntry, TrendResult, WinterIndicators

TREND_COLUMNS = ["lake_id", "event", "slope_d_per_a", "intercept", "n_winters", "corrected"]
CORRELATION_COLUMNS = ["lake_id", "event", "indicator", "window", "n", "r"]
INDICATOR_COLUMNS = [
    "winter",
    "mwt_c",
    "afdd_c",
    "sunshine_total_h",
    "sunshine_s2d_h",
    "sunshine_j2m_h",
    "precip_total_mm",
    "precip_s2d_mm",
    "precip_j2m_mm",
    "wind_mean_kmh",
    "wind_s2d_kmh",
    "wind_j2m_kmh",
]
MAD_COLUMNS = ["lake_id", "winter", "n_days", "mad"]


def _number(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _render(header: list[str], rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_trends_csv(path: Path, trends: Sequence[TrendResult]) -> Path:
    rows = [
        [
            t.lake_id,
            t.event.value,
            _number(t.slope_d_per_a),
            _number(t.intercept),
            str(t.n_winters),
            "1" if t.corrected else "0",
        ]
        for t in trends
    ]
    return atomic_write_text(path, _render(TREND_COLUMNS, rows))


def write_correlations_csv(path: Path, entries: Sequence[CorrelationEntry]) -> Path:
    """Unavailable coefficients are written as empty fields"""
    rows = [
        [e.lake_id, e.event.value, e.indicator, e.window.value, str(e.n), _number(e.r)]
        for e in entries
    ]
    return atomic_write_text(path, _render(CORRELATION_COLUMNS, rows))


def write_indicators_csv(path: Path, indicators: Sequence[WinterIndicators]) -> Path:
    rows = [
        [w.season.id, *(_number(getattr(w, name)) for name in INDICATOR_COLUMNS[1:])]
        for w in indicators
    ]
    return atomic_write_text(path, _render(INDICATOR_COLUMNS, rows))


def write_mad_csv(path: Path, summaries: Mapping[str, MadSummary]) -> Path:
    """Per-winter MAD rows per lake, then "mean" and "std" rows over the winters"""
    rows = []
    for lake_id in sorted(summaries):
        summary = summaries[lake_id]
        for winter, mad in summary.per_winter.items():
            rows.append([lake_id, winter, str(summary.n_days[winter]), _number(mad)])
        rows.append([lake_id, "mean", str(sum(summary.n_days.values())), _number(summary.mean)])
        rows.append([lake_id, "std", str(sum(summary.n_days.values())), _number(summary.std)])
    return atomic_write_text(path, _render(MAD_COLUMNS, rows))
