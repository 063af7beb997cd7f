"""
Report tables: per lake-winter summary CSV, summary JSON and truth recovery
"""

import csv
import io
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from lakeice.core.files import atomic_write_text
from lakeice.core.models import DATE_EVENTS, LipEvent, PhenologyRecord, SynthTruth
from lakeice.core.seasons import date_of
from lakeice.phenology.summary import EventAverages, event_averages

SUMMARY_COLUMNS = [
    "lake_id",
    "winter",
    "fus",
    "fue",
    "bus",
    "bue",
    "icd_days",
    "cfd_days",
    "complete",
    "corrected",
    "fit_loss",
]

# Published real-data results. The MODIS/VIIRS pixels and station series
# behind them are not distributed, so they only document the report format.
REFERENCE_RESULTS: dict[str, Any] = {
    "reproducible": False,
    "four_fold_cv_m_acc_range": [93.4, 99.4],
    "cfd_trend_d_per_a": {"sils": -0.76, "silvaplana": -0.89},
    "sils_mwt_correlation": {
        "FUS": 0.49509987,
        "FUE": 0.50946947,
        "BUS": -0.54931819,
        "BUE": -0.49618725,
        "ICD": -0.64333362,
        "CFD": -0.66420438,
    },
}


class EventDeviation(BaseModel):
    lake_id: str
    winter: str
    event: LipEvent
    truth: int
    estimate: int | None

    @property
    def error_days(self) -> int | None:
        return None if self.estimate is None else self.estimate - self.truth


class RecoveryReport(BaseModel):
    """How closely fitted dates match synthetic truth"""

    n_events: int
    n_missing: int
    within_2_days: float
    within_7_days: float
    deviations: list[EventDeviation] = Field(default_factory=list)


class ReportSummary(BaseModel):
    n_records: int
    n_complete: int
    n_corrected: int
    lakes: list[EventAverages]
    recovery: RecoveryReport | None = None
    reference: dict[str, Any] = Field(default_factory=lambda: dict(REFERENCE_RESULTS))


def format_phenology_summary(records: Sequence[PhenologyRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for r in sorted(records, key=lambda r: (r.lake_id, r.season.start_year)):
        dates = ["" if d is None else date_of(d, r.season).isoformat() for d in r.dates().values()]
        writer.writerow(
            [
                r.lake_id,
                r.season.id,
                *dates,
                "" if r.icd_days is None else r.icd_days,
                "" if r.cfd_days is None else r.cfd_days,
                int(r.complete),
                int(r.corrected),
                repr(r.fit_loss),
            ]
        )
    return buffer.getvalue()


def write_phenology_summary(path: Path, records: Sequence[PhenologyRecord]) -> Path:
    return atomic_write_text(path, format_phenology_summary(records))


def recovery_report(
    records: Sequence[PhenologyRecord], truths: Sequence[SynthTruth]
) -> RecoveryReport:
    """
    Compare fitted dates with truth for every truth lake-winter.

    A lake-winter without a fitted record counts its four events as missing;
    missing estimates count as outside every tolerance.
    """
    fitted = {(r.lake_id, r.season.id): r for r in records}
    deviations = []
    for truth in sorted(truths, key=lambda t: (t.lake_id, t.winter)):
        record = fitted.get((truth.lake_id, truth.winter))
        for event in DATE_EVENTS:
            deviations.append(
                EventDeviation(
                    lake_id=truth.lake_id,
                    winter=truth.winter,
                    event=event,
                    truth=truth.event(event),
                    estimate=None if record is None else record.event(event),
                )
            )
    errors = [d.error_days for d in deviations]
    n = len(deviations)

    def share(days: int) -> float:
        return sum(e is not None and abs(e) <= days for e in errors) / n if n else 0.0

    return RecoveryReport(
        n_events=n,
        n_missing=sum(e is None for e in errors),
        within_2_days=share(2),
        within_7_days=share(7),
        deviations=deviations,
    )


def build_summary(
    records: Sequence[PhenologyRecord], truths: Sequence[SynthTruth] | None = None
) -> ReportSummary:
    return ReportSummary(
        n_records=len(records),
        n_complete=sum(r.complete for r in records),
        n_corrected=sum(r.corrected for r in records),
        lakes=event_averages(records),
        recovery=recovery_report(records, truths) if truths else None,
    )


def write_summary_json(path: Path, summary: ReportSummary) -> Path:
    return atomic_write_text(path, summary.model_dump_json(indent=2) + "\n")
