"""
Phenology JSON: one object per lake-winter with ISO dates
"""

from collections.abc import Sequence
from datetime import date
from pathlib import Path

from pydantic import BaseModel, Field, TypeAdapter, ValidationError

from lakeice.core.exceptions import InvalidInputError
from lakeice.core.files import atomic_write_text, require_file
from lakeice.core.models import PhenologyRecord
from lakeice.core.seasons import WinterSeason, date_of, day_of_winter


class PhenologyEntry(BaseModel):
    """Serialised form of a PhenologyRecord"""

    lake_id: str
    winter: str
    fus: date | None = None
    fue: date | None = None
    bus: date | None = None
    bue: date | None = None
    icd_days: int | None = None
    cfd_days: int | None = None
    fit_loss: float = 0.0
    complete: bool = False
    corrected: bool = False
    override_note: str = ""
    original: dict[str, date | None] | None = None
    candidates_counts: dict[str, int] = Field(default_factory=dict)

    @classmethod
    def from_record(cls, record: PhenologyRecord) -> "PhenologyEntry":
        season = record.season

        def iso(day: int | None) -> date | None:
            return None if day is None else date_of(day, season)

        return cls(
            lake_id=record.lake_id,
            winter=season.id,
            **{k: iso(v) for k, v in record.dates().items()},
            icd_days=record.icd_days,
            cfd_days=record.cfd_days,
            fit_loss=record.fit_loss,
            complete=record.complete,
            corrected=record.corrected,
            override_note=record.override_note,
            original=(
                {k: iso(v) for k, v in record.original.items()} if record.original is not None else None
            ),
            candidates_counts=record.candidates_counts,
        )

    def to_record(self) -> PhenologyRecord:
        season = WinterSeason.parse(self.winter)

        def index(day: date | None) -> int | None:
            return None if day is None else day_of_winter(day, season)

        return PhenologyRecord(
            lake_id=self.lake_id,
            season=season,
            fus=index(self.fus),
            fue=index(self.fue),
            bus=index(self.bus),
            bue=index(self.bue),
            icd_days=self.icd_days,
            cfd_days=self.cfd_days,
            fit_loss=self.fit_loss,
            complete=self.complete,
            corrected=self.corrected,
            override_note=self.override_note,
            original=(
                {k: index(v) for k, v in self.original.items()} if self.original is not None else None
            ),
            candidates_counts=self.candidates_counts,
        )


_ENTRIES = TypeAdapter(list[PhenologyEntry])


def format_phenology_json(records: Sequence[PhenologyRecord]) -> str:
    entries = [PhenologyEntry.from_record(r) for r in records]
    return _ENTRIES.dump_json(entries, indent=2).decode("utf-8") + "\n"


def write_phenology_json(path: Path, records: Sequence[PhenologyRecord]) -> Path:
    return atomic_write_text(path, format_phenology_json(records))


def read_phenology_json(path: Path) -> list[PhenologyRecord]:
    require_file(path, "phenology")
    try:
        entries = _ENTRIES.validate_json(path.read_bytes())
        return [e.to_record() for e in entries]
    except ValidationError as e:
        raise InvalidInputError(f"Invalid phenology file {path}: {e.errors()[0]['msg']}") from e
