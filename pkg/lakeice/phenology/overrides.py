"""
Manual corrections of fitted LIP dates

Overrides file (YAML):

    sils:
      2009-10:
        events: {bus: 2010-04-29, bue: 2010-04-30}
        note: obvious fit failure after a cloudy April
"""

import logging
from collections.abc import Mapping
from datetime import date
from pathlib import Path

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from lakeice.core.exceptions import ConstraintViolationError, InvalidInputError
from lakeice.core.files import require_file
from lakeice.core.models import LipEvent, PhenologyRecord, check_event_order
from lakeice.core.seasons import WinterSeason, day_of_winter
from lakeice.phenology.fitting import derive_durations

logger = logging.getLogger(__name__)


class OverrideEntry(BaseModel):
    """Corrected dates of one lake-winter"""

    events: dict[LipEvent, date] = Field(default_factory=dict)
    note: str = ""

    @field_validator("events", mode="before")
    @classmethod
    def _upper_keys(cls, value: dict) -> dict:
        return {str(k).upper(): v for k, v in (value or {}).items()}

    @field_validator("events")
    @classmethod
    def _dates_only(cls, value: dict[LipEvent, date]) -> dict[LipEvent, date]:
        durations = [e.value for e in value if not e.is_date]
        if durations:
            raise ValueError(f"only FUS/FUE/BUS/BUE can be overridden, got {durations}")
        return value

    def day_indices(self, season: WinterSeason) -> dict[LipEvent, int]:
        return {event: day_of_winter(day, season) for event, day in self.events.items()}


def apply_overrides(
    record: PhenologyRecord, overrides: Mapping[LipEvent, int], note: str = ""
) -> PhenologyRecord:
    """
    Replace fitted dates by manual corrections.

    Args:
        record: Fitted record
        overrides: Day index per event to replace
        note: Reason for the correction

    Returns:
        Corrected record; the fitted dates are kept in record.original

    Raises:
        ConstraintViolationError: If the corrected dates break ordering or duration caps
    """
    if not overrides:
        return record
    dates = record.dates()
    for event, day in overrides.items():
        if not event.is_date:
            raise InvalidInputError(f"{event.value} is derived and cannot be overridden")
        dates[event.field] = day
    try:
        check_event_order(dates["fus"], dates["fue"], dates["bus"], dates["bue"])
    except ValueError as e:
        raise ConstraintViolationError(
            f"Override for {record.lake_id} {record.season.id} rejected: {e}"
        ) from e

    corrected = record.model_copy(
        update={
            **dates,
            "corrected": True,
            "override_note": note,
            "original": record.original if record.original is not None else record.dates(),
            "complete": all(d is not None for d in dates.values()),
        }
    )
    return derive_durations(corrected)


def load_overrides(path: Path) -> dict[tuple[str, str], OverrideEntry]:
    """
    Read the overrides YAML file.

    Returns:
        OverrideEntry per (lake_id, winter id)
    """
    require_file(path, "overrides")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise InvalidInputError(f"Invalid overrides file {path}: {e}") from e
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path.name}: expected a mapping of lake_id -> winter -> entry")

    out: dict[tuple[str, str], OverrideEntry] = {}
    for lake_id, winters in data.items():
        if not isinstance(winters, dict):
            raise InvalidInputError(f"{path.name}: entry for {lake_id} must map winters to overrides")
        for winter, entry in winters.items():
            season = WinterSeason.parse(str(winter))
            try:
                parsed = OverrideEntry.model_validate(entry or {})
            except ValidationError as e:
                raise InvalidInputError(
                    f"{path.name}: {lake_id} {season.id}: {e.errors()[0]['msg']}"
                ) from e
            out[(str(lake_id), season.id)] = parsed
    logger.debug("Loaded %d overrides from %s", len(out), path)
    return out


def apply_override_file(
    records: list[PhenologyRecord], overrides: Mapping[tuple[str, str], OverrideEntry]
) -> list[PhenologyRecord]:
    """Apply loaded overrides to matching records; unmatched overrides are reported"""
    out = []
    used = set()
    for record in records:
        key = (record.lake_id, record.season.id)
        entry = overrides.get(key)
        if entry is None:
            out.append(record)
            continue
        used.add(key)
        out.append(apply_overrides(record, entry.day_indices(record.season), entry.note))
    for lake_id, winter in sorted(set(overrides) - used):
        logger.warning("Override for %s %s matches no fitted record", lake_id, winter)
    return out
