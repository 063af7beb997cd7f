"""
Winter season calendar

A winter season runs from Sep 1 of its start year to May 31 of the following
year. Day index 0 is Sep 1. Lengths come from real calendar arithmetic, so
seasons containing Feb 29 have 274 days.
"""

import re
from datetime import date, timedelta

from pydantic import BaseModel, ConfigDict, Field

from lakeice.core.exceptions import InvalidInputError, OutOfSeasonError

_SEASON_ID = re.compile(r"^(\d{4})-(\d{2}|\d{4})$")


class WinterSeason(BaseModel):
    """One Sep-May winter season, identified by its September year"""

    model_config = ConfigDict(frozen=True)

    start_year: int = Field(..., ge=1, le=9998)

    @classmethod
    def parse(cls, text: str) -> "WinterSeason":
        """Parse "2016-17" or "2016-2017"."""
        match = _SEASON_ID.match(text.strip())
        if not match:
            raise InvalidInputError(f"Invalid winter id: {text!r}")
        start = int(match.group(1))
        end = match.group(2)
        expected = start + 1
        if (len(end) == 2 and int(end) != expected % 100) or (
            len(end) == 4 and int(end) != expected
        ):
            raise InvalidInputError(f"Winter {text!r} does not span consecutive years")
        return cls(start_year=start)

    @classmethod
    def containing(cls, day: date) -> "WinterSeason":
        """Season a Sep-May date belongs to"""
        if day.month >= 9:
            return cls(start_year=day.year)
        if day.month <= 5:
            return cls(start_year=day.year - 1)
        raise OutOfSeasonError(f"{day.isoformat()} lies in the summer gap (Jun-Aug)")

    @property
    def id(self) -> str:
        return f"{self.start_year}-{(self.start_year + 1) % 100:02d}"

    @property
    def first_day(self) -> date:
        return date(self.start_year, 9, 1)

    @property
    def last_day(self) -> date:
        return date(self.start_year + 1, 5, 31)

    @property
    def length(self) -> int:
        return (self.last_day - self.first_day).days + 1

    def contains(self, day: date) -> bool:
        return self.first_day <= day <= self.last_day

    def __str__(self) -> str:
        return self.id


def season_length(season: WinterSeason) -> int:
    """Number of days in the season (273, or 274 with a leap day)"""
    return season.length


def day_of_winter(day: date, season: WinterSeason) -> int:
    """
    Offset of a date from Sep 1 of the season.

    Args:
        day: Calendar date inside the season
        season: Winter season

    Returns:
        Day index, 0 for Sep 1

    Raises:
        OutOfSeasonError: If the date lies outside Sep 1 - May 31
    """
    if not season.contains(day):
        raise OutOfSeasonError(f"{day.isoformat()} is outside winter {season.id}")
    return (day - season.first_day).days


def date_of(index: int, season: WinterSeason) -> date:
    """Calendar date of a day index (inverse of day_of_winter)"""
    if not 0 <= index < season.length:
        raise OutOfSeasonError(f"Day index {index} is outside winter {season.id}")
    return season.first_day + timedelta(days=index)
