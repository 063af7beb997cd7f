"""
CSV formats: pixel samples, per-pixel predictions and station weather

Writers format floats with repr(), which round-trips exactly, so
parse(write(x)) == x for every accepted dataset.
"""

import csv
import io
import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from datetime import date
from pathlib import Path

from lakeice.core.exceptions import InvalidInputError, ParseError
from lakeice.core.files import atomic_write_text, require_file
from lakeice.core.models import ClimateSeries, DailyWeather, PixelLabel, PixelPrediction, PixelSample

logger = logging.getLogger(__name__)

SAMPLE_COLUMNS = ["lake_id", "date", "pixel_id", "cloudy", "label"]
PREDICTION_COLUMNS = ["lake_id", "date", "pixel_id", "cloudy", "prediction"]
METEO_COLUMNS = ["station_id", "date", "tmean_c", "precip_mm", "sunshine_h", "wind_kmh"]

_LABELS = {label.value: label for label in PixelLabel}
_PREDICTIONS = {"frozen": PixelLabel.FROZEN, "non_frozen": PixelLabel.NON_FROZEN, "none": None}


def _rows(path: Path) -> Iterator[tuple[int, list[str]]]:
    require_file(path, "input")
    with path.open(encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if row:
                yield lineno, row


def _parse_date(path: Path, lineno: int, text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as e:
        raise ParseError(path, lineno, f"invalid date {text!r}, expected YYYY-MM-DD") from e


def _parse_int(path: Path, lineno: int, text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise ParseError(path, lineno, f"non-integer {what} {text!r}") from e


def _parse_flag(path: Path, lineno: int, text: str) -> bool:
    if text not in ("0", "1"):
        raise ParseError(path, lineno, f"cloudy must be 0 or 1, got {text!r}")
    return text == "1"


def _parse_float(path: Path, lineno: int, text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise ParseError(path, lineno, f"non-numeric {what} {text!r}") from e
    if not math.isfinite(value):
        raise ParseError(path, lineno, f"non-finite {what} {text!r}")
    return value


def _render(rows: Iterable[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def parse_samples_csv(path: Path) -> list[PixelSample]:
    """
    Read pixel samples.

    Header: lake_id,date,pixel_id,cloudy,label,b1,...,bK with K fixed per file.

    Raises:
        ParseError: On a missing header, wrong arity, non-numeric band or unknown label
    """
    rows = _rows(path)
    first = next(rows, None)
    if first is None:
        raise ParseError(path, 1, "empty file, expected a header row")
    _, header = first
    bands = header[len(SAMPLE_COLUMNS) :]
    if header[: len(SAMPLE_COLUMNS)] != SAMPLE_COLUMNS or not bands:
        raise ParseError(path, 1, f"missing header, expected {','.join(SAMPLE_COLUMNS)},b1,...,bK")
    if bands != [f"b{i}" for i in range(1, len(bands) + 1)]:
        raise ParseError(path, 1, "band columns must be named b1..bK")

    samples: list[PixelSample] = []
    width = len(header)
    for lineno, row in rows:
        if len(row) != width:
            raise ParseError(path, lineno, f"expected {width} fields, got {len(row)}")
        label = _LABELS.get(row[4])
        if label is None:
            raise ParseError(path, lineno, f"unknown label {row[4]!r}")
        if not row[0]:
            raise ParseError(path, lineno, "empty lake_id")
        samples.append(
            PixelSample(
                lake_id=row[0],
                date=_parse_date(path, lineno, row[1]),
                pixel_id=_parse_int(path, lineno, row[2], "pixel_id"),
                cloudy=_parse_flag(path, lineno, row[3]),
                label=label,
                bands=tuple(_parse_float(path, lineno, v, "band") for v in row[5:]),
            )
        )
    logger.debug("Read %d samples from %s", len(samples), path)
    return samples


def format_samples_csv(samples: list[PixelSample]) -> str:
    """Render samples in the samples CSV format"""
    if not samples:
        raise InvalidInputError("Cannot write an empty sample set (band count unknown)")
    k = len(samples[0].bands)
    if any(len(s.bands) != k for s in samples):
        raise InvalidInputError("All samples in one file must have the same band count")
    header = SAMPLE_COLUMNS + [f"b{i}" for i in range(1, k + 1)]
    body = (
        [
            s.lake_id,
            s.date.isoformat(),
            str(s.pixel_id),
            "1" if s.cloudy else "0",
            s.label.value,
            *(repr(float(b)) for b in s.bands),
        ]
        for s in samples
    )
    return _render([header, *body])


def write_samples_csv(path: Path, samples: list[PixelSample]) -> Path:
    return atomic_write_text(path, format_samples_csv(samples))


def parse_predictions_csv(path: Path) -> list[PixelPrediction]:
    """Read per-pixel predictions (prediction "none" marks a cloudy, unclassified pixel)"""
    rows = _rows(path)
    first = next(rows, None)
    if first is None or first[1] != PREDICTION_COLUMNS:
        raise ParseError(path, 1, f"missing header, expected {','.join(PREDICTION_COLUMNS)}")

    out: list[PixelPrediction] = []
    for lineno, row in rows:
        if len(row) != len(PREDICTION_COLUMNS):
            raise ParseError(path, lineno, f"expected {len(PREDICTION_COLUMNS)} fields, got {len(row)}")
        if row[4] not in _PREDICTIONS:
            raise ParseError(path, lineno, f"unknown prediction {row[4]!r}")
        cloudy = _parse_flag(path, lineno, row[3])
        prediction = _PREDICTIONS[row[4]]
        if not cloudy and prediction is None:
            raise ParseError(path, lineno, "non-cloudy pixel without a prediction")
        out.append(
            PixelPrediction(
                lake_id=row[0],
                date=_parse_date(path, lineno, row[1]),
                pixel_id=_parse_int(path, lineno, row[2], "pixel_id"),
                cloudy=cloudy,
                prediction=prediction,
            )
        )
    return out


def write_predictions_csv(path: Path, predictions: list[PixelPrediction]) -> Path:
    body = (
        [
            p.lake_id,
            p.date.isoformat(),
            str(p.pixel_id),
            "1" if p.cloudy else "0",
            p.prediction.value if p.prediction is not None else "none",
        ]
        for p in predictions
    )
    return atomic_write_text(path, _render([PREDICTION_COLUMNS, *body]))


def parse_meteo_stations(path: Path) -> dict[str, ClimateSeries]:
    """
    Read daily station weather, one ClimateSeries per station.

    Empty fields are recorded as missing.

    Raises:
        ParseError: On a bad header, wrong arity, non-numeric value or duplicate date
    """
    rows = _rows(path)
    first = next(rows, None)
    if first is None or first[1] != METEO_COLUMNS:
        raise ParseError(path, 1, f"missing header, expected {','.join(METEO_COLUMNS)}")

    by_station: dict[str, dict[date, DailyWeather]] = {}
    for lineno, row in rows:
        if len(row) != len(METEO_COLUMNS):
            raise ParseError(path, lineno, f"expected {len(METEO_COLUMNS)} fields, got {len(row)}")
        if not row[0]:
            raise ParseError(path, lineno, "empty station_id")
        day = _parse_date(path, lineno, row[1])
        values = [
            None if text == "" else _parse_float(path, lineno, text, name)
            for name, text in zip(METEO_COLUMNS[2:], row[2:], strict=True)
        ]
        records = by_station.setdefault(row[0], {})
        if day in records:
            raise ParseError(path, lineno, f"duplicate record for {row[0]} on {day.isoformat()}")
        records[day] = DailyWeather(**dict(zip(METEO_COLUMNS[2:], values, strict=True)))

    return {
        station: ClimateSeries(station_id=station, records=records)
        for station, records in sorted(by_station.items())
    }


def parse_meteo_csv(path: Path, station_id: str | None = None) -> ClimateSeries:
    """
    Read the weather of one station.

    Args:
        path: CSV with header station_id,date,tmean_c,precip_mm,sunshine_h,wind_kmh
        station_id: Station to keep when the file holds several

    Raises:
        ParseError: On a malformed file
        InvalidInputError: If the station is unknown, or the file holds several
            stations and none was chosen
    """
    stations = parse_meteo_stations(path)
    if station_id is not None:
        if station_id not in stations:
            raise InvalidInputError(f"{path.name}: no weather records for station {station_id}")
        return stations[station_id]
    if not stations:
        raise InvalidInputError(f"{path.name}: no weather records")
    if len(stations) > 1:
        raise InvalidInputError(
            f"{path.name} holds stations {sorted(stations)}; choose one with station_id"
        )
    return next(iter(stations.values()))


def _format_optional(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def format_meteo_csv(stations: Sequence[ClimateSeries]) -> str:
    body = (
        [
            series.station_id,
            day.isoformat(),
            *(_format_optional(getattr(series.records[day], name)) for name in METEO_COLUMNS[2:]),
        ]
        for series in stations
        for day in sorted(series.records)
    )
    return _render([METEO_COLUMNS, *body])


def write_meteo_csv(path: Path, stations: Sequence[ClimateSeries]) -> Path:
    return atomic_write_text(path, format_meteo_csv(stations))
