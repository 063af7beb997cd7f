"""
Data models for lakeice
"""

import math
from datetime import date
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from lakeice.core.seasons import WinterSeason

MAX_TRANSITION_DAYS = 14


class PixelLabel(str, Enum):
    """Per-pixel class label"""

    FROZEN = "frozen"
    NON_FROZEN = "non_frozen"
    UNLABELED = "unlabeled"


class LipEvent(str, Enum):
    """Lake ice phenology events and the durations derived from them"""

    FUS = "FUS"  # freeze-up start
    FUE = "FUE"  # freeze-up end
    BUS = "BUS"  # break-up start
    BUE = "BUE"  # break-up end
    ICD = "ICD"  # ice coverage duration, BUE - FUS
    CFD = "CFD"  # complete freeze duration, BUS - FUE

    @property
    def is_date(self) -> bool:
        return self in (LipEvent.FUS, LipEvent.FUE, LipEvent.BUS, LipEvent.BUE)

    @property
    def field(self) -> str:
        """Attribute name on PhenologyRecord"""
        return {LipEvent.ICD: "icd_days", LipEvent.CFD: "cfd_days"}.get(self, self.value.lower())


DATE_EVENTS = (LipEvent.FUS, LipEvent.FUE, LipEvent.BUS, LipEvent.BUE)


class Sensor(str, Enum):
    """Optical sensors with preset band layouts"""

    MODIS = "MODIS"
    VIIRS = "VIIRS"


class SplitKind(str, Enum):
    """Evaluation split strategies"""

    K_FOLD = "k_fold"
    LEAVE_ONE_LAKE_OUT = "leave_one_lake_out"
    LEAVE_ONE_WINTER_OUT = "leave_one_winter_out"


class AggregationWindow(str, Enum):
    """Climate aggregation windows inside a winter season"""

    FULL = "full"  # Sep 1 - May 31
    S2D = "S2D"  # Sep 1 - Dec 31
    J2M = "J2M"  # Jan 1 - May 31


class ClimateField(str, Enum):
    """Daily station measurements"""

    TMEAN = "tmean_c"
    PRECIP = "precip_mm"
    SUNSHINE = "sunshine_h"
    WIND = "wind_kmh"


class AggregationKind(str, Enum):
    SUM = "sum"
    MEAN = "mean"


class PixelSample(BaseModel):
    """One clean pixel on one date"""

    model_config = ConfigDict(frozen=True)

    lake_id: str = Field(..., min_length=1)
    date: date
    pixel_id: int = Field(..., ge=0)
    bands: tuple[float, ...] = Field(..., min_length=1)
    cloudy: bool = False
    label: PixelLabel = PixelLabel.UNLABELED

    @property
    def winter(self) -> WinterSeason:
        return WinterSeason.containing(self.date)


class PixelPrediction(BaseModel):
    """Classifier output for one clean pixel; cloudy pixels carry no prediction"""

    model_config = ConfigDict(frozen=True)

    lake_id: str = Field(..., min_length=1)
    date: date
    pixel_id: int = Field(..., ge=0)
    cloudy: bool
    prediction: PixelLabel | None = None

    @model_validator(mode="after")
    def _check_prediction(self) -> "PixelPrediction":
        if self.prediction is PixelLabel.UNLABELED:
            raise ValueError("prediction must be frozen or non_frozen")
        if not self.cloudy and self.prediction is None:
            raise ValueError("non-cloudy pixels need a prediction")
        return self


class LinearModel(BaseModel):
    """Linear SVM weights with the per-band standardisation it was trained with"""

    weights: list[float] = Field(..., min_length=1)
    bias: float
    band_means: list[float]
    band_stds: list[float]
    cost: float = Field(..., gt=0)

    @model_validator(mode="after")
    def _check_shapes(self) -> "LinearModel":
        n = len(self.weights)
        if len(self.band_means) != n or len(self.band_stds) != n:
            raise ValueError("weights, band_means and band_stds must have equal length")
        if any(not s > 0 for s in self.band_stds):
            raise ValueError("band_stds must all be positive")
        return self

    @property
    def n_bands(self) -> int:
        return len(self.weights)


class ConfusionMatrix(BaseModel):
    """Two-class confusion counts with frozen as the positive class"""

    tp: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    tn: int = Field(0, ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + other.tp,
            fn=self.fn + other.fn,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
        )


class SplitPlan(BaseModel):
    """How a labelled dataset is partitioned for evaluation"""

    kind: SplitKind = SplitKind.K_FOLD
    k: int = 4
    seed: int = 0

    @model_validator(mode="after")
    def _check_k(self) -> "SplitPlan":
        if self.kind == SplitKind.K_FOLD and self.k < 2:
            raise ValueError("k_fold needs k >= 2")
        return self


class TimelinePoint(BaseModel):
    """Non-frozen percentage of one admitted acquisition"""

    model_config = ConfigDict(frozen=True)

    day: int = Field(..., ge=0)
    nf_percent: float = Field(..., ge=0.0, le=100.0)
    cloud_free: float = Field(..., ge=0.0, le=1.0)
    n_pixels: int = Field(..., ge=1)

    @property
    def frozen_percent(self) -> float:
        return 100.0 - self.nf_percent


class WinterTimeline(BaseModel):
    """Day-ascending timeline of one lake in one winter"""

    lake_id: str
    season: WinterSeason
    points: list[TimelinePoint] = Field(default_factory=list)
    smoothed: bool = False

    @model_validator(mode="after")
    def _check_days(self) -> "WinterTimeline":
        days = [p.day for p in self.points]
        if any(b <= a for a, b in zip(days, days[1:], strict=False)):
            raise ValueError("timeline days must be strictly increasing")
        if days and days[-1] >= self.season.length:
            raise ValueError(f"day {days[-1]} is outside winter {self.season.id}")
        return self

    @property
    def days(self) -> list[int]:
        return [p.day for p in self.points]

    @property
    def nf_values(self) -> list[float]:
        return [p.nf_percent for p in self.points]

    def __len__(self) -> int:
        return len(self.points)


class PhenologyRecord(BaseModel):
    """The four LIP dates of one lake-winter, as day indices, plus fit provenance"""

    lake_id: str
    season: WinterSeason
    fus: int | None = None
    fue: int | None = None
    bus: int | None = None
    bue: int | None = None
    icd_days: int | None = None
    cfd_days: int | None = None
    fit_loss: float = 0.0
    complete: bool = False
    corrected: bool = False
    override_note: str = ""
    original: dict[str, int | None] | None = None
    candidates_counts: dict[str, int] = Field(default_factory=dict)

    @field_validator("fit_loss")
    @classmethod
    def _finite_loss(cls, value: float) -> float:
        if math.isnan(value) or value < 0:
            raise ValueError("fit_loss must be a non-negative number")
        return value

    @model_validator(mode="after")
    def _check_order(self) -> "PhenologyRecord":
        check_event_order(self.fus, self.fue, self.bus, self.bue)
        return self

    def event(self, event: LipEvent) -> int | None:
        return getattr(self, event.field)

    def dates(self) -> dict[str, int | None]:
        return {e.field: self.event(e) for e in DATE_EVENTS}


def check_event_order(
    fus: int | None, fue: int | None, bus: int | None, bue: int | None
) -> None:
    """
    Validate ordering FUS <= FUE <= BUS <= BUE over the present dates and the
    two-week cap on freeze-up and break-up.

    Raises:
        ValueError: If a constraint is violated
    """
    present = [d for d in (fus, fue, bus, bue) if d is not None]
    if any(b < a for a, b in zip(present, present[1:], strict=False)):
        raise ValueError(f"events out of order: fus={fus} fue={fue} bus={bus} bue={bue}")
    if fus is not None and fue is not None and fue - fus > MAX_TRANSITION_DAYS:
        raise ValueError(f"freeze-up lasts {fue - fus} days (max {MAX_TRANSITION_DAYS})")
    if bus is not None and bue is not None and bue - bus > MAX_TRANSITION_DAYS:
        raise ValueError(f"break-up lasts {bue - bus} days (max {MAX_TRANSITION_DAYS})")


class DailyWeather(BaseModel):
    """One station day; any measurement may be missing"""

    model_config = ConfigDict(frozen=True)

    tmean_c: float | None = None
    precip_mm: float | None = None
    sunshine_h: float | None = None
    wind_kmh: float | None = None

    def get(self, field: ClimateField) -> float | None:
        return getattr(self, field.value)


class ClimateSeries(BaseModel):
    """Daily station measurements keyed by date"""

    station_id: str
    records: dict[date, DailyWeather] = Field(default_factory=dict)

    def values(
        self, field: ClimateField, first: date, last: date
    ) -> list[tuple[date, float]]:
        """Available (date, value) pairs of a field in [first, last], date-ascending"""
        out = []
        for day in sorted(self.records):
            if first <= day <= last:
                value = self.records[day].get(field)
                if value is not None:
                    out.append((day, value))
        return out


class WinterIndicators(BaseModel):
    """Meteorological indicators of one winter"""

    season: WinterSeason
    mwt_c: float | None = None
    afdd_c: float | None = Field(None, ge=0.0)
    sunshine_total_h: float | None = None
    sunshine_s2d_h: float | None = None
    sunshine_j2m_h: float | None = None
    precip_total_mm: float | None = None
    precip_s2d_mm: float | None = None
    precip_j2m_mm: float | None = None
    wind_mean_kmh: float | None = None
    wind_s2d_kmh: float | None = None
    wind_j2m_kmh: float | None = None
    day_counts: dict[str, int] = Field(default_factory=dict)


class TrendResult(BaseModel):
    """Least-squares trend of one event over the winters"""

    lake_id: str = ""
    event: LipEvent
    slope_d_per_a: float
    intercept: float
    n_winters: int = Field(..., ge=2)
    corrected: bool = True


class CorrelationEntry(BaseModel):
    """Pearson coefficient of one event against one indicator; r is None when unavailable"""

    lake_id: str = ""
    event: LipEvent
    indicator: str
    window: AggregationWindow
    n: int
    r: float | None = None


class SynthTruth(BaseModel):
    """Ground truth of one synthetic lake-winter"""

    lake_id: str
    winter: str
    fus: int
    fue: int
    bus: int
    bue: int
    shape_dates: tuple[int, int, int, int]
    daily_frozen_fraction: list[float]

    @model_validator(mode="after")
    def _check(self) -> "SynthTruth":
        check_event_order(self.fus, self.fue, self.bus, self.bue)
        return self

    @property
    def season(self) -> WinterSeason:
        return WinterSeason.parse(self.winter)

    @property
    def cfd_days(self) -> int:
        return self.bus - self.fue

    @property
    def icd_days(self) -> int:
        return self.bue - self.fus

    def event(self, event: LipEvent) -> int:
        return getattr(self, event.field)
