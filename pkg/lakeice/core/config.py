"""
Configuration management for lakeice

Settings come from (highest precedence first) CLI flags, a TOML config file,
LAKEICE_* environment variables and the defaults below.
"""

from datetime import date
from pathlib import Path
from typing import Any

import toml
from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from lakeice.core.exceptions import InvalidInputError, MissingInputError
from lakeice.core.models import Sensor
from lakeice.core.seasons import WinterSeason, day_of_winter

DEFAULT_COST = 0.1


class MonthDay(BaseModel):
    """Calendar day without a year, e.g. 12-31"""

    month: int = Field(..., ge=1, le=12)
    day: int = Field(..., ge=1, le=31)

    @classmethod
    def parse(cls, text: str) -> "MonthDay":
        try:
            month, day = (int(part) for part in text.split("-"))
        except ValueError as e:
            raise InvalidInputError(f"Invalid month-day {text!r}, expected MM-DD") from e
        return cls(month=month, day=day)

    def in_season(self, season: WinterSeason) -> date:
        year = season.start_year if self.month >= 9 else season.start_year + 1
        # Feb 29 falls back to Feb 28 in non-leap years
        if (self.month, self.day) == (2, 29):
            try:
                return date(year, 2, 29)
            except ValueError:
                return date(year, 2, 28)
        return date(year, self.month, self.day)

    def __str__(self) -> str:
        return f"{self.month:02d}-{self.day:02d}"


class PriorConfig(BaseModel):
    """Gaussian priors on the four LIP dates"""

    mu_fus: MonthDay = Field(default_factory=lambda: MonthDay(month=12, day=31))
    mu_fue: MonthDay = Field(default_factory=lambda: MonthDay(month=1, day=3))
    mu_bus: MonthDay = Field(default_factory=lambda: MonthDay(month=4, day=27))
    mu_bue: MonthDay = Field(default_factory=lambda: MonthDay(month=4, day=30))
    sigma_days: float = Field(30.0, gt=0)

    @field_validator("mu_fus", "mu_fue", "mu_bus", "mu_bue", mode="before")
    @classmethod
    def _parse_month_day(cls, value: Any) -> Any:
        if isinstance(value, str):
            return MonthDay.parse(value)
        return value

    @model_validator(mode="after")
    def _check_order(self) -> "PriorConfig":
        means = self.means(WinterSeason(start_year=2001))
        if list(means) != sorted(means):
            raise ValueError("prior means must be in chronological order FUS, FUE, BUS, BUE")
        return self

    def means(self, season: WinterSeason) -> tuple[int, int, int, int]:
        """Prior means as day indices of the season"""
        return tuple(  # type: ignore[return-value]
            day_of_winter(m.in_season(season), season)
            for m in (self.mu_fus, self.mu_fue, self.mu_bus, self.mu_bue)
        )


class PathsConfig(BaseModel):
    samples: Path | None = None
    meteo: Path | None = None
    outlines: Path | None = None
    model: Path | None = None
    predictions: Path | None = None
    timeline: Path | None = None
    compare_timeline: Path | None = None
    truth_dir: Path | None = None
    phenology: Path | None = None
    overrides: Path | None = None
    output_dir: Path = Path("./out")


class ClassifierConfig(BaseModel):
    name: str = "linear_svm"
    cost: float = Field(DEFAULT_COST, gt=0)
    seed: int = 0
    grid_costs: list[float] = Field(default_factory=lambda: [0.01, 0.1, 1.0, 10.0])
    max_epochs: int = Field(200, ge=1)
    tol: float = Field(1e-6, gt=0)
    max_train_samples: int | None = Field(5000, ge=2)
    auxiliary_months: bool = False

    @field_validator("grid_costs")
    @classmethod
    def _positive_costs(cls, value: list[float]) -> list[float]:
        if not value or any(c <= 0 for c in value):
            raise ValueError("grid_costs must be a non-empty list of positive numbers")
        return value


class TimelineConfig(BaseModel):
    min_cloud_free: float = Field(0.30, ge=0.0, le=1.0)
    sigma_days: float = Field(0.6, gt=0)
    window_days: float = Field(3.0, gt=0)
    min_clean_pixels: int = Field(1, ge=1)


class PhenologyConfig(BaseModel):
    huber_phi: float = Field(1.35, gt=0)
    excluded_lakes: list[str] = Field(default_factory=list)


class SynthConfig(BaseModel):
    """Synthetic dataset generator settings"""

    lake_sizes: dict[str, int] = Field(default_factory=lambda: {"sils": 33, "silvaplana": 21})
    winters: list[int] = Field(default_factory=lambda: list(range(2000, 2020)))
    n_bands: int = Field(12, ge=1)
    class_separation: float = Field(4.0, gt=0)
    cloud_rate: float = Field(0.4, ge=0.0, le=1.0)
    cloud_fn_rate: float = Field(0.02, ge=0.0, le=1.0)
    max_partial_cover: float = Field(0.7, ge=0.0, le=1.0)
    label_noise: float = Field(0.02, ge=0.0, le=1.0)
    fraction_noise: float = Field(3.0, ge=0.0, le=20.0)
    climate_noise: float = Field(0.0, ge=0.0)
    seed: int = 0

    @field_validator("lake_sizes")
    @classmethod
    def _positive_sizes(cls, value: dict[str, int]) -> dict[str, int]:
        if not value or any(n < 1 for n in value.values()):
            raise ValueError("every lake needs at least one clean pixel")
        return value


class RuntimeConfig(BaseModel):
    max_parallel_workers: int = Field(4, ge=1)
    log_level: str = "INFO"
    debug: bool = False


class PipelineConfig(BaseSettings):
    """lakeice pipeline settings"""

    model_config = SettingsConfigDict(
        env_prefix="LAKEICE_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    sensor: Sensor = Sensor.MODIS
    paths: PathsConfig = Field(default_factory=PathsConfig)
    classifier: ClassifierConfig = Field(default_factory=ClassifierConfig)
    timeline: TimelineConfig = Field(default_factory=TimelineConfig)
    prior: PriorConfig = Field(default_factory=PriorConfig)
    phenology: PhenologyConfig = Field(default_factory=PhenologyConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)

    @classmethod
    def load(
        cls, config_path: Path | None = None, overrides: dict[str, Any] | None = None
    ) -> "PipelineConfig":
        """
        Build the configuration from an optional TOML file plus flag overrides.

        Args:
            config_path: TOML file with [paths], [classifier], ... sections
            overrides: Dotted keys (e.g. "classifier.cost") set from CLI flags

        Returns:
            Validated PipelineConfig
        """
        data: dict[str, Any] = {}
        if config_path is not None:
            if not config_path.exists():
                raise MissingInputError(f"Config file not found: {config_path}")
            try:
                data = toml.load(config_path)
            except toml.TomlDecodeError as e:
                raise InvalidInputError(f"Invalid config file {config_path}: {e}") from e
        for dotted, value in (overrides or {}).items():
            if value is None:
                continue
            node = data
            *parents, leaf = dotted.split(".")
            for key in parents:
                node = node.setdefault(key, {})
            node[leaf] = value
        return cls(**data)

    def settings_snapshot(self) -> dict[str, Any]:
        """JSON-friendly dump used in run manifests"""
        return self.model_dump(mode="json")
