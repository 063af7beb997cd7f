"""
Sensor presets: band layout, ground sampling distance and the fixed
absolute-geolocation correction applied before clean-pixel extraction.
"""

from pydantic import BaseModel, ConfigDict, Field

from lakeice.core.models import Sensor
from lakeice.ingest.rasters import BandGrid, apply_geolocation_shift


class SensorProfile(BaseModel):
    """Per-sensor constants"""

    model_config = ConfigDict(frozen=True)

    sensor: Sensor
    n_bands: int = Field(..., ge=1)
    gsd_m: float = Field(..., gt=0)
    shift_dx: float
    shift_dy: float


SENSOR_PROFILES: dict[Sensor, SensorProfile] = {
    Sensor.MODIS: SensorProfile(
        sensor=Sensor.MODIS, n_bands=12, gsd_m=250.0, shift_dx=0.75, shift_dy=0.85
    ),
    Sensor.VIIRS: SensorProfile(
        sensor=Sensor.VIIRS, n_bands=5, gsd_m=375.0, shift_dx=0.0, shift_dy=0.3
    ),
}


def correct_geolocation(grid: BandGrid, sensor: Sensor) -> BandGrid:
    """Apply the sensor's fixed x/y geolocation shift"""
    profile = SENSOR_PROFILES[sensor]
    return apply_geolocation_shift(grid, profile.shift_dx, profile.shift_dy)
