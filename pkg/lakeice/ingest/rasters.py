"""
Band rasters: geolocation shift correction, bilinear upsampling, cloud masks

Grids are stored as (height, width) float64 arrays. Pixel (row, col) has id
row * width + col. Missing values are NaN and never enter statistics.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from lakeice.core.exceptions import DegenerateGeometryError, InvalidInputError

logger = logging.getLogger(__name__)

NO_DATA = float("nan")
UPSAMPLE_FACTORS = (2, 4)


class BandGrid(BaseModel):
    """One band raster with its ground sampling distance"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    gsd_m: float = Field(..., gt=0)

    @field_validator("values", mode="before")
    @classmethod
    def _as_array(cls, value: ArrayLike) -> NDArray[np.float64]:
        arr = np.array(value, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("band values must be a 2-D (height, width) array")
        arr.setflags(write=False)
        return arr

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def size(self) -> int:
        return int(self.values.size)

    def pixel_id(self, row: int, col: int) -> int:
        return row * self.width + col


class CloudMask(BaseModel):
    """Per-pixel cloud flags, True = cloudy"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    cloudy: np.ndarray

    @field_validator("cloudy", mode="before")
    @classmethod
    def _as_array(cls, value: ArrayLike) -> NDArray[np.bool_]:
        arr = np.array(value, dtype=bool)
        if arr.ndim != 2:
            raise ValueError("cloud mask must be a 2-D (height, width) array")
        arr.setflags(write=False)
        return arr

    def matches(self, grid: BandGrid) -> bool:
        return self.cloudy.shape == grid.values.shape


def bilinear_sample(
    values: NDArray[np.float64], xs: NDArray[np.float64], ys: NDArray[np.float64]
) -> NDArray[np.float64]:
    """
    Bilinear interpolation at fractional (x, y) positions.

    Positions must lie inside [0, width-1] x [0, height-1]. Where a fractional
    part is exactly zero the neighbour is not touched, so samples on the
    source lattice are reproduced bit-exactly even next to no-data.
    """
    h, w = values.shape
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    fx = xs - x0
    fy = ys - y0
    x1 = np.where(fx > 0, np.minimum(x0 + 1, w - 1), x0)
    y1 = np.where(fy > 0, np.minimum(y0 + 1, h - 1), y0)

    top = np.where(fx > 0, (1.0 - fx) * values[y0, x0] + fx * values[y0, x1], values[y0, x0])
    bottom = np.where(fx > 0, (1.0 - fx) * values[y1, x0] + fx * values[y1, x1], values[y1, x0])
    return np.where(fy > 0, (1.0 - fy) * top + fy * bottom, top)


def apply_geolocation_shift(grid: BandGrid, dx: float, dy: float) -> BandGrid:
    """
    Resample a grid at (x + dx, y + dy) to correct absolute geolocation error.

    Args:
        grid: Source band
        dx: Shift along x (columns), in pixels
        dy: Shift along y (rows), in pixels

    Returns:
        Shifted grid; pixels whose source position falls outside the grid are NO_DATA

    Raises:
        InvalidInputError: If the grid is empty or the shift exceeds its size
    """
    if grid.size == 0:
        raise InvalidInputError("Cannot shift an empty grid")
    if abs(dx) >= grid.width or abs(dy) >= grid.height:
        raise InvalidInputError(
            f"Shift ({dx}, {dy}) exceeds grid size {grid.width}x{grid.height}"
        )
    if dx == 0 and dy == 0:
        return grid

    rows, cols = np.mgrid[0 : grid.height, 0 : grid.width].astype(np.float64)
    xs = cols + dx
    ys = rows + dy
    inside = (xs >= 0) & (xs <= grid.width - 1) & (ys >= 0) & (ys <= grid.height - 1)

    out = np.full(grid.values.shape, NO_DATA)
    out[inside] = bilinear_sample(grid.values, xs[inside], ys[inside])
    logger.debug("Shifted %dx%d grid by (%s, %s)", grid.width, grid.height, dx, dy)
    return BandGrid(values=out, gsd_m=grid.gsd_m)


def upsample_band(grid: BandGrid, factor: int) -> BandGrid:
    """
    Bilinear upsampling of a coarse band onto a finer grid.

    Output pixel (i, j) samples the source at (i / factor, j / factor), so the
    source sample at (r, c) reappears exactly at (r * factor, c * factor).
    Positions past the last source sample take the edge value, which keeps
    the output within the source min/max.

    Raises:
        InvalidInputError: If factor is not 2 or 4
    """
    if factor not in UPSAMPLE_FACTORS:
        raise InvalidInputError(f"Upsampling factor must be one of {UPSAMPLE_FACTORS}, got {factor}")
    if grid.size == 0:
        raise InvalidInputError("Cannot upsample an empty grid")

    h, w = grid.values.shape
    ys = np.minimum(np.arange(h * factor, dtype=np.float64) / factor, h - 1)
    xs = np.minimum(np.arange(w * factor, dtype=np.float64) / factor, w - 1)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    out = bilinear_sample(grid.values, xx, yy)
    return BandGrid(values=out, gsd_m=grid.gsd_m / factor)


def cloud_mask_from_grid(probability: BandGrid, threshold: float = 0.5) -> CloudMask:
    """Binary cloud mask from a cloud-probability band; no-data counts as cloudy"""
    values = probability.values
    return CloudMask(cloudy=np.isnan(values) | (values >= threshold))


def cloud_free_fraction(pixels: list[int], mask: CloudMask) -> float:
    """
    Share of clean pixels that are not cloudy.

    Raises:
        InvalidInputError: If the pixel set is empty or ids fall outside the mask
    """
    if not pixels:
        raise InvalidInputError("Cloud-free fraction of an empty pixel set is undefined")
    flat = mask.cloudy.reshape(-1)
    ids = np.asarray(pixels, dtype=np.intp)
    if ids.min() < 0 or ids.max() >= flat.size:
        raise DegenerateGeometryError("Pixel ids fall outside the cloud mask")
    return float(np.count_nonzero(~flat[ids])) / len(pixels)
