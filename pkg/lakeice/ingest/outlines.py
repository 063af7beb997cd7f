"""
Lake outlines and clean-pixel extraction

Grid coordinates are in pixel units with the origin at the top-left corner of
pixel (0, 0); pixel (row, col) covers [col, col + 1] x [row, row + 1].
"""

import logging
import math
from collections.abc import Iterable
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from lakeice.core.exceptions import DegenerateGeometryError, ParseError
from lakeice.core.files import atomic_write_text, require_file
from lakeice.ingest.rasters import BandGrid

logger = logging.getLogger(__name__)

_BOUNDARY_EPS = 1e-12


class LakeOutline(BaseModel):
    """Closed, simple polygon in grid coordinates"""

    model_config = ConfigDict(frozen=True)

    vertices: tuple[tuple[float, float], ...] = Field(..., min_length=3)
    closed: bool = True

    @field_validator("vertices", mode="before")
    @classmethod
    def _drop_closing_vertex(cls, value: list[Any]) -> list[tuple[float, ...]]:
        verts = [tuple(float(c) for c in v) for v in value]
        if len(verts) > 1 and verts[0] == verts[-1]:
            verts = verts[:-1]
        return verts

    def as_array(self) -> NDArray[np.float64]:
        return np.asarray(self.vertices, dtype=np.float64)

    def reversed(self) -> "LakeOutline":
        return LakeOutline(vertices=tuple(reversed(self.vertices)))


Point = tuple[float, float] | NDArray[np.float64]


def _orient(a: Point, b: Point, c: Point) -> float:
    return float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def _on_segment(a: Point, b: Point, c: Point) -> bool:
    return bool(
        min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
    )


def _segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and 0 not in (d1, d2, d3, d4):
        return True
    # collinear overlaps count as intersections too
    return (
        (d1 == 0 and _on_segment(q1, q2, p1))
        or (d2 == 0 and _on_segment(q1, q2, p2))
        or (d3 == 0 and _on_segment(p1, p2, q1))
        or (d4 == 0 and _on_segment(p1, p2, q2))
    )


def validate_outline(outline: LakeOutline) -> None:
    """
    Reject polygons with zero area or crossing edges.

    Raises:
        DegenerateGeometryError: If the outline is not a simple polygon
    """
    pts = outline.as_array()
    n = len(pts)
    x, y = pts[:, 0], pts[:, 1]
    area = 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    if abs(area) < _BOUNDARY_EPS:
        raise DegenerateGeometryError("Lake outline has zero area")
    edges = [(pts[i], pts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(*edges[i], *edges[j]):
                raise DegenerateGeometryError(f"Lake outline edges {i} and {j} intersect")


def points_strictly_inside(
    outline: LakeOutline, points: NDArray[np.float64]
) -> NDArray[np.bool_]:
    """Even-odd containment test; points on (or within 1e-12 of) an edge are outside"""
    poly = outline.as_array()
    px = points[:, 0][:, None]
    py = points[:, 1][:, None]
    ax, ay = poly[:, 0][None, :], poly[:, 1][None, :]
    bx, by = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]

    straddles = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
    crossings = np.count_nonzero(straddles & (px < x_cross), axis=1)
    inside = crossings % 2 == 1

    # distance from each point to each edge
    ex, ey = bx - ax, by - ay
    length2 = ex * ex + ey * ey
    t = np.clip(((px - ax) * ex + (py - ay) * ey) / np.where(length2 > 0, length2, 1.0), 0, 1)
    dist2 = (ax + t * ex - px) ** 2 + (ay + t * ey - py) ** 2
    on_edge = np.any(dist2 <= _BOUNDARY_EPS**2, axis=1)
    return inside & ~on_edge


def extract_clean_pixels(outline: LakeOutline, grid: BandGrid) -> list[int]:
    """
    Pixels lying completely inside the lake.

    A pixel is clean when its four corners and its center are all strictly
    inside the outline.

    Returns:
        Clean pixel ids, ascending

    Raises:
        DegenerateGeometryError: If the outline is not a simple polygon
    """
    validate_outline(outline)
    rows, cols = np.mgrid[0 : grid.height, 0 : grid.width]
    rows = rows.reshape(-1).astype(np.float64)
    cols = cols.reshape(-1).astype(np.float64)
    offsets = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.5, 0.5)]
    clean = np.ones(rows.size, dtype=bool)
    for ox, oy in offsets:
        pts = np.column_stack([cols + ox, rows + oy])
        clean &= points_strictly_inside(outline, pts)
    ids = np.flatnonzero(clean).tolist()
    logger.debug("Outline keeps %d of %d pixels", len(ids), grid.size)
    return ids


def parse_outline(path: Path) -> LakeOutline:
    """Read an outline file: one "x y" vertex per line"""
    vertices: list[tuple[float, float]] = []
    require_file(path, "outline")
    with path.open(encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(path, lineno, f"expected 'x y', got {line!r}")
            try:
                vertices.append((float(parts[0]), float(parts[1])))
            except ValueError as e:
                raise ParseError(path, lineno, f"non-numeric vertex {line!r}") from e
    if len(vertices) < 3:
        raise DegenerateGeometryError(f"{path.name}: outline needs at least 3 vertices")
    return LakeOutline(vertices=vertices)


def write_outline(path: Path, outline: LakeOutline) -> Path:
    lines = [f"{x!r} {y!r}" for x, y in outline.vertices]
    return atomic_write_text(path, "\n".join(lines) + "\n")


def outline_grid(outline: LakeOutline, gsd_m: float) -> BandGrid:
    """
    Smallest origin-anchored grid that contains the outline.

    Pixel ids of samples follow this grid's row-major numbering, so the
    width is the outline's largest x rounded up.
    """
    pts = outline.as_array()
    width = max(1, math.ceil(float(pts[:, 0].max())))
    height = max(1, math.ceil(float(pts[:, 1].max())))
    return BandGrid(values=np.zeros((height, width)), gsd_m=gsd_m)


def load_clean_pixels(outline_dir: Path, lakes: Iterable[str], gsd_m: float) -> dict[str, set[int]]:
    """
    Clean pixel ids per lake from <outline_dir>/<lake>.txt.

    Raises:
        MissingInputError: If a lake has no outline file
        DegenerateGeometryError: If an outline is not a simple polygon
    """
    clean: dict[str, set[int]] = {}
    for lake_id in sorted(set(lakes)):
        outline = parse_outline(outline_dir / f"{lake_id}.txt")
        clean[lake_id] = set(extract_clean_pixels(outline, outline_grid(outline, gsd_m)))
    return clean
