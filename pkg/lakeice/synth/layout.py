"""
Synthetic lake geometry

Clean pixels are laid out row-major in a block of width ceil(sqrt(n)) inside
a one-pixel land border; the outline follows the block with a small margin so
every clean pixel lies strictly inside it.
"""

import math

from pydantic import BaseModel, ConfigDict

from lakeice.core.exceptions import InvalidInputError
from lakeice.ingest.outlines import LakeOutline

_MARGIN = 0.01


class LakeLayout(BaseModel):
    model_config = ConfigDict(frozen=True)

    lake_id: str
    width: int
    height: int
    outline: LakeOutline
    pixel_ids: tuple[int, ...]


def lake_layout(lake_id: str, n_pixels: int) -> LakeLayout:
    """Grid, outline and clean pixel ids of a lake with n_pixels clean pixels"""
    if n_pixels < 1:
        raise InvalidInputError("a lake needs at least one clean pixel")
    block = math.isqrt(n_pixels - 1) + 1
    full_rows, rest = divmod(n_pixels, block)
    width = block + 2
    height = full_rows + 3

    e = _MARGIN
    right = 1 + block + e
    bottom = 1 + full_rows + e
    if rest == 0:
        vertices = [(1 - e, 1 - e), (right, 1 - e), (right, bottom), (1 - e, bottom)]
    else:
        vertices = [
            (1 - e, 1 - e),
            (right, 1 - e),
            (right, bottom),
            (1 + rest + e, bottom),
            (1 + rest + e, bottom + 1),
            (1 - e, bottom + 1),
        ]

    ids = [(1 + i // block) * width + 1 + i % block for i in range(n_pixels)]
    return LakeLayout(
        lake_id=lake_id,
        width=width,
        height=height,
        outline=LakeOutline(vertices=vertices),
        pixel_ids=tuple(ids),
    )
