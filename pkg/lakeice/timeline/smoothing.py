"""
Gaussian smoothing on the irregular grid of admitted days
"""

import numpy as np

from lakeice.core.models import WinterTimeline

DEFAULT_SIGMA_DAYS = 0.6
DEFAULT_WINDOW_DAYS = 3.0


def gaussian_smooth(
    tl: WinterTimeline,
    sigma_days: float = DEFAULT_SIGMA_DAYS,
    window_days: float = DEFAULT_WINDOW_DAYS,
) -> WinterTimeline:
    """
    Replace each value by the Gaussian-weighted mean of the admitted points
    within +-window_days/2 of it.

    Cloud gaps are not filled: a point with no admitted neighbour in its
    window passes through unchanged. Days and cloud fields are kept.
    """
    if not tl.points:
        return tl.model_copy(update={"smoothed": True})
    days = np.asarray(tl.days, dtype=np.float64)
    values = np.asarray(tl.nf_values, dtype=np.float64)

    offsets = days[None, :] - days[:, None]
    weights = np.where(
        np.abs(offsets) <= window_days / 2.0,
        np.exp(-(offsets**2) / (2.0 * sigma_days**2)),
        0.0,
    )
    smoothed = np.clip((weights @ values) / weights.sum(axis=1), 0.0, 100.0)

    points = [
        p.model_copy(update={"nf_percent": float(v)})
        for p, v in zip(tl.points, smoothed, strict=True)
    ]
    return tl.model_copy(update={"points": points, "smoothed": True})
