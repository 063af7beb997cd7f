"""
The "U with wings" non-frozen model, the date prior and the fit loss

    L = (1 / P) * sum_i H_phi(nf_i - model_nf(day_i))

Residuals are in percentage points. P is the product of unnormalised
Gaussian factors exp(-(d_e - mu_e)^2 / (2 sigma^2)) over the events.
"""

import math
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from lakeice.core.config import PriorConfig
from lakeice.core.exceptions import ConstraintViolationError
from lakeice.core.models import WinterTimeline, check_event_order
from lakeice.core.numerics import DEFAULT_HUBER_PHI, huber_array
from lakeice.core.seasons import WinterSeason


class EventDates(NamedTuple):
    fus: int
    fue: int
    bus: int
    bue: int


def _require_ordered(dates: Sequence[int]) -> None:
    fus, fue, bus, bue = dates
    if not fus <= fue <= bus <= bue:
        raise ConstraintViolationError(f"Dates must satisfy FUS <= FUE <= BUS <= BUE, got {tuple(dates)}")


def model_nf_array(days: ArrayLike, dates: Sequence[int]) -> NDArray[np.float64]:
    """Vectorised model_nf(); dates are not validated"""
    fus, fue, bus, bue = dates
    t = np.asarray(days, dtype=np.float64)
    freezing = 100.0 * (fue - t) / (fue - fus) if fue > fus else np.zeros_like(t)
    thawing = 100.0 * (t - bus) / (bue - bus) if bue > bus else np.zeros_like(t)
    return np.select(
        [t < fus, t < fue, t < bus, t < bue],
        [np.full_like(t, 100.0), freezing, np.zeros_like(t), thawing],
        default=100.0,
    )


def model_nf(t: float, dates: Sequence[int]) -> float:
    """
    Non-frozen percentage predicted for day t.

    100 before FUS, a linear ramp to 0 at FUE, 0 up to BUS, a linear ramp to
    100 at BUE and 100 after. With FUS = FUE (or BUS = BUE) the transition is
    a step: the event day already shows the new state.

    Raises:
        ConstraintViolationError: If the dates are not ordered
    """
    _require_ordered(dates)
    return float(model_nf_array([t], dates)[0])


def prior_factor(day: int, mean: int, sigma_days: float) -> float:
    return math.exp(-((day - mean) ** 2) / (2.0 * sigma_days**2))


def prior_weight(dates: Sequence[int], cfg: PriorConfig, season: WinterSeason) -> float:
    """Unnormalised product of the four Gaussian date factors"""
    weight = 1.0
    for day, mean in zip(dates, cfg.means(season), strict=True):
        weight *= prior_factor(day, mean, cfg.sigma_days)
    return weight


def huber_sum(
    days: ArrayLike, values: ArrayLike, dates: Sequence[int], phi: float = DEFAULT_HUBER_PHI
) -> float:
    residuals = np.asarray(values, dtype=np.float64) - model_nf_array(days, dates)
    return float(np.sum(huber_array(residuals, phi)))


def fit_loss(
    tl: WinterTimeline,
    dates: Sequence[int],
    cfg: PriorConfig,
    phi: float = DEFAULT_HUBER_PHI,
) -> float:
    """
    Prior-weighted robust loss of one date tuple.

    Raises:
        ConstraintViolationError: If the dates break ordering or the 14-day caps
    """
    _require_ordered(dates)
    try:
        check_event_order(*dates)
    except ValueError as e:
        raise ConstraintViolationError(str(e)) from e
    total = huber_sum(tl.days, tl.nf_values, dates, phi)
    if total == 0.0:
        return 0.0
    return total / prior_weight(dates, cfg, tl.season)
