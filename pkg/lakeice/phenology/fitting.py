"""
Exhaustive constrained fit of the four LIP dates

Every tuple of candidate days that keeps FUS <= FUE <= BUS <= BUE and both
transitions within 14 days is scored with the prior-weighted Huber loss; the
lowest loss wins and ties go to the lexicographically earliest tuple.

When an event has no candidate the winter is incomplete. A transition with
no candidates at all is placed outside the season (freeze-up before Sep 1,
break-up after May 31); a single missing event is collapsed onto its partner
for fitting and reported absent. A winter without any candidate is scored
against a permanently open lake.
"""

import itertools
import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray

from lakeice.core.config import PriorConfig
from lakeice.core.models import DATE_EVENTS, PhenologyRecord, WinterTimeline, check_event_order
from lakeice.core.numerics import DEFAULT_HUBER_PHI, huber_array
from lakeice.phenology.candidates import EventCandidates, extract_candidates
from lakeice.phenology.model import EventDates, huber_sum, model_nf_array, prior_factor

logger = logging.getLogger(__name__)

Option = int | None
DateTuple = tuple[Option, Option, Option, Option]

# relative gap under which screened losses are re-scored exactly
_NEAR_TIE = 1e-9


def _sort_key(dates: DateTuple) -> tuple[float, ...]:
    return tuple(math.inf if d is None else d for d in dates)


def effective_dates(dates: DateTuple, season_length: int) -> EventDates:
    """Complete a partial tuple for evaluating the model"""
    fus, fue, bus, bue = dates
    if all(d is None for d in dates):
        return EventDates(season_length, season_length, season_length, season_length)
    if fus is None and fue is None:
        freeze = (-1, -1)
    else:
        freeze = (fus if fus is not None else fue, fue if fue is not None else fus)  # type: ignore[assignment]
    if bus is None and bue is None:
        thaw = (season_length, season_length)
    else:
        thaw = (bus if bus is not None else bue, bue if bue is not None else bus)  # type: ignore[assignment]
    return EventDates(freeze[0], freeze[1], thaw[0], thaw[1])


def _feasible(dates: DateTuple) -> bool:
    try:
        check_event_order(*dates)
    except ValueError:
        return False
    return True


class _Scorer:
    """Loss evaluation for one timeline, with a prefix-sum screening path"""

    def __init__(self, tl: WinterTimeline, cfg: PriorConfig, phi: float):
        self.tl = tl
        self.phi = phi
        self.days = np.asarray(tl.days, dtype=np.float64)
        self.values = np.asarray(tl.nf_values, dtype=np.float64)
        self.length = tl.season.length
        self.means = cfg.means(tl.season)
        self.sigma = cfg.sigma_days
        self._freeze: dict[tuple[int, int], NDArray[np.float64]] = {}
        self._thaw: dict[tuple[int, int], NDArray[np.float64]] = {}

    def prior(self, dates: DateTuple) -> float:
        weight = 1.0
        for day, mean in zip(dates, self.means, strict=True):
            if day is not None:
                weight *= prior_factor(day, mean, self.sigma)
        return weight

    def _residual_terms(self, dates: EventDates) -> NDArray[np.float64]:
        return huber_array(self.values - model_nf_array(self.days, dates), self.phi)

    def _freeze_prefix(self, a: int, b: int) -> NDArray[np.float64]:
        if (a, b) not in self._freeze:
            # break-up pushed past the season leaves only the freeze-up shape
            terms = self._residual_terms(EventDates(a, b, self.length, self.length))
            self._freeze[(a, b)] = np.concatenate([[0.0], np.cumsum(terms)])
        return self._freeze[(a, b)]

    def _thaw_suffix(self, c: int, e: int) -> NDArray[np.float64]:
        if (c, e) not in self._thaw:
            terms = self._residual_terms(EventDates(-1, -1, c, e))
            self._thaw[(c, e)] = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])
        return self._thaw[(c, e)]

    def screen(self, dates: DateTuple) -> float:
        eff = effective_dates(dates, self.length)
        split = int(np.searchsorted(self.days, eff.bus, side="left"))
        total = self._freeze_prefix(eff.fus, eff.fue)[split] + self._thaw_suffix(eff.bus, eff.bue)[split]
        return float(total) / self.prior(dates)

    def exact(self, dates: DateTuple) -> float:
        total = huber_sum(self.days, self.values, effective_dates(dates, self.length), self.phi)
        if total == 0.0:
            return 0.0
        return total / self.prior(dates)


def _best(scorer: _Scorer, tuples: Sequence[DateTuple]) -> tuple[DateTuple, float]:
    screened = [scorer.screen(t) for t in tuples]
    floor = min(screened)
    best: DateTuple | None = None
    best_loss = math.inf
    for dates, approx in zip(tuples, screened, strict=True):
        if approx > floor + _NEAR_TIE * max(abs(floor), 1.0):
            continue
        loss = scorer.exact(dates)
        if loss < best_loss:
            best, best_loss = dates, loss
    assert best is not None
    return best, best_loss


def search_dates(
    tl: WinterTimeline, candidates: EventCandidates, cfg: PriorConfig, phi: float = DEFAULT_HUBER_PHI
) -> tuple[DateTuple, float]:
    """
    Lowest-loss feasible date tuple.

    Events without candidates are absent. If no feasible tuple exists over
    the candidate lists, events may additionally be left out, keeping as
    many events as possible.
    """
    scorer = _Scorer(tl, cfg, phi)
    lists = [candidates.of(e) for e in DATE_EVENTS]

    options = [sorted(c) if c else [None] for c in lists]
    tuples = [t for t in itertools.product(*options) if _feasible(t)]
    if not tuples:
        options = [sorted(c) + [None] for c in lists]
        tuples = [t for t in itertools.product(*options) if _feasible(t)]
        most = max(sum(d is not None for d in t) for t in tuples)
        tuples = [t for t in tuples if sum(d is not None for d in t) == most]
        logger.debug(
            "%s %s: no feasible tuple over all candidates, keeping %d events",
            tl.lake_id,
            tl.season.id,
            most,
        )
    tuples.sort(key=_sort_key)
    return _best(scorer, tuples)


def derive_durations(record: PhenologyRecord) -> PhenologyRecord:
    """Fill ICD = BUE - FUS and CFD = BUS - FUE where both ends are present"""
    icd = record.bue - record.fus if record.bue is not None and record.fus is not None else None
    cfd = record.bus - record.fue if record.bus is not None and record.fue is not None else None
    return record.model_copy(update={"icd_days": icd, "cfd_days": cfd})


def fit_phenology(
    tl: WinterTimeline, cfg: PriorConfig | None = None, phi: float = DEFAULT_HUBER_PHI
) -> PhenologyRecord:
    """
    Fit FUS, FUE, BUS and BUE to a smoothed winter timeline.

    Args:
        tl: Smoothed timeline of admitted acquisitions
        cfg: Date prior (defaults: Dec 31, Jan 3, Apr 27, Apr 30; sigma 30 days)
        phi: Huber shape parameter

    Returns:
        PhenologyRecord; complete is False when an event could not be placed
    """
    cfg = cfg or PriorConfig()
    if not tl.points:
        logger.warning("%s %s: empty timeline, no events fitted", tl.lake_id, tl.season.id)
        return PhenologyRecord(lake_id=tl.lake_id, season=tl.season)

    candidates = extract_candidates(tl)
    dates, loss = search_dates(tl, candidates, cfg, phi)
    fus, fue, bus, bue = dates
    record = PhenologyRecord(
        lake_id=tl.lake_id,
        season=tl.season,
        fus=fus,
        fue=fue,
        bus=bus,
        bue=bue,
        fit_loss=loss,
        complete=all(d is not None for d in dates),
        candidates_counts=candidates.counts(),
    )
    if not record.complete:
        missing = [e.value for e, d in zip(DATE_EVENTS, dates, strict=True) if d is None]
        logger.info("%s %s: incomplete winter, missing %s", tl.lake_id, tl.season.id, ", ".join(missing))
    return derive_durations(record)
