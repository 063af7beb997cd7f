"""
Tests for candidate extraction, the ice model, the constrained date fit,
manual overrides and the phenology JSON
"""

import itertools
import math
from datetime import date

import numpy as np
import pytest

from lakeice.core.config import PriorConfig
from lakeice.core.exceptions import ConstraintViolationError, InvalidInputError
from lakeice.core.models import LipEvent, PhenologyRecord, TimelinePoint, WinterTimeline
from lakeice.core.numerics import huber
from lakeice.core.seasons import WinterSeason, day_of_winter
from lakeice.phenology.candidates import extract_candidates
from lakeice.phenology.fitting import derive_durations, effective_dates, fit_phenology
from lakeice.phenology.io import read_phenology_json, write_phenology_json
from lakeice.phenology.model import fit_loss, model_nf, prior_weight
from lakeice.phenology.overrides import (
    apply_override_file,
    apply_overrides,
    load_overrides,
)
from lakeice.phenology.summary import calendar_label, event_averages

EVENTS = ("fus", "fue", "bus", "bue")


def test_candidates_crossing_low_threshold(make_timeline):
    """Test that frozen 20% -> 35% makes the second day a freeze-up start"""
    candidates = extract_candidates(make_timeline([(50, 80.0), (52, 65.0)]))
    assert candidates.fus == [52]
    assert candidates.fue == candidates.bus == candidates.bue == []


def test_candidates_none_on_constant_open_lake(make_timeline):
    """Test that a lake that never freezes has no candidates"""
    candidates = extract_candidates(make_timeline([(d, 100.0) for d in range(0, 270, 5)]))
    assert candidates.counts() == {"fus": 0, "fue": 0, "bus": 0, "bue": 0}


def test_candidates_need_a_previous_point(make_timeline):
    """Test that the first admitted point is never a candidate"""
    assert extract_candidates(make_timeline([(10, 0.0)])).counts()["fus"] == 0


@pytest.mark.parametrize(
    "t,expected",
    [(50, 100.0), (100, 100.0), (105, 50.0), (110, 0.0), (150, 0.0), (205, 50.0), (210, 100.0), (260, 100.0)],
)
def test_model_nf_ramps(t, expected):
    """Test plateaus, wings and ramp midpoints"""
    assert model_nf(t, (100, 110, 200, 210)) == pytest.approx(expected)


@pytest.mark.parametrize("t,expected", [(99, 100.0), (100, 0.0), (199, 0.0), (200, 100.0)])
def test_model_nf_steps(t, expected):
    """Test that a zero-length transition shows the new state on its day"""
    assert model_nf(t, (100, 100, 200, 200)) == expected


def test_model_nf_rejects_disorder():
    """Test that unordered dates are refused"""
    with pytest.raises(ConstraintViolationError):
        model_nf(10, (100, 90, 200, 210))


def test_prior_weight(season):
    """Test weight 1 at the means and exp(-1/2) one sigma away"""
    cfg = PriorConfig()
    means = cfg.means(season)
    assert prior_weight(means, cfg, season) == 1.0
    shifted = (means[0], means[1], means[2] + 30, means[3] + 30)
    assert prior_weight(shifted, cfg, season) == pytest.approx(math.exp(-1.0), abs=1e-12)
    one_off = (means[0] - 30, means[1], means[2], means[3])
    assert prior_weight(one_off, cfg, season) == pytest.approx(math.exp(-0.5), abs=1e-12)


def test_prior_weight_scales_with_sigma(season):
    """Test that the log prior scales with 1 / sigma^2 and widens as sigma grows"""
    rng = np.random.default_rng(2)
    base = PriorConfig(sigma_days=10.0)
    means = base.means(season)
    for _ in range(20):
        offsets = rng.integers(-25, 26, size=4)
        dates = tuple(sorted(int(m + o) for m, o in zip(means, offsets, strict=True)))
        log_base = math.log(prior_weight(dates, base, season))
        for sigma in (5.0, 20.0, 45.0):
            cfg = PriorConfig(sigma_days=sigma)
            log_w = math.log(prior_weight(dates, cfg, season))
            assert log_w * sigma**2 == pytest.approx(log_base * 10.0**2, rel=1e-9, abs=1e-9)
            if sigma > 10.0:
                assert prior_weight(dates, cfg, season) >= prior_weight(dates, base, season)


def test_fit_loss_exact_and_off_by_one(make_timeline):
    """Test zero loss on model data and 1.0 for a single unit residual"""
    cfg = PriorConfig()
    dates = (100, 105, 200, 205)
    exact = make_timeline([(d, model_nf(d, dates)) for d in range(80, 230, 3)])
    assert fit_loss(exact, dates, cfg) == 0.0

    tl = make_timeline([(0, 99.0)])
    assert fit_loss(tl, cfg.means(tl.season), cfg) == pytest.approx(1.0, abs=1e-12)


def test_fit_loss_rejects_long_transition(make_timeline):
    """Test the two-week cap on freeze-up"""
    with pytest.raises(ConstraintViolationError):
        fit_loss(make_timeline([(0, 100.0)]), (100, 120, 200, 205), PriorConfig())


def test_effective_dates():
    """Test completion of partial tuples"""
    assert effective_dates((None, None, None, None), 273) == (273, 273, 273, 273)
    assert effective_dates((None, None, 200, 205), 273) == (-1, -1, 200, 205)
    assert effective_dates((100, 104, None, None), 273) == (100, 104, 273, 273)
    assert effective_dates((None, 104, 200, None), 273) == (104, 104, 200, 200)


def test_fit_recovers_step_transitions(make_timeline):
    """Test exact recovery when both transitions are steps"""
    dates = (100, 100, 200, 200)
    tl = make_timeline([(d, model_nf(d, dates)) for d in range(90, 216)], smoothed=True)
    record = fit_phenology(tl)
    assert (record.fus, record.fue, record.bus, record.bue) == dates
    assert record.complete
    assert record.fit_loss == 0.0
    assert (record.icd_days, record.cfd_days) == (100, 100)


def test_fit_silvaplana_noisy_freeze_up(make_timeline):
    """Test that early-January noise below 30% frozen is ignored"""
    frozen = [
        (date(2003, 12, 1), 0.0),
        (date(2004, 1, 1), 4.0),
        (date(2004, 1, 2), 13.0),
        (date(2004, 1, 3), 0.0),
        (date(2004, 1, 4), 21.0),
        (date(2004, 1, 5), 0.0),
        (date(2004, 1, 14), 100.0),
        (date(2004, 1, 21), 100.0),
        (date(2004, 4, 25), 100.0),
        (date(2004, 4, 27), 50.0),
        (date(2004, 4, 29), 0.0),
        (date(2004, 5, 10), 0.0),
    ]
    tl = make_timeline([(d, 100.0 - f) for d, f in frozen], lake_id="silvaplana")
    record = fit_phenology(tl)
    season = WinterSeason(start_year=2003)
    expected = [date(2004, 1, 14), date(2004, 1, 14), date(2004, 4, 27), date(2004, 4, 29)]
    assert [record.fus, record.fue, record.bus, record.bue] == [day_of_winter(d, season) for d in expected]
    assert record.complete
    assert record.candidates_counts == {"fus": 1, "fue": 1, "bus": 1, "bue": 1}


def test_fit_sils_fast_freeze_and_single_day_break_up(make_timeline):
    """Test a one-day freeze-up and a break-up jumping past both thresholds"""
    frozen = [
        (date(2003, 12, 31), 0.0),
        (date(2004, 1, 1), 68.0),
        (date(2004, 1, 2), 90.0),
        (date(2004, 2, 1), 100.0),
        (date(2004, 4, 20), 75.0),
        (date(2004, 4, 26), 29.9),
        (date(2004, 5, 5), 0.0),
    ]
    tl = make_timeline([(d, 100.0 - f) for d, f in frozen])
    record = fit_phenology(tl)
    season = WinterSeason(start_year=2003)
    expected = [date(2004, 1, 1), date(2004, 1, 2), date(2004, 4, 26), date(2004, 4, 26)]
    assert [record.fus, record.fue, record.bus, record.bue] == [day_of_winter(d, season) for d in expected]


def test_fit_open_winter_is_incomplete(make_timeline):
    """Test that a lake that never freezes gets no events"""
    record = fit_phenology(make_timeline([(d, 100.0) for d in range(0, 270, 7)]))
    assert record.dates() == {"fus": None, "fue": None, "bus": None, "bue": None}
    assert not record.complete
    assert record.fit_loss == 0.0
    assert record.icd_days is None


def test_fit_without_break_up(make_timeline):
    """Test a winter whose break-up lies beyond the last acquisition"""
    record = fit_phenology(make_timeline([(90, 100.0), (100, 0.0), (180, 0.0)]))
    assert (record.fus, record.fue) == (100, 100)
    assert record.bus is None and record.bue is None
    assert not record.complete
    assert record.cfd_days is None


def test_fit_drops_events_when_candidates_conflict(make_timeline):
    """Test that an early break-up candidate before any freeze-up keeps two events"""
    record = fit_phenology(make_timeline([(100, 0.0), (105, 100.0), (110, 0.0)]))
    assert not record.complete
    assert sum(d is not None for d in record.dates().values()) == 2


def test_fit_empty_timeline(make_timeline):
    """Test that no admitted points give an all-absent record"""
    record = fit_phenology(make_timeline([]))
    assert record.dates() == {"fus": None, "fue": None, "bus": None, "bue": None}
    assert not record.complete


def oracle_candidates(days: list[int], nf: list[float]) -> dict[str, list[int]]:
    out: dict[str, list[int]] = {e: [] for e in EVENTS}
    for i in range(1, len(days)):
        prev_frozen, frozen = 100.0 - nf[i - 1], 100.0 - nf[i]
        for event, cur, prev, threshold in (
            ("fus", frozen, prev_frozen, 30.0),
            ("fue", frozen, prev_frozen, 70.0),
            ("bus", nf[i], nf[i - 1], 30.0),
            ("bue", nf[i], nf[i - 1], 70.0),
        ):
            if cur >= threshold and prev < threshold:
                out[event].append(days[i])
    return out


def oracle_feasible(dates: tuple) -> bool:
    present = [d for d in dates if d is not None]
    if present != sorted(present):
        return False
    fus, fue, bus, bue = dates
    if fus is not None and fue is not None and fue - fus > 14:
        return False
    return not (bus is not None and bue is not None and bue - bus > 14)


def oracle_effective(dates: tuple, length: int) -> tuple[int, int, int, int]:
    fus, fue, bus, bue = dates
    if all(d is None for d in dates):
        return (length,) * 4
    if fus is None and fue is None:
        freeze = (-1, -1)
    elif fus is None:
        freeze = (fue, fue)
    elif fue is None:
        freeze = (fus, fus)
    else:
        freeze = (fus, fue)
    if bus is None and bue is None:
        thaw = (length, length)
    elif bus is None:
        thaw = (bue, bue)
    elif bue is None:
        thaw = (bus, bus)
    else:
        thaw = (bus, bue)
    return freeze + thaw


def oracle_nf(t: int, dates: tuple[int, int, int, int]) -> float:
    fus, fue, bus, bue = dates
    if t < fus:
        return 100.0
    if t < fue:
        return 100.0 * (fue - t) / (fue - fus)
    if t < bus:
        return 0.0
    if t < bue:
        return 100.0 * (t - bus) / (bue - bus)
    return 100.0


def oracle_loss(tl: WinterTimeline, dates: tuple, cfg: PriorConfig) -> float:
    eff = oracle_effective(dates, tl.season.length)
    total = sum(huber(p.nf_percent - oracle_nf(p.day, eff)) for p in tl.points)
    if total == 0.0:
        return 0.0
    weight = 1.0
    for day, mean in zip(dates, cfg.means(tl.season)):
        if day is not None:
            weight *= math.exp(-((day - mean) ** 2) / (2.0 * cfg.sigma_days**2))
    return total / weight


def random_timeline(rng: np.random.Generator) -> WinterTimeline:
    season = WinterSeason(start_year=int(rng.integers(2000, 2020)))
    while True:
        n = int(rng.integers(6, 26))
        days = sorted(int(d) for d in rng.choice(season.length, size=n, replace=False))
        if rng.random() < 0.5:
            fus = int(rng.integers(60, 150))
            fue = fus + int(rng.integers(0, 15))
            bus = int(rng.integers(fue + 20, 245))
            bue = min(bus + int(rng.integers(0, 15)), season.length - 1)
            values = [
                float(np.clip(oracle_nf(d, (fus, fue, bus, bue)) + rng.normal(0.0, 15.0), 0.0, 100.0))
                for d in days
            ]
        else:
            values = [float(v) for v in rng.uniform(0.0, 100.0, size=n)]
        if max(len(c) for c in oracle_candidates(days, values).values()) <= 5:
            break
    points = [TimelinePoint(day=d, nf_percent=v, cloud_free=1.0, n_pixels=10) for d, v in zip(days, values)]
    return WinterTimeline(lake_id="oracle", season=season, points=points, smoothed=True)


def test_fit_matches_brute_force_oracle():
    """Test the date search against exhaustive enumeration on random timelines"""
    rng = np.random.default_rng(2024)
    cfg = PriorConfig()
    incomplete = 0
    for _ in range(150):
        tl = random_timeline(rng)
        candidates = oracle_candidates(tl.days, tl.nf_values)
        options = [candidates[e] or [None] for e in EVENTS]
        tuples = [t for t in itertools.product(*options) if oracle_feasible(t)]
        if not tuples:
            options = [candidates[e] + [None] for e in EVENTS]
            tuples = [t for t in itertools.product(*options) if oracle_feasible(t)]
            most = max(sum(d is not None for d in t) for t in tuples)
            tuples = [t for t in tuples if sum(d is not None for d in t) == most]
        losses = {t: oracle_loss(tl, t, cfg) for t in tuples}
        best = min(losses.values())
        near = [t for t, loss in losses.items() if loss <= best + 1e-9 * max(best, 1.0)]

        record = fit_phenology(tl, cfg)
        found = (record.fus, record.fue, record.bus, record.bue)
        assert found in near, (tl.season.id, tl.days, tl.nf_values)
        assert record.fit_loss == pytest.approx(best, rel=1e-9, abs=1e-12)
        assert record.candidates_counts == {e: len(candidates[e]) for e in EVENTS}
        assert record.complete == all(d is not None for d in found)
        incomplete += not record.complete
    assert incomplete > 0


def test_derive_durations(season):
    """Test ICD = BUE - FUS and CFD = BUS - FUE"""
    record = PhenologyRecord(lake_id="sils", season=season, fus=124, fue=127, bus=240, bue=241)
    derived = derive_durations(record)
    assert (derived.icd_days, derived.cfd_days) == (117, 113)
    partial = derive_durations(record.model_copy(update={"bue": None}))
    assert (partial.icd_days, partial.cfd_days) == (None, 113)


def fitted_sils_2009() -> PhenologyRecord:
    season = WinterSeason(start_year=2009)
    return derive_durations(
        PhenologyRecord(
            lake_id="sils",
            season=season,
            fus=day_of_winter(date(2009, 12, 28), season),
            fue=day_of_winter(date(2010, 1, 2), season),
            bus=day_of_winter(date(2010, 3, 30), season),
            bue=day_of_winter(date(2010, 4, 2), season),
            complete=True,
        )
    )


def test_apply_overrides_sils_2009():
    """Test that corrected break-up dates replace the fit and keep the original"""
    record = fitted_sils_2009()
    season = record.season
    corrected = apply_overrides(
        record,
        {
            LipEvent.BUS: day_of_winter(date(2010, 4, 29), season),
            LipEvent.BUE: day_of_winter(date(2010, 4, 30), season),
        },
        "cloudy April",
    )
    assert corrected.corrected
    assert corrected.override_note == "cloudy April"
    assert corrected.bue == day_of_winter(date(2010, 4, 30), season)
    assert corrected.original == record.dates()
    assert corrected.icd_days == corrected.bue - corrected.fus
    assert corrected.cfd_days == corrected.bus - corrected.fue


def test_apply_overrides_empty_and_invalid():
    """Test that no overrides change nothing and bad corrections are refused"""
    record = fitted_sils_2009()
    assert apply_overrides(record, {}) == record
    with pytest.raises(ConstraintViolationError):
        apply_overrides(record, {LipEvent.BUE: record.bus - 1})
    with pytest.raises(InvalidInputError):
        apply_overrides(record, {LipEvent.ICD: 10})


def test_override_file(tmp_path):
    """Test loading and applying the YAML overrides file"""
    path = tmp_path / "overrides.yaml"
    path.write_text(
        "sils:\n"
        "  2009-10:\n"
        "    events: {bus: 2010-04-29, bue: 2010-04-30}\n"
        "    note: obvious fit failure\n"
        "silvaplana:\n"
        "  2009-10:\n"
        "    events: {fus: 2009-12-20}\n",
        encoding="utf-8",
    )
    overrides = load_overrides(path)
    assert set(overrides) == {("sils", "2009-10"), ("silvaplana", "2009-10")}
    (corrected,) = apply_override_file([fitted_sils_2009()], overrides)
    assert corrected.corrected
    assert corrected.override_note == "obvious fit failure"

    path.write_text("sils:\n  2009-10:\n    events: {icd: 2010-04-29}\n", encoding="utf-8")
    with pytest.raises(InvalidInputError):
        load_overrides(path)


def test_phenology_json_round_trip(tmp_path):
    """Test that records survive the JSON with ISO dates"""
    season = WinterSeason(start_year=2015)
    corrected = apply_overrides(fitted_sils_2009(), {LipEvent.FUS: 110}, "manual")
    records = [
        corrected,
        PhenologyRecord(lake_id="silvaplana", season=season, fus=150, fit_loss=12.5),
    ]
    path = write_phenology_json(tmp_path / "phenology.json", records)
    assert '"fus": "2009-12-20"' in path.read_text(encoding="utf-8")
    assert read_phenology_json(path) == records


def test_event_averages():
    """Test per-lake means over present values and their calendar labels"""
    season = WinterSeason(start_year=2016)
    records = [
        PhenologyRecord(lake_id="sils", season=season, fus=121, fue=123, icd_days=100),
        PhenologyRecord(lake_id="sils", season=season, fus=123, icd_days=110),
        PhenologyRecord(lake_id="silvaplana", season=season),
    ]
    sils, silvaplana = event_averages(records)
    assert sils.n_winters == 2
    assert sils.mean_days[LipEvent.FUS] == 122.0
    assert sils.mean_dates[LipEvent.FUS] == "01-01"
    assert sils.mean_days[LipEvent.ICD] == 105.0
    assert sils.mean_dates[LipEvent.ICD] is None
    assert silvaplana.mean_days[LipEvent.BUE] is None
    assert calendar_label(121.5) == "01-01"
    assert calendar_label(0) == "09-01"
