"""
Tests for the SVG timeline figures and the report summary
"""

import os
from pathlib import Path

import pytest

from lakeice.core.exceptions import InvalidInputError
from lakeice.core.models import LipEvent, PhenologyRecord, SynthTruth
from lakeice.core.seasons import WinterSeason
from lakeice.phenology.fitting import fit_phenology
from lakeice.phenology.model import model_nf
from lakeice.reporting.summary import (
    build_summary,
    format_phenology_summary,
    recovery_report,
    write_summary_json,
)
from lakeice.reporting.svg import render_svg_timeline, write_svg_timeline
from lakeice.timeline.smoothing import gaussian_smooth

GOLDEN = Path(__file__).parent / "golden" / "timeline_sils_2003-04.svg"


@pytest.fixture
def step_winter(make_timeline):
    dates = (100, 103, 200, 204)
    raw = make_timeline([(d, model_nf(d, dates)) for d in range(60, 250, 2)])
    smoothed = gaussian_smooth(raw)
    return raw, smoothed, fit_phenology(smoothed)


def test_svg_has_marker_per_event(step_winter):
    """Test one marker per present event and all layers drawn"""
    raw, smoothed, record = step_winter
    assert record.complete
    svg = render_svg_timeline(raw, record, smoothed)
    assert svg.startswith('<?xml version="1.0" encoding="UTF-8"?>')
    assert svg.count('class="event-marker"') == 4
    for event in ("FUS", "FUE", "BUS", "BUE"):
        assert f'data-event="{event}"' in svg
    assert svg.count("<circle") == len(raw)
    assert 'class="fit"' in svg
    assert 'class="smoothed"' in svg


def test_svg_points_only(make_timeline):
    """Test that a timeline without events draws only its points"""
    raw = make_timeline([(d, 100.0) for d in range(0, 200, 10)])
    record = fit_phenology(raw)
    svg = render_svg_timeline(raw, record)
    assert 'class="event-marker"' not in svg
    assert 'class="fit"' not in svg
    assert 'class="smoothed"' not in svg
    assert svg.count("<circle") == 20


def test_svg_partial_record(make_timeline):
    """Test markers for the present events of an incomplete winter"""
    raw = make_timeline([(90, 100.0), (100, 0.0), (180, 0.0)])
    record = fit_phenology(raw)
    svg = render_svg_timeline(raw, record)
    assert svg.count('class="event-marker"') == 2


def test_svg_empty_timeline(make_timeline):
    """Test that an empty timeline cannot be drawn"""
    with pytest.raises(InvalidInputError):
        render_svg_timeline(make_timeline([]))


def test_svg_matches_golden(tmp_path, make_timeline):
    """Test the rendered document against the stored golden file"""
    days = (60, 90, 101, 120, 160, 202, 230, 260)
    raw_nf = (100.0, 100.0, 66.0, 0.0, 0.0, 50.0, 100.0, 100.0)
    smooth_nf = (100.0, 97.5, 60.25, 2.5, 0.0, 45.0, 95.0, 100.0)
    raw = make_timeline(list(zip(days, raw_nf, strict=True)))
    smoothed = make_timeline(list(zip(days, smooth_nf, strict=True)), smoothed=True)
    record = PhenologyRecord(
        lake_id="sils", season=raw.season, fus=100, fue=103, bus=200, bue=204, complete=True
    )
    assert GOLDEN.is_file(), f"golden file missing: {GOLDEN}"

    path = write_svg_timeline(tmp_path / "figure.svg", raw, record, smoothed)
    rendered = path.read_text(encoding="utf-8")
    if os.environ.get("LAKEICE_UPDATE_GOLDEN") == "1":
        GOLDEN.write_text(rendered, encoding="utf-8")
    assert rendered == GOLDEN.read_text(encoding="utf-8")
    assert render_svg_timeline(raw, record, smoothed) == rendered


def truth(lake_id: str, winter: str, dates: tuple[int, int, int, int]) -> SynthTruth:
    return SynthTruth(
        lake_id=lake_id,
        winter=winter,
        fus=dates[0],
        fue=dates[1],
        bus=dates[2],
        bue=dates[3],
        shape_dates=dates,
        daily_frozen_fraction=[],
    )


def test_recovery_report():
    """Test tolerance shares with a missing record and a missing event"""
    season = WinterSeason(start_year=2010)
    truths = [
        truth("sils", "2010-11", (100, 105, 200, 205)),
        truth("sils", "2011-12", (110, 112, 210, 211)),
        truth("silvaplana", "2010-11", (90, 95, 190, 195)),
    ]
    records = [
        PhenologyRecord(lake_id="sils", season=season, fus=101, fue=108, bus=200, bue=None),
        PhenologyRecord(
            lake_id="silvaplana", season=season, fus=90, fue=95, bus=190, bue=195, complete=True
        ),
    ]
    report = recovery_report(records, truths)
    assert report.n_events == 12
    assert report.n_missing == 5
    assert report.within_2_days == pytest.approx(6 / 12)
    assert report.within_7_days == pytest.approx(7 / 12)
    errors = [d.error_days for d in report.deviations[:4]]
    assert errors == [1, 3, 0, None]


def test_summary_tables(tmp_path):
    """Test the per lake-winter CSV and summary.json"""
    season = WinterSeason(start_year=2016)
    records = [
        PhenologyRecord(
            lake_id="sils",
            season=season,
            fus=121,
            fue=124,
            bus=238,
            bue=241,
            icd_days=120,
            cfd_days=114,
            complete=True,
            fit_loss=1.5,
        ),
        PhenologyRecord(lake_id="silvaplana", season=season, fus=130),
    ]
    lines = format_phenology_summary(records).splitlines()
    assert lines[0] == "lake_id,winter,fus,fue,bus,bue,icd_days,cfd_days,complete,corrected,fit_loss"
    assert lines[1] == "sils,2016-17,2016-12-31,2017-01-03,2017-04-27,2017-04-30,120,114,1,0,1.5"
    assert lines[2] == "silvaplana,2016-17,2017-01-09,,,,,,0,0,0.0"

    summary = build_summary(records)
    assert (summary.n_records, summary.n_complete, summary.n_corrected) == (2, 1, 0)
    assert summary.recovery is None
    assert summary.reference["reproducible"] is False
    assert summary.lakes[0].mean_days[LipEvent.CFD] == 114.0
    text = write_summary_json(tmp_path / "summary.json", summary).read_text(encoding="utf-8")
    assert '"n_records": 2' in text
