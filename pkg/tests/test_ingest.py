"""
Tests for rasters, outlines, sensor presets and CSV formats
"""

from datetime import date, timedelta

import numpy as np
import pytest

from lakeice.core.exceptions import (
    DegenerateGeometryError,
    InvalidInputError,
    MissingInputError,
    ParseError,
)
from lakeice.core.models import (
    ClimateSeries,
    DailyWeather,
    PixelLabel,
    PixelPrediction,
    PixelSample,
    Sensor,
)
from lakeice.ingest.outlines import (
    LakeOutline,
    extract_clean_pixels,
    load_clean_pixels,
    outline_grid,
    parse_outline,
    write_outline,
)
from lakeice.ingest.rasters import (
    BandGrid,
    CloudMask,
    apply_geolocation_shift,
    cloud_free_fraction,
    cloud_mask_from_grid,
    upsample_band,
)
from lakeice.ingest.sensors import SENSOR_PROFILES, correct_geolocation
from lakeice.ingest.tables import (
    format_samples_csv,
    parse_meteo_csv,
    parse_meteo_stations,
    parse_predictions_csv,
    parse_samples_csv,
    write_meteo_csv,
    write_predictions_csv,
    write_samples_csv,
)
from lakeice.synth.layout import lake_layout


def bilinear_oracle(values: np.ndarray, x: float, y: float) -> float:
    """Textbook bilinear formula on the four surrounding lattice points"""
    h, w = values.shape
    x0, y0 = int(np.floor(x)), int(np.floor(y))
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    fx, fy = x - x0, y - y0
    return (
        values[y0, x0] * (1 - fx) * (1 - fy)
        + values[y0, x1] * fx * (1 - fy)
        + values[y1, x0] * (1 - fx) * fy
        + values[y1, x1] * fx * fy
    )


def grid(values) -> BandGrid:
    return BandGrid(values=values, gsd_m=250.0)


def test_zero_shift_is_identity():
    """Test that a zero shift returns the input unchanged"""
    g = grid(np.arange(12.0).reshape(3, 4))
    assert np.array_equal(apply_geolocation_shift(g, 0.0, 0.0).values, g.values)


def test_half_pixel_shift_midpoint():
    """Test the bilinear midpoint of a 2x2 grid"""
    shifted = apply_geolocation_shift(grid([[0.0, 1.0], [0.0, 1.0]]), 0.5, 0.0)
    assert shifted.values[0, 0] == 0.5
    assert shifted.values[1, 0] == 0.5
    # source position 1.5 lies outside the grid
    assert np.isnan(shifted.values[0, 1])


def test_modis_shift_matches_bilinear_formula():
    """Test the MODIS correction on a ramp against the direct formula"""
    rows, cols = np.mgrid[0:6, 0:7]
    values = 3.0 * cols + 5.0 * rows + 0.25 * rows * cols
    shifted = apply_geolocation_shift(grid(values), 0.75, 0.85)
    for r in range(5):
        for c in range(6):
            expected = bilinear_oracle(values, c + 0.75, r + 0.85)
            assert shifted.values[r, c] == pytest.approx(expected, abs=1e-12)
    assert np.isnan(shifted.values[5, 0])
    assert np.isnan(shifted.values[0, 6])


def test_shift_errors():
    """Test that empty grids and oversized shifts are rejected"""
    with pytest.raises(InvalidInputError):
        apply_geolocation_shift(grid(np.zeros((0, 3))), 0.5, 0.5)
    with pytest.raises(InvalidInputError):
        apply_geolocation_shift(grid(np.zeros((3, 3))), 3.0, 0.0)


@pytest.mark.parametrize("dx,dy", [(0.75, 0.85), (0.0, 0.3), (-0.4, 0.6), (0.25, -0.9)])
def test_shift_then_inverse_restores_interior(dx, dy):
    """Test that shifting a bilinear surface and shifting back restores the interior"""
    rng = np.random.default_rng(5)
    a, b, c, d = rng.uniform(-2.0, 2.0, size=4)
    rows, cols = np.mgrid[0:7, 0:9].astype(np.float64)
    values = a + b * cols + c * rows + d * rows * cols
    restored = apply_geolocation_shift(apply_geolocation_shift(grid(values), dx, dy), -dx, -dy)
    assert np.allclose(restored.values[1:-1, 1:-1], values[1:-1, 1:-1], rtol=0.0, atol=1e-9)


def test_sensor_presets():
    """Test band counts, GSDs and the fixed shifts"""
    modis, viirs = SENSOR_PROFILES[Sensor.MODIS], SENSOR_PROFILES[Sensor.VIIRS]
    assert (modis.n_bands, modis.gsd_m, modis.shift_dx, modis.shift_dy) == (12, 250.0, 0.75, 0.85)
    assert (viirs.n_bands, viirs.gsd_m, viirs.shift_dx, viirs.shift_dy) == (5, 375.0, 0.0, 0.3)
    values = np.arange(20.0).reshape(4, 5)
    corrected = correct_geolocation(grid(values), Sensor.VIIRS)
    assert corrected.values[0, 2] == pytest.approx(bilinear_oracle(values, 2.0, 0.3), abs=1e-12)


def test_upsample_constant_grid():
    """Test that a constant grid stays constant at finer resolution"""
    up = upsample_band(grid(np.full((3, 3), 7.5)), 4)
    assert up.values.shape == (12, 12)
    assert np.all(up.values == 7.5)
    assert up.gsd_m == 62.5


def test_upsample_ramp_midpoint():
    """Test that a 1-D ramp [0, 2] gains the exact midpoint value 1"""
    up = upsample_band(grid([[0.0, 2.0]]), 2)
    assert up.values[0].tolist() == [0.0, 1.0, 2.0, 2.0]


def test_upsample_matches_oracle():
    """Test a random 4x4 grid against per-point bilinear evaluation"""
    values = np.random.default_rng(3).uniform(-1.0, 1.0, size=(4, 4))
    up = upsample_band(grid(values), 2)
    for i in range(8):
        for j in range(8):
            y, x = min(i / 2, 3.0), min(j / 2, 3.0)
            assert up.values[i, j] == pytest.approx(bilinear_oracle(values, x, y), abs=1e-12)
    assert np.array_equal(up.values[::2, ::2], values)
    assert values.min() <= up.values.min() and up.values.max() <= values.max()


def test_upsample_rejects_factor():
    """Test that only factors 2 and 4 are accepted"""
    with pytest.raises(InvalidInputError):
        upsample_band(grid(np.ones((2, 2))), 3)


def test_clean_pixels_interior_square():
    """Test a square around cells (1,1)-(2,2) of a 5x5 grid"""
    outline = LakeOutline(vertices=[(0.5, 0.5), (3.5, 0.5), (3.5, 3.5), (0.5, 3.5)])
    ids = extract_clean_pixels(outline, grid(np.zeros((5, 5))))
    assert ids == [6, 7, 11, 12]


def test_clean_pixels_brute_force():
    """Test an L-shaped outline against per-cell corner checks"""
    vertices = [(0.2, 0.3), (5.6, 0.3), (5.6, 2.4), (2.7, 2.4), (2.7, 4.8), (0.2, 4.8)]
    outline = LakeOutline(vertices=vertices)

    def inside(x: float, y: float) -> bool:
        in_top = 0.2 < x < 5.6 and 0.3 < y < 2.4
        in_leg = 0.2 < x < 2.7 and 0.3 < y < 4.8
        return in_top or in_leg

    expected = []
    for r in range(6):
        for c in range(7):
            corners = [(c, r), (c + 1, r), (c, r + 1), (c + 1, r + 1), (c + 0.5, r + 0.5)]
            if all(inside(x, y) for x, y in corners):
                expected.append(r * 7 + c)
    assert extract_clean_pixels(outline, grid(np.zeros((6, 7)))) == expected


def test_clean_pixels_small_and_large_outlines():
    """Test sub-pixel outlines and outlines covering the whole grid"""
    tiny = LakeOutline(vertices=[(1.2, 1.2), (1.8, 1.2), (1.8, 1.8)])
    assert extract_clean_pixels(tiny, grid(np.zeros((4, 4)))) == []
    whole = LakeOutline(vertices=[(-0.5, -0.5), (4.5, -0.5), (4.5, 3.5), (-0.5, 3.5)])
    assert extract_clean_pixels(whole, grid(np.zeros((3, 4)))) == list(range(12))


def test_clean_pixels_degenerate_outline():
    """Test that zero-area and self-crossing outlines are rejected"""
    flat = LakeOutline(vertices=[(0, 0), (1, 1), (2, 2)])
    with pytest.raises(DegenerateGeometryError):
        extract_clean_pixels(flat, grid(np.zeros((3, 3))))
    bowtie = LakeOutline(vertices=[(0, 0), (2, 2), (2, 0), (0, 2)])
    with pytest.raises(DegenerateGeometryError):
        extract_clean_pixels(bowtie, grid(np.zeros((3, 3))))


def test_outline_file_round_trip(tmp_path):
    """Test outline text files, including a repeated closing vertex"""
    path = tmp_path / "sils.txt"
    path.write_text("# sils\n0.5 0.5\n3.5 0.5\n3.5 3.5\n0.5 3.5\n0.5 0.5\n", encoding="utf-8")
    outline = parse_outline(path)
    assert len(outline.vertices) == 4
    assert parse_outline(write_outline(tmp_path / "copy.txt", outline)) == outline
    path.write_text("0 0\n1 x\n", encoding="utf-8")
    with pytest.raises(ParseError, match="sils.txt:2"):
        parse_outline(path)


def star_outline(rng: np.random.Generator, n: int) -> LakeOutline:
    """Star-shaped polygon around (5, 5); one vertex per angular sector keeps it simple"""
    sector = 2.0 * np.pi / n
    angles = sector * (np.arange(n) + rng.uniform(0.1, 0.9, size=n))
    radii = rng.uniform(1.5, 4.5, size=n)
    xs, ys = 5.0 + radii * np.cos(angles), 5.0 + radii * np.sin(angles)
    return LakeOutline(vertices=list(zip(xs.tolist(), ys.tolist(), strict=True)))


def test_clean_pixels_ignore_vertex_order():
    """Test that reversing or rotating the vertex list keeps the clean pixels"""
    rng = np.random.default_rng(21)
    g = grid(np.zeros((10, 10)))
    for n in (3, 5, 8, 13):
        outline = star_outline(rng, n)
        ids = extract_clean_pixels(outline, g)
        assert extract_clean_pixels(outline.reversed(), g) == ids
        rotated = LakeOutline(vertices=outline.vertices[2:] + outline.vertices[:2])
        assert extract_clean_pixels(rotated, g) == ids


def test_outline_grid_and_clean_pixels_match_layouts(tmp_path):
    """Test that clean pixels read from outline files are the layout's pixel ids"""
    for n in range(1, 41):
        layout = lake_layout(f"lake{n}", n)
        assert outline_grid(layout.outline, 250.0).width == layout.width
        write_outline(tmp_path / f"lake{n}.txt", layout.outline)
        clean = load_clean_pixels(tmp_path, [f"lake{n}"], 250.0)
        assert clean == {f"lake{n}": set(layout.pixel_ids)}
    with pytest.raises(MissingInputError):
        load_clean_pixels(tmp_path, ["nowhere"], 250.0)


def test_cloud_free_fraction():
    """Test all-clear, all-cloudy and 7 of 33 clear"""
    clear = CloudMask(cloudy=np.zeros((1, 33), dtype=bool))
    cloudy = CloudMask(cloudy=np.ones((1, 33), dtype=bool))
    pixels = list(range(33))
    assert cloud_free_fraction(pixels, clear) == 1.0
    assert cloud_free_fraction(pixels, cloudy) == 0.0
    mixed = np.ones((1, 33), dtype=bool)
    mixed[0, :7] = False
    assert cloud_free_fraction(pixels, CloudMask(cloudy=mixed)) == pytest.approx(7 / 33)
    with pytest.raises(InvalidInputError):
        cloud_free_fraction([], clear)


def test_cloud_mask_from_probability():
    """Test thresholding and no-data handling"""
    probability = grid([[0.1, 0.5], [np.nan, 0.49]])
    assert cloud_mask_from_grid(probability).cloudy.tolist() == [[False, True], [True, False]]


def sample(day: date, pixel: int, label: PixelLabel, bands: tuple[float, ...]) -> PixelSample:
    return PixelSample(lake_id="sils", date=day, pixel_id=pixel, label=label, bands=bands)


def test_samples_csv_single_row(tmp_path):
    """Test that one valid row gives one sample"""
    path = tmp_path / "samples.csv"
    path.write_text(
        "lake_id,date,pixel_id,cloudy,label,b1,b2\nsils,2016-12-01,5,0,frozen,0.25,-1.5\n",
        encoding="utf-8",
    )
    (only,) = parse_samples_csv(path)
    assert only.date == date(2016, 12, 1)
    assert only.bands == (0.25, -1.5)
    assert only.label is PixelLabel.FROZEN
    assert not only.cloudy


def test_samples_csv_unknown_label(tmp_path):
    """Test that an unknown label names the offending line"""
    path = tmp_path / "samples.csv"
    path.write_text(
        "lake_id,date,pixel_id,cloudy,label,b1\n"
        "sils,2016-12-01,5,0,frozen,0.25\n"
        "sils,2016-12-02,5,0,ice,0.25\n",
        encoding="utf-8",
    )
    with pytest.raises(ParseError, match="samples.csv:3"):
        parse_samples_csv(path)


@pytest.mark.parametrize(
    "body",
    [
        "lake_id,date,pixel_id,cloudy,label\n",
        "date,pixel_id\n",
        "lake_id,date,pixel_id,cloudy,label,b1\nsils,2016-12-01,5,0,frozen\n",
        "lake_id,date,pixel_id,cloudy,label,b1\nsils,2016-12-01,5,0,frozen,abc\n",
        "lake_id,date,pixel_id,cloudy,label,b1\nsils,2016-13-01,5,0,frozen,1\n",
        "lake_id,date,pixel_id,cloudy,label,b1\nsils,2016-12-01,5,2,frozen,1\n",
    ],
)
def test_samples_csv_malformed(tmp_path, body):
    """Test that malformed sample files raise ParseError"""
    path = tmp_path / "samples.csv"
    path.write_text(body, encoding="utf-8")
    with pytest.raises(ParseError):
        parse_samples_csv(path)


def test_samples_csv_round_trip(tmp_path):
    """Test parse(write(x)) == x on a random sample set"""
    rng = np.random.default_rng(11)
    labels = list(PixelLabel)
    samples = [
        PixelSample(
            lake_id="silvaplana" if i % 3 else "sils",
            date=date(2016, 9, 1) + timedelta(days=int(i % 270)),
            pixel_id=int(i // 270),
            cloudy=bool(rng.random() < 0.4),
            label=labels[int(rng.integers(0, 3))],
            bands=tuple(float(b) for b in rng.standard_normal(12) * 1e3),
        )
        for i in range(2000)
    ]
    path = write_samples_csv(tmp_path / "samples.csv", samples)
    assert parse_samples_csv(path) == samples
    assert format_samples_csv(parse_samples_csv(path)) == path.read_text(encoding="utf-8")


def test_predictions_csv_round_trip(tmp_path):
    """Test predictions with a cloudy, unclassified pixel"""
    rows = [
        PixelPrediction(
            lake_id="sils",
            date=date(2016, 12, 1),
            pixel_id=1,
            cloudy=False,
            prediction=PixelLabel.FROZEN,
        ),
        PixelPrediction(lake_id="sils", date=date(2016, 12, 1), pixel_id=2, cloudy=True),
    ]
    path = write_predictions_csv(tmp_path / "predictions.csv", rows)
    assert "sils,2016-12-01,2,1,none" in path.read_text(encoding="utf-8")
    assert parse_predictions_csv(path) == rows


def test_meteo_csv_missing_field(tmp_path):
    """Test that an empty sunshine field is recorded as absent"""
    path = tmp_path / "meteo.csv"
    path.write_text(
        "station_id,date,tmean_c,precip_mm,sunshine_h,wind_kmh\n"
        "sils,2016-12-01,-3.5,0.0,,12.0\n",
        encoding="utf-8",
    )
    series = parse_meteo_csv(path)
    record = series.records[date(2016, 12, 1)]
    assert record.tmean_c == -3.5
    assert record.sunshine_h is None
    assert record.wind_kmh == 12.0


def test_meteo_csv_round_trip_and_stations(tmp_path):
    """Test a synthetic year of two stations written and read back"""
    rng = np.random.default_rng(5)
    stations = []
    for name in ("samedan", "sils"):
        records = {}
        for i in range(365):
            values = rng.normal(size=4)
            records[date(2016, 9, 1) + timedelta(days=i)] = DailyWeather(
                tmean_c=float(values[0]),
                precip_mm=None if i % 17 == 0 else float(abs(values[1])),
                sunshine_h=float(abs(values[2])),
                wind_kmh=float(abs(values[3])),
            )
        stations.append(ClimateSeries(station_id=name, records=records))
    path = write_meteo_csv(tmp_path / "meteo.csv", stations)
    parsed = parse_meteo_stations(path)
    assert list(parsed) == ["samedan", "sils"]
    assert parsed["sils"] == stations[1]
    assert parse_meteo_csv(path, "samedan") == stations[0]
    with pytest.raises(InvalidInputError):
        parse_meteo_csv(path)


def test_meteo_csv_duplicate_day(tmp_path):
    """Test that a repeated station day is rejected"""
    path = tmp_path / "meteo.csv"
    path.write_text(
        "station_id,date,tmean_c,precip_mm,sunshine_h,wind_kmh\n"
        "sils,2016-12-01,1,1,1,1\n"
        "sils,2016-12-01,2,2,2,2\n",
        encoding="utf-8",
    )
    with pytest.raises(ParseError, match="meteo.csv:3"):
        parse_meteo_csv(path)
