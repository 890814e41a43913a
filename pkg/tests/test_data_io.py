import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbsize import data_io, solar
from sbsize.data_io import DataError, IrradianceDay, SiteMeta

SITE = data_io.SITES["1"]
DAY = dt.date(2017, 2, 5)


def write_rows(path, rows, header="timestamp,ghi_wm2"):
    path.write_text(header + "\n" + "".join(f"{r}\n" for r in rows))
    return path


def clean_rows(date=DAY, values=None):
    values = np.zeros(1440) if values is None else values
    base = dt.datetime.combine(date, dt.time())
    return [f"{(base + dt.timedelta(minutes=i)):%Y-%m-%dT%H:%M},{data_io.format_ghi(v)}"
            for i, v in enumerate(values)]


def test_clean_day_loads_unflagged(tmp_path):
    vals = np.round(solar.clear_sky(SITE, DAY), 2)
    loaded = data_io.load_irradiance(write_rows(tmp_path / "a.csv", clean_rows(values=vals)), SITE)
    assert len(loaded) == 1 and loaded.excluded == []
    day = loaded.days[0]
    assert day.date == DAY
    assert not day.gap_mask.any()
    np.testing.assert_array_equal(day.samples, vals)


def test_ten_minute_hole_is_interpolated(tmp_path):
    vals = np.round(solar.clear_sky(SITE, DAY), 2)
    rows = clean_rows(values=vals)
    hole = range(600, 610)
    kept = [r for i, r in enumerate(rows) if i not in hole]
    day = data_io.load_irradiance(write_rows(tmp_path / "a.csv", kept), SITE).days[0]
    assert day.gap_mask.sum() == 10
    assert day.gap_mask[600:610].all()
    # straight line between the samples at 599 and 610
    frac = (np.arange(600, 610) - 599) / 11.0
    expected = vals[599] + frac * (vals[610] - vals[599])
    np.testing.assert_allclose(day.samples[600:610], expected, rtol=0, atol=1e-9)
    np.testing.assert_array_equal(np.delete(day.samples, hole), np.delete(vals, hole))


def test_two_hour_hole_excludes_day(tmp_path):
    rows = clean_rows() + clean_rows(DAY + dt.timedelta(days=1))
    kept = [r for i, r in enumerate(rows) if not 1440 + 600 <= i < 1440 + 720]
    loaded = data_io.load_irradiance(write_rows(tmp_path / "a.csv", kept), SITE)
    assert [d.date for d in loaded.days] == [DAY]
    assert [d for d, _ in loaded.excluded] == [DAY + dt.timedelta(days=1)]


def test_thirty_minute_hole_is_the_limit(tmp_path):
    rows = clean_rows()
    ok = [r for i, r in enumerate(rows) if not 100 <= i < 130]
    bad = [r for i, r in enumerate(rows) if not 100 <= i < 131]
    assert len(data_io.load_irradiance(write_rows(tmp_path / "ok.csv", ok))) == 1
    assert len(data_io.load_irradiance(write_rows(tmp_path / "bad.csv", bad))) == 0


@pytest.mark.parametrize("mutate, line, match", [
    (lambda r: r[:5] + ["2017-02-05T00:05,abc"] + r[6:], 7, "bad GHI"),
    (lambda r: r[:5] + ["garbage"] + r[6:], 7, "expected 2 fields"),
    (lambda r: r[:5] + [r[4]] + r[6:], 7, "duplicate"),
    (lambda r: r[:5] + [r[6], r[5]] + r[7:], 8, "non-monotonic"),
    (lambda r: r[:5] + ["2017-02-05T00:05,1700"] + r[6:], 7, "outside"),
])
def test_malformed_rows_name_the_line(tmp_path, mutate, line, match):
    path = write_rows(tmp_path / "a.csv", mutate(clean_rows()))
    with pytest.raises(DataError, match=match) as err:
        data_io.load_irradiance(path)
    assert err.value.line == line


def test_bad_header(tmp_path):
    with pytest.raises(DataError, match="header"):
        data_io.load_irradiance(write_rows(tmp_path / "a.csv", clean_rows(), header="time,ghi"))


def test_round_trip_is_byte_identical(tmp_path):
    days = [data_io.synthesize_day("mixed", 3, SITE, DAY + dt.timedelta(days=i)) for i in range(2)]
    first = tmp_path / "a.csv"
    data_io.write_canonical(days, first)
    second = tmp_path / "b.csv"
    data_io.write_canonical(data_io.load_irradiance(first).days, second)
    assert first.read_bytes() == second.read_bytes()


def test_temperature_parse(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("date,tmax_c\n2017-02-05,34.2\n")
    assert data_io.load_temperature(p) == [data_io.TemperatureDay(DAY, 34.2)]


def test_temperature_fill_from_prior(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("date,tmax_c\n2017-02-05,34.2\n2017-02-07,30.0\n")
    recs = data_io.load_temperature(p)
    assert [r.date.day for r in recs] == [5, 6, 7]
    assert recs[1].t_max == 34.2 and recs[1].filled
    assert not recs[0].filled and not recs[2].filled


def test_temperature_out_of_bounds(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("date,tmax_c\n2017-02-05,99.0\n")
    with pytest.raises(DataError, match="99") as err:
        data_io.load_temperature(p)
    assert err.value.line == 2


def test_temperature_bad_date(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("date,tmax_c\n2017-02-30,20\n")
    with pytest.raises(DataError, match="bad date"):
        data_io.load_temperature(p)


def test_site_file_round_trip(tmp_path):
    p = tmp_path / "site.txt"
    data_io.write_site(data_io.SITES["2"], p)
    assert data_io.load_site(p) == data_io.SITES["2"]


@pytest.mark.parametrize("kw", [dict(latitude=91), dict(longitude=-181), dict(utc_offset=15)])
def test_site_bounds(kw):
    args = dict(site_id="x", name="x", latitude=0, longitude=0, utc_offset=0) | kw
    with pytest.raises(DataError):
        SiteMeta(**args)


def test_day_rejects_bad_samples():
    with pytest.raises(DataError):
        IrradianceDay(DAY, np.zeros(1439))
    with pytest.raises(DataError):
        IrradianceDay(DAY, np.full(1440, -1.0))
    with pytest.raises(DataError):
        IrradianceDay(DAY, np.full(1440, 1601.0))


def test_day_is_immutable():
    day = data_io.synthesize_day("clear", 0, SITE, DAY)
    with pytest.raises(ValueError):
        day.samples[0] = 5.0


def test_synth_clear_equals_clear_sky():
    day = data_io.synthesize_day("clear", 99, SITE, DAY)
    np.testing.assert_array_equal(day.samples, solar.clear_sky(SITE, DAY))
    assert solar.sivi(day, solar.clear_sky(SITE, DAY)).sivi == 1.0


def test_synth_square_wave_deterministic():
    a = data_io.synthesize_day("square_wave", 1, SITE, DAY)
    b = data_io.synthesize_day("square_wave", 1, SITE, DAY)
    assert a.samples.tobytes() == b.samples.tobytes()
    cs = solar.clear_sky(SITE, DAY)
    ratio = a.samples[cs > 0] / cs[cs > 0]
    assert set(np.round(ratio, 12)) == {1.0, 0.2}


def test_synth_mixed_deterministic_per_seed():
    a = data_io.synthesize_day("mixed", 5, SITE, DAY)
    b = data_io.synthesize_day("mixed", 5, SITE, DAY)
    c = data_io.synthesize_day("mixed", 6, SITE, DAY)
    assert a.samples.tobytes() == b.samples.tobytes()
    assert a.samples.tobytes() != c.samples.tobytes()


def test_synth_overcast():
    cs = solar.clear_sky(SITE, DAY)
    day = data_io.synthesize_day("overcast", 0, SITE, DAY)
    assert day.samples.mean() == pytest.approx(0.25 * cs.mean(), rel=1e-12)
    # a scaled copy of the clear-sky curve is shorter than it, so below 1
    oracle = np.sum(np.sqrt((0.25 * np.diff(cs)) ** 2 + 1)) / np.sum(np.sqrt(np.diff(cs) ** 2 + 1))
    value = solar.sivi(day, cs).sivi
    assert value == pytest.approx(oracle, rel=1e-12)
    assert value < 1.5


def test_unknown_profile():
    with pytest.raises(ValueError):
        data_io.synthesize_day("foggy", 0, SITE, DAY)


@settings(max_examples=30, deadline=None)
@given(
    profile=st.sampled_from(data_io.PROFILES),
    seed=st.integers(0, 2**31 - 1),
    doy=st.integers(0, 364),
    site_id=st.sampled_from(sorted(data_io.SITES)),
)
def test_synth_days_satisfy_invariants(profile, seed, doy, site_id):
    date = dt.date(2017, 1, 1) + dt.timedelta(days=doy)
    site = data_io.SITES[site_id]
    a = data_io.synthesize_day(profile, seed, site, date)
    b = data_io.synthesize_day(profile, seed, site, date)
    assert a.samples.shape == (1440,)
    assert a.samples.min() >= 0 and a.samples.max() <= data_io.GHI_CEILING
    assert np.array_equal(a.samples, b.samples)


def test_synth_year_shape(synthetic_year):
    days, temps = synthetic_year
    assert len(days) == len(temps) == 365
    assert [d.date for d in days] == [t.date for t in temps]
