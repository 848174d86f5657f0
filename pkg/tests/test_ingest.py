import datetime

import numpy as np
import pytest

from conftest import make_daily
from windinfo.ingest import (
    DailySeries,
    RawSeries,
    StationMeta,
    StationSet,
    aggregate_daily,
    fill_short_gaps,
    parse_station_table,
    read_daily_csv,
    read_measurements_csv,
    retained_fraction,
    write_daily_csv,
)

STATIONS_CSV = """\
station_id,x_m,y_m,elev_m,slope_mu,network
S001,1000.0,2000.0,350.5,0.12,NET_A
S002,-500.25,8000.0,1200.0,0.68,NET_B
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_station_table(tmp_path):
    stations = parse_station_table(_write(tmp_path, "stations.csv", STATIONS_CSV))
    assert len(stations) == 2
    s = stations["S002"]
    assert (s.x, s.y, s.elevation, s.slope_mu) == (-500.25, 8000.0, 1200.0, 0.68)
    assert s.network == "NET_B"
    assert stations.ids == ("S001", "S002")
    assert "S001" in stations and "S999" not in stations


@pytest.mark.parametrize("row,err", [
    ("S003,1,2,3,0.1,NET_C", "network"),
    ("S003,nan,2,3,0.1,NET_A", "finite"),
    ("S003,1,2,3,-0.5,NET_A", "slope_mu"),
    ("S001,1,2,3,0.1,NET_A", "duplicate"),
])
def test_parse_station_table_bad_rows(tmp_path, row, err):
    with pytest.raises(ValueError, match=err):
        parse_station_table(_write(tmp_path, "bad.csv", STATIONS_CSV + row + "\n"))


MEASUREMENTS_CSV = """\
timestamp_utc,wind_mps
2013-01-01T00:00:00Z,3.2
2013-01-01T00:30:00Z,-1.0
2013-01-01T01:00:00Z,
2013-01-01T01:30:00Z,4.1
2013-01-01T02:30:00Z,5.0
"""


def test_read_measurements(tmp_path):
    raw = read_measurements_csv(_write(tmp_path, "m.csv", MEASUREMENTS_CSV), "S001")
    assert raw.station_id == "S001"
    assert raw.nominal_step == 1800  # inferred from the median spacing
    assert raw.timestamps[0] == np.datetime64("2013-01-01T00:00:00", "s")
    # the negative reading and the blank both become missing
    np.testing.assert_array_equal(np.isnan(raw.values),
                                  [False, True, True, False, False])
    assert raw.values[3] == 4.1


def _raw_two_days():
    # two days at 6 h steps: day one complete, day two half missing
    ts = np.datetime64("2013-01-01T00:00:00", "s") + 21600 * np.arange(8)
    vals = np.array([1.0, 2.0, 3.0, 4.0, 5.0, np.nan, np.nan, 7.0])
    return RawSeries("S1", ts, vals, 21600)


def test_aggregate_daily_hand_case():
    daily = aggregate_daily(_raw_two_days(), min_coverage=0.8)
    assert daily.start_date == datetime.date(2013, 1, 1)
    assert len(daily) == 2
    assert daily.values[0] == pytest.approx(2.5)  # mean of 1,2,3,4
    assert np.isnan(daily.values[1])              # 2/4 valid < 0.8
    np.testing.assert_allclose(daily.coverage, [1.0, 0.5])
    assert daily.n_missing == 1


def test_aggregate_daily_lower_threshold_keeps_day():
    daily = aggregate_daily(_raw_two_days(), min_coverage=0.5)
    assert daily.values[1] == pytest.approx(6.0)  # mean of 5,7


def test_aggregate_daily_rejects_bad_step():
    ts = np.datetime64("2013-01-01T00:00:00", "s") + 50000 * np.arange(4)
    with pytest.raises(ValueError, match="step"):
        aggregate_daily(RawSeries("S1", ts, np.ones(4), 50000))


def test_fill_short_gaps_hand_case():
    vals = np.array([1.0, np.nan, np.nan, 4.0, np.nan, np.nan, np.nan, np.nan,
                     9.0, np.nan])
    filled = fill_short_gaps(make_daily(vals), max_gap_days=3)
    # interior gap of two days is linearly interpolated: 2, 3
    np.testing.assert_allclose(filled.values[:4], [1.0, 2.0, 3.0, 4.0])
    assert filled.filled[1] and filled.filled[2]
    # four-day gap exceeds the limit and stays missing
    assert np.all(np.isnan(filled.values[4:8]))
    # trailing gap has no right flank, never filled
    assert np.isnan(filled.values[9])
    assert retained_fraction(filled) == pytest.approx(5 / 10)


def test_fill_short_gaps_idempotent():
    vals = np.array([1.0, np.nan, 3.0, np.nan, np.nan, 6.0])
    once = fill_short_gaps(make_daily(vals), max_gap_days=2)
    twice = fill_short_gaps(once, max_gap_days=2)
    np.testing.assert_array_equal(once.values, twice.values)
    np.testing.assert_array_equal(once.filled, twice.filled)


def test_daily_csv_roundtrip_bit_exact(tmp_path, rng):
    vals = rng.normal(4.0, 1.0, 30)
    vals[[5, 6]] = np.nan
    series = fill_short_gaps(make_daily(vals), max_gap_days=3)
    path = tmp_path / "daily.csv"
    write_daily_csv(series, path)
    back = read_daily_csv(path, "T00")
    assert back.start_date == series.start_date
    np.testing.assert_array_equal(back.values, series.values)  # exact floats
    np.testing.assert_array_equal(back.missing_mask, series.missing_mask)
    np.testing.assert_array_equal(back.filled, series.filled)
    np.testing.assert_array_equal(back.coverage, series.coverage)


def test_read_daily_csv_rejects_date_gap(tmp_path):
    series = make_daily(np.array([1.0, 2.0, 3.0]))
    path = tmp_path / "daily.csv"
    write_daily_csv(series, path)
    lines = path.read_text().splitlines()
    del lines[2]  # drop the middle day
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="contiguous|gap"):
        read_daily_csv(path, "T00")


def test_raw_series_validation():
    ts = np.datetime64("2013-01-01T00:00:00", "s") + 1800 * np.arange(3)
    with pytest.raises(ValueError, match="negative"):
        RawSeries("S1", ts, np.array([1.0, -0.1, 2.0]), 1800)
    with pytest.raises(ValueError, match="increasing"):
        RawSeries("S1", ts[[0, 2, 1]], np.ones(3), 1800)
    with pytest.raises(ValueError, match="mismatch"):
        RawSeries("S1", ts, np.ones(2), 1800)
    with pytest.raises(ValueError, match="empty"):
        RawSeries("S1", ts[:0], np.ones(0), 1800)


def test_daily_series_validation():
    vals = np.array([1.0, np.nan])
    with pytest.raises(ValueError, match="missing_mask"):
        DailySeries("S1", datetime.date(2013, 1, 1), vals,
                    np.array([False, False]), np.ones(2), np.zeros(2, bool))


def test_station_set_duplicate_id():
    meta = StationMeta("S1", 0, 0, 10, 0.1, "NET_A")
    with pytest.raises(ValueError, match="duplicate"):
        StationSet([meta, meta])
