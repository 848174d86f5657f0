"""Station metadata and raw wind-speed ingestion.

Reads the two documented CSV layouts (a station table and one measurement
file per station), quality-controls the raw records, and aggregates
sub-hourly samples to daily means on UTC calendar days. Negative raw wind
speeds are sensor faults and are treated as missing rather than clipped.

Daily values carry a per-day coverage fraction; a day whose coverage falls
below the threshold is missing. Short missing runs can be bridged by
linear interpolation, which is recorded in a per-day ``filled`` flag so
downstream reports can tell measured values from interpolated ones.
"""

import csv
import datetime
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from ._util import atomic_write_text, fmtr

__all__ = [
    "StationMeta",
    "StationSet",
    "RawSeries",
    "DailySeries",
    "parse_station_table",
    "read_measurements_csv",
    "aggregate_daily",
    "fill_short_gaps",
    "retained_fraction",
    "write_daily_csv",
    "read_daily_csv",
]

NETWORKS = ("NET_A", "NET_B")
STATION_HEADER = ["station_id", "x_m", "y_m", "elev_m", "slope_mu", "network"]
MEASUREMENT_HEADER = ["timestamp_utc", "wind_mps"]
DAILY_HEADER = ["date", "wind_mps", "coverage", "filled"]
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"

DEFAULT_MIN_COVERAGE = 0.8
DEFAULT_MAX_GAP_DAYS = 3
DEFAULT_MIN_RETENTION = 0.7


@dataclass(frozen=True)
class StationMeta:
    """One monitoring station: projected coordinates in meters, elevation,
    the slope covariate, and the owning network."""

    station_id: str
    x: float
    y: float
    elevation: float
    slope_mu: float
    network: str

    def __post_init__(self):
        if not self.station_id:
            raise ValueError("empty station_id")
        for name in ("x", "y", "elevation", "slope_mu"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"station {self.station_id}: non-finite {name}")
            object.__setattr__(self, name, v)
        if self.slope_mu < 0:
            raise ValueError(f"station {self.station_id}: slope_mu must be >= 0")
        if self.network not in NETWORKS:
            raise ValueError(
                f"station {self.station_id}: network must be one of {NETWORKS}, "
                f"got {self.network!r}"
            )


class StationSet:
    """Immutable collection of stations, addressable by id."""

    def __init__(self, stations):
        stations = tuple(stations)
        by_id = {}
        for s in stations:
            if s.station_id in by_id:
                raise ValueError(f"duplicate station_id {s.station_id!r}")
            by_id[s.station_id] = s
        self._stations = stations
        self._by_id = by_id

    def __len__(self):
        return len(self._stations)

    def __iter__(self):
        return iter(self._stations)

    def __getitem__(self, station_id: str) -> StationMeta:
        return self._by_id[station_id]

    def __contains__(self, station_id: str) -> bool:
        return station_id in self._by_id

    @property
    def ids(self) -> tuple:
        return tuple(s.station_id for s in self._stations)


@dataclass(frozen=True)
class RawSeries:
    """Raw sub-hourly record of one station.

    ``timestamps`` are strictly increasing datetime64[s] UTC instants and
    ``values`` are wind speeds in m/s with NaN marking missing records.
    """

    station_id: str
    timestamps: np.ndarray
    values: np.ndarray
    nominal_step: int

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        vals = np.array(self.values, dtype=np.float64)
        if ts.size != vals.size:
            raise ValueError("timestamps and values length mismatch")
        if ts.size == 0:
            raise ValueError(f"station {self.station_id}: empty raw series")
        if ts.size > 1 and not np.all(np.diff(ts).astype(np.int64) > 0):
            raise ValueError(
                f"station {self.station_id}: timestamps not strictly increasing"
            )
        with np.errstate(invalid="ignore"):
            if np.any(vals < 0.0):
                raise ValueError(
                    f"station {self.station_id}: negative wind speeds must be "
                    "marked missing before constructing RawSeries"
                )
        if int(self.nominal_step) <= 0:
            raise ValueError("nominal_step must be positive")
        ts.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "nominal_step", int(self.nominal_step))

    def __len__(self):
        return self.timestamps.size


@dataclass(frozen=True)
class DailySeries:
    """Daily means over a contiguous span of calendar days.

    NaN values and ``missing_mask`` agree by construction; ``coverage`` is
    the fraction of valid raw samples on each day and ``filled`` flags days
    whose value came from gap interpolation rather than measurement.
    """

    station_id: str
    start_date: datetime.date
    values: np.ndarray
    missing_mask: np.ndarray
    coverage: np.ndarray
    filled: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        miss = np.array(self.missing_mask, dtype=bool)
        cov = np.array(self.coverage, dtype=np.float64)
        fill = np.array(self.filled, dtype=bool)
        n = vals.size
        if not (miss.size == cov.size == fill.size == n):
            raise ValueError("per-day arrays must have equal length")
        if n == 0:
            raise ValueError("empty daily series")
        if not np.array_equal(miss, np.isnan(vals)):
            raise ValueError("missing_mask inconsistent with NaN pattern")
        for arr in (vals, miss, cov, fill):
            arr.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "missing_mask", miss)
        object.__setattr__(self, "coverage", cov)
        object.__setattr__(self, "filled", fill)

    def __len__(self):
        return self.values.size

    @property
    def dates(self) -> np.ndarray:
        """datetime64[D] date of every slot."""
        d0 = np.datetime64(self.start_date.isoformat(), "D")
        return d0 + np.arange(self.values.size)

    @property
    def n_missing(self) -> int:
        return int(self.missing_mask.sum())


def parse_station_table(path) -> StationSet:
    """Read a ``stations.csv`` table into a StationSet.

    Rejects a malformed header, duplicate ids, and non-numeric fields,
    naming the offending row in the error.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty station table") from None
        if header != STATION_HEADER:
            raise ValueError(
                f"{path}: bad header {header!r}, expected {STATION_HEADER!r}"
            )
        stations = []
        seen = {}
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(STATION_HEADER):
                raise ValueError(f"{path} row {rownum}: expected 6 fields, got {len(row)}")
            sid = row[0].strip()
            if sid in seen:
                raise ValueError(
                    f"{path} row {rownum}: duplicate station_id {sid!r} "
                    f"(first seen at row {seen[sid]})"
                )
            seen[sid] = rownum
            try:
                numerics = [float(v) for v in row[1:5]]
            except ValueError:
                raise ValueError(
                    f"{path} row {rownum}: non-numeric coordinate in {row[1:5]!r}"
                ) from None
            try:
                stations.append(StationMeta(sid, *numerics, network=row[5].strip()))
            except ValueError as exc:
                raise ValueError(f"{path} row {rownum}: {exc}") from None
    return StationSet(stations)


def read_measurements_csv(path, station_id: str, nominal_step=None) -> RawSeries:
    """Read one station's ``timestamp_utc,wind_mps`` file.

    Empty wind fields and negative speeds become NaN (missing). When
    ``nominal_step`` is not given it is inferred as the median timestamp
    spacing.
    """
    # round_trip keeps written repr() values bit-identical on re-read
    df = pd.read_csv(path, dtype={"wind_mps": np.float64},
                     float_precision="round_trip")
    if list(df.columns) != MEASUREMENT_HEADER:
        raise ValueError(
            f"{path}: bad header {list(df.columns)!r}, expected {MEASUREMENT_HEADER!r}"
        )
    if len(df) == 0:
        raise ValueError(f"{path}: no measurement rows")
    try:
        ts = pd.to_datetime(df["timestamp_utc"], format=TIMESTAMP_FORMAT)
    except ValueError as exc:
        raise ValueError(f"{path}: bad timestamp: {exc}") from None
    ts64 = ts.to_numpy().astype("datetime64[s]")
    vals = df["wind_mps"].to_numpy(dtype=np.float64, copy=True)
    with np.errstate(invalid="ignore"):
        vals[vals < 0.0] = np.nan
    if nominal_step is None:
        if ts64.size < 2:
            raise ValueError(f"{path}: cannot infer step from a single row")
        nominal_step = int(np.median(np.diff(ts64).astype(np.int64)))
    return RawSeries(station_id, ts64, vals, int(nominal_step))


def aggregate_daily(raw: RawSeries, min_coverage: float = DEFAULT_MIN_COVERAGE) -> DailySeries:
    """Aggregate raw samples to daily means on [00:00, 24:00) UTC days.

    A day's value is the arithmetic mean of its valid samples; coverage is
    valid samples over the day's nominal slot count, and a day below
    ``min_coverage`` is missing. Spans every calendar day between the first
    and last timestamp, so gap days appear with coverage 0.
    """
    if not 0.0 < min_coverage <= 1.0:
        raise ValueError(f"min_coverage must be in (0, 1], got {min_coverage}")
    step = raw.nominal_step
    if 86400 % step != 0:
        raise ValueError(f"nominal_step {step} s does not divide 86400 s")
    slots_per_day = 86400 // step

    days = raw.timestamps.astype("datetime64[D]")
    day0 = days[0]
    idx = (days - day0).astype(np.int64)
    n_days = int(idx[-1]) + 1

    valid = np.isfinite(raw.values)
    counts = np.bincount(idx[valid], minlength=n_days)
    sums = np.bincount(idx[valid], weights=raw.values[valid], minlength=n_days)

    coverage = counts / float(slots_per_day)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    missing = coverage < min_coverage
    values = np.where(missing, np.nan, means)

    return DailySeries(
        station_id=raw.station_id,
        start_date=day0.item(),
        values=values,
        missing_mask=missing,
        coverage=coverage,
        filled=np.zeros(n_days, dtype=bool),
    )


def fill_short_gaps(series: DailySeries, max_gap_days: int = DEFAULT_MAX_GAP_DAYS) -> DailySeries:
    """Bridge missing runs of length <= max_gap_days by linear interpolation.

    Only interior runs with a valid value on both flanks are filled; the
    result's ``filled`` flags mark interpolated days. Idempotent.
    """
    if max_gap_days < 0:
        raise ValueError("max_gap_days must be >= 0")
    if max_gap_days == 0 or not series.missing_mask.any():
        return series

    values = series.values.copy()
    missing = series.missing_mask.copy()
    filled = series.filled.copy()
    n = values.size

    i = 0
    while i < n:
        if not missing[i]:
            i += 1
            continue
        j = i
        while j < n and missing[j]:
            j += 1
        run = j - i
        if 0 < i and j < n and run <= max_gap_days:
            left, right = values[i - 1], values[j]
            for t in range(run):
                frac = (t + 1) / (run + 1)
                values[i + t] = left + frac * (right - left)
            missing[i:j] = False
            filled[i:j] = True
        i = j
    return replace(series, values=values, missing_mask=missing, filled=filled)


def retained_fraction(series: DailySeries) -> float:
    """Fraction of days with a value (measured or filled)."""
    return 1.0 - series.missing_mask.mean()


def write_daily_csv(series: DailySeries, path) -> None:
    """Write the documented ``date,wind_mps,coverage,filled`` layout.

    Floats use shortest round-trip formatting so read_daily_csv restores
    the series bit-exactly; missing days have an empty wind field.
    """
    dates = series.dates
    lines = [",".join(DAILY_HEADER)]
    for i in range(len(series)):
        wind = "" if series.missing_mask[i] else fmtr(series.values[i])
        lines.append(
            f"{dates[i]},{wind},{fmtr(series.coverage[i])},{int(series.filled[i])}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_daily_csv(path, station_id: str = "") -> DailySeries:
    """Inverse of write_daily_csv. Dates must be contiguous."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != DAILY_HEADER:
            raise ValueError(f"{path}: bad header {header!r}, expected {DAILY_HEADER!r}")
        dates, values, coverage, filled = [], [], [], []
        for row in reader:
            if not row:
                continue
            dates.append(np.datetime64(row[0], "D"))
            values.append(float(row[1]) if row[1] != "" else np.nan)
            coverage.append(float(row[2]))
            filled.append(bool(int(row[3])))
    if not dates:
        raise ValueError(f"{path}: no data rows")
    dd = np.array(dates)
    if dd.size > 1 and not np.all(np.diff(dd).astype(np.int64) == 1):
        raise ValueError(f"{path}: dates are not contiguous")
    vals = np.array(values, dtype=np.float64)
    return DailySeries(
        station_id=station_id,
        start_date=dd[0].item(),
        values=vals,
        missing_mask=np.isnan(vals),
        coverage=np.array(coverage, dtype=np.float64),
        filled=np.array(filled, dtype=bool),
    )
