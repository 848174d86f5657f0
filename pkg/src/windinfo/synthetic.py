"""Deterministic synthetic station networks with controllable disorder.

The generator exists so the whole pipeline can be exercised without any
proprietary measurements. It lays out two networks over a rectangular
domain (a dense cluster on the flank of a single mountain-like elevation
bump, plus uniform background coverage) and builds each station's raw
series as an annual sinusoid, a slow multi-year drift, a day-level noise
term, and small within-day jitter.

Disorder is injected through the day-level noise: its scale grows linearly
with normalized elevation and, with an elevation-coupled probability, a
day's noise is drawn from a variance-matched Student-t instead of a
Gaussian. Setting both couplings to zero gives statistically identical
stations everywhere. Negative speeds produced by the noise are truncated
at zero and the truncation rate is reported per station.

Everything is a pure function of (spec, seed): per-station generators are
derived from the seed and the station index, so outputs do not depend on
generation order.
"""

import datetime
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincinv

from ._util import atomic_write_text, fmtr
from .distributions import DistParams, _GEV_K_EPS
from .ingest import (MEASUREMENT_HEADER, STATION_HEADER, RawSeries,
                     StationMeta, StationSet)
from .stl import calendar_buckets

__all__ = [
    "SyntheticSpec",
    "NetworkData",
    "elevation_surface",
    "generate_network",
    "generate_known_density_sample",
    "write_station_table",
    "write_measurements_csv",
]


@dataclass(frozen=True)
class SyntheticSpec:
    """Layout, signal, and disorder-coupling controls for the generator.

    noise_gain and heavy_tail_gain form the monotone elevation-to-disorder
    coupling; zero for both removes any elevation effect.
    """

    n_stations: int = 24
    extent: tuple = (100_000.0, 80_000.0)
    years: int = 3
    start_year: int = 2013
    step_seconds: int = 1800
    base_elevation: float = 400.0
    relief: float = 2200.0
    base_speed: float = 3.2
    seasonal_amp: float = 1.1
    trend_amp: float = 0.35
    noise_floor: float = 0.55
    noise_gain: float = 0.9
    heavy_tail_gain: float = 0.55
    student_dof: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.n_stations < 2:
            raise ValueError("need at least 2 stations")
        if self.years < 2:
            raise ValueError("need at least 2 years (two seasonal periods)")
        if len(self.extent) != 2 or min(self.extent) <= 0:
            raise ValueError("extent must be positive (width, height) meters")
        if 86400 % self.step_seconds != 0:
            raise ValueError("step_seconds must divide 86400")
        if self.student_dof <= 2:
            raise ValueError("student_dof must exceed 2 (finite variance)")


@dataclass(frozen=True)
class NetworkData:
    stations: StationSet
    series: tuple
    truncation_rates: dict


def elevation_surface(spec: SyntheticSpec, x, y):
    """Elevation (m) and slope magnitude of the single-bump surface.

    The bump is Gaussian, so the slope has the closed form
    |grad e| = relief * exp(-r^2 / (2 s^2)) * r / s^2.
    """
    w, h = spec.extent
    cx, cy = 0.32 * w, 0.62 * h
    s = 0.18 * min(w, h)
    dx = np.asarray(x, dtype=np.float64) - cx
    dy = np.asarray(y, dtype=np.float64) - cy
    r2 = dx * dx + dy * dy
    bump = np.exp(-r2 / (2.0 * s * s))
    elev = spec.base_elevation + spec.relief * bump
    slope = spec.relief * bump * np.sqrt(r2) / (s * s)
    return elev, slope


def _n_days(spec: SyntheticSpec) -> int:
    d0 = np.datetime64(f"{spec.start_year}-01-01", "D")
    d1 = np.datetime64(f"{spec.start_year + spec.years}-01-01", "D")
    return int((d1 - d0).astype(np.int64))


def _station_positions(spec: SyntheticSpec):
    """Half the stations cluster around the bump (NET_A), half spread
    uniformly (NET_B)."""
    w, h = spec.extent
    cx, cy = 0.32 * w, 0.62 * h
    rng = np.random.default_rng((int(spec.seed), 0))
    n_a = spec.n_stations // 2
    n_b = spec.n_stations - n_a
    scatter = 0.10 * min(w, h)
    ax = np.clip(rng.normal(cx, scatter, n_a), 0.0, w)
    ay = np.clip(rng.normal(cy, scatter, n_a), 0.0, h)
    bx = rng.uniform(0.0, w, n_b)
    by = rng.uniform(0.0, h, n_b)
    xs = np.concatenate([ax, bx])
    ys = np.concatenate([ay, by])
    networks = ["NET_A"] * n_a + ["NET_B"] * n_b
    return xs, ys, networks


def generate_network(spec: SyntheticSpec) -> NetworkData:
    """Build the station table and one RawSeries per station."""
    xs, ys, networks = _station_positions(spec)
    elev, slope = elevation_surface(spec, xs, ys)
    e_norm = (elev - spec.base_elevation) / spec.relief  # in [0, 1]

    stations = []
    for i in range(spec.n_stations):
        stations.append(StationMeta(
            station_id=f"S{i:03d}", x=float(xs[i]), y=float(ys[i]),
            elevation=float(elev[i]), slope_mu=float(slope[i]),
            network=networks[i],
        ))
    station_set = StationSet(stations)

    n_days = _n_days(spec)
    per_day = 86400 // spec.step_seconds
    t0 = np.datetime64(f"{spec.start_year}-01-01T00:00:00", "s")
    timestamps = t0 + np.arange(n_days * per_day, dtype=np.int64) * spec.step_seconds
    day_of_sample = np.repeat(np.arange(n_days), per_day)
    bucket = calendar_buckets(datetime.date(spec.start_year, 1, 1), n_days)

    series = []
    rates = {}
    tail_norm = math.sqrt(spec.student_dof / (spec.student_dof - 2.0))
    for i in range(spec.n_stations):
        rng = np.random.default_rng((int(spec.seed), 1, i))
        phase = rng.uniform(0.0, 2.0 * np.pi)
        drift_phase = rng.uniform(0.0, 2.0 * np.pi)

        level = spec.base_speed * (1.0 + 0.25 * e_norm[i])
        seasonal = spec.seasonal_amp * np.sin(2.0 * np.pi * bucket / 365.0 + phase)
        days = np.arange(n_days)
        drift = spec.trend_amp * np.sin(2.0 * np.pi * days / (1.37 * n_days) + drift_phase)

        scale = spec.noise_floor + spec.noise_gain * e_norm[i]
        p_heavy = float(np.clip(spec.heavy_tail_gain * e_norm[i], 0.0, 0.95))
        gauss = rng.standard_normal(n_days)
        heavy = rng.standard_t(spec.student_dof, n_days) / tail_norm
        pick = rng.random(n_days) < p_heavy
        day_noise = scale * np.where(pick, heavy, gauss)

        daily_level = level + seasonal + drift + day_noise
        jitter = 0.15 * scale * rng.standard_normal(n_days * per_day)
        values = daily_level[day_of_sample] + jitter

        truncated = values < 0.0
        rates[f"S{i:03d}"] = float(truncated.mean())
        values = np.where(truncated, 0.0, values)
        series.append(RawSeries(
            station_id=f"S{i:03d}", timestamps=timestamps,
            values=values, nominal_step=spec.step_seconds,
        ))
    return NetworkData(stations=station_set, series=tuple(series),
                       truncation_rates=rates)


def generate_known_density_sample(family: str, params, m: int, seed: int) -> np.ndarray:
    """M inverse-transform draws from one of the fitted families."""
    dp = params if isinstance(params, DistParams) else DistParams(family, tuple(params))
    if dp.family != family:
        raise ValueError(f"params are for {dp.family!r}, not {family!r}")
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return np.empty(0, dtype=np.float64)
    rng = np.random.default_rng(int(seed))
    u = np.clip(rng.random(m), 1e-15, 1.0 - 1e-15)
    if family == "weibull":
        k, lam = dp.values
        return lam * (-np.log1p(-u)) ** (1.0 / k)
    if family == "gamma":
        k, beta = dp.values
        return gammaincinv(k, u) / beta
    mu, lam, k = dp.values
    if abs(k) < _GEV_K_EPS:
        return mu - lam * np.log(-np.log(u))
    return mu + lam * ((-np.log(u)) ** (-k) - 1.0) / k


def write_station_table(stations: StationSet, path) -> None:
    lines = [",".join(STATION_HEADER)]
    for s in stations:
        lines.append(
            f"{s.station_id},{fmtr(s.x)},{fmtr(s.y)},{fmtr(s.elevation)},"
            f"{fmtr(s.slope_mu)},{s.network}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_measurements_csv(raw: RawSeries, path) -> None:
    """Emit the documented ``timestamp_utc,wind_mps`` layout; NaN values
    become empty fields."""
    stamps = np.datetime_as_string(raw.timestamps, unit="s")
    vals = raw.values
    rows = [",".join(MEASUREMENT_HEADER)]
    rows.extend(
        f"{stamps[i]}Z,{'' if np.isnan(vals[i]) else fmtr(vals[i])}"
        for i in range(vals.size)
    )
    atomic_write_text(path, "\n".join(rows) + "\n")
