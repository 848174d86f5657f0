"""Seasonal-trend decomposition of daily series via locally weighted regression.

The seasonal component defaults to the periodic (calendar-mean) form: each
calendar day's seasonal value is the mean of that day's detrended values
across years, centered so the seasonal carries no offset. February 29 is
folded into the last (index 364) bucket so leap years do not shift the
day-of-year alignment of March onward. A windowed seasonal mode smooths
each calendar day's cross-year subseries with loess instead of averaging
it, for callers who need a slowly drifting seasonal.

The trend is a tricube-weighted local polynomial fit of the deseasonalized
series. Missing days participate with zero weight, so no values are
invented; the remainder stays missing on those days. Robustness passes
downweight outliers with bisquare weights before refitting.
"""

import datetime
import math
from dataclasses import dataclass

import numpy as np

from .ingest import DailySeries

__all__ = [
    "StlParams",
    "Decomposition",
    "default_trend_window",
    "loess_smooth",
    "stl_decompose",
    "remainder_of",
    "calendar_buckets",
]


@dataclass(frozen=True)
class StlParams:
    """Decomposition controls.

    seasonal_mode is either the string "periodic" or an odd integer window
    width for the cross-year subseries smoother. trend_window = None picks
    the default for the series length at decomposition time.
    """

    period: int = 365
    seasonal_mode: object = "periodic"
    trend_window: int = None
    loess_degree: int = 1
    inner_iterations: int = 2
    robust_iterations: int = 1

    def __post_init__(self):
        if self.period < 2:
            raise ValueError("period must be at least 2 days")
        if self.seasonal_mode != "periodic":
            w = self.seasonal_mode
            if not (isinstance(w, int) and w >= 3 and w % 2 == 1):
                raise ValueError(
                    "seasonal_mode must be 'periodic' or an odd window >= 3"
                )
        if self.trend_window is not None:
            if self.trend_window < 3 or self.trend_window % 2 == 0:
                raise ValueError("trend_window must be odd and >= 3")
        if self.loess_degree not in (1, 2):
            raise ValueError("loess_degree must be 1 or 2")
        if self.inner_iterations < 1:
            raise ValueError("inner_iterations must be >= 1")
        if self.robust_iterations < 0:
            raise ValueError("robust_iterations must be >= 0")


@dataclass(frozen=True)
class Decomposition:
    """Additive split value = trend + seasonal + remainder.

    All three arrays span every day of the input series; the remainder is
    NaN exactly where the input was missing.
    """

    trend: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray
    period: int

    def __post_init__(self):
        for name in ("trend", "seasonal", "remainder"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (self.trend.size == self.seasonal.size == self.remainder.size):
            raise ValueError("component length mismatch")


def default_trend_window(period: int, n_days: int, seasonal_mode="periodic") -> int:
    """Smallest odd window >= 1.5 * period / (1 - 1.5 / seasonal_span).

    The periodic seasonal acts like a smoother spanning the whole series,
    so its equivalent span is taken as 10 * n_days + 1.
    """
    span = 10 * n_days + 1 if seasonal_mode == "periodic" else int(seasonal_mode)
    w = math.ceil(1.5 * period / (1.0 - 1.5 / span))
    if w % 2 == 0:
        w += 1
    return max(w, 3)


# ---------------------------------------------------------------------------
# loess
# ---------------------------------------------------------------------------

def _window_starts(xs: np.ndarray, eval_at: np.ndarray, window: int) -> np.ndarray:
    """Start index of the window of the `window` nearest xs for each eval
    point; neighborhoods of sorted data are always contiguous."""
    n = xs.size
    pos = np.searchsorted(xs, eval_at)
    starts = np.clip(pos - (window + 1) // 2, 0, n - window).astype(np.int64)
    for i in range(eval_at.size):
        s = int(starts[i])
        x0 = eval_at[i]
        while s > 0 and x0 - xs[s - 1] <= xs[s + window - 1] - x0:
            s -= 1
        while s + window < n and xs[s + window] - x0 < x0 - xs[s]:
            s += 1
        starts[i] = s
    return starts


def loess_smooth(xs, ys, weights, window: int, degree: int, eval_at=None) -> np.ndarray:
    """Local weighted polynomial regression with tricube neighborhood weights.

    At each evaluation point the `window` nearest sample points are fit
    with a degree-1 or degree-2 weighted polynomial; the weights are
    tricube in scaled distance multiplied by the supplied per-point
    weights. A window larger than the series uses every point. Points
    whose entire neighborhood has zero weight raise, naming the point.
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    wts_in = np.ascontiguousarray(weights, dtype=np.float64)
    if not (xs.size == ys.size == wts_in.size):
        raise ValueError("xs, ys, weights must have equal length")
    if xs.size > 1 and not np.all(np.diff(xs) > 0):
        raise ValueError("xs must be strictly increasing")
    if np.any(wts_in < 0):
        raise ValueError("weights must be nonnegative")
    if degree not in (1, 2):
        raise ValueError("degree must be 1 or 2")
    if window < degree + 1:
        raise ValueError(f"window {window} too small for degree {degree}")
    window = min(int(window), xs.size)

    eval_at = xs if eval_at is None else np.ascontiguousarray(eval_at, dtype=np.float64)
    starts = _window_starts(xs, eval_at, window)
    cols = starts[:, None] + np.arange(window)

    X = xs[cols]
    Y = ys[cols]
    W0 = wts_in[cols]
    dist = np.abs(X - eval_at[:, None])
    dmax = dist.max(axis=1)
    dmax = np.where(dmax > 0.0, dmax, 1.0)
    u = dist / dmax[:, None]
    tric = np.clip(1.0 - u**3, 0.0, None) ** 3
    w = tric * W0

    sw = w.sum(axis=1)
    if np.any(sw <= 0.0):
        i = int(np.flatnonzero(sw <= 0.0)[0])
        raise ValueError(
            f"loess: all weights vanish in the neighborhood of evaluation "
            f"point {i} (x = {eval_at[i]})"
        )

    # scale ordinates to [-1, 1] for conditioning; value at t = 0 is the fit
    t = (X - eval_at[:, None]) / dmax[:, None]
    s1 = (w * t).sum(axis=1)
    s2 = (w * t * t).sum(axis=1)
    sy = (w * Y).sum(axis=1)
    sty = (w * t * Y).sum(axis=1)

    if degree == 1:
        denom = sw * s2 - s1 * s1
        with np.errstate(divide="ignore", invalid="ignore"):
            fit = (s2 * sy - s1 * sty) / denom
        fallback = sy / sw
        return np.where(denom > 1e-14 * sw * np.maximum(s2, 1e-300), fit, fallback)

    s3 = (w * t**3).sum(axis=1)
    s4 = (w * t**4).sum(axis=1)
    st2y = (w * t * t * Y).sum(axis=1)
    m = np.empty((eval_at.size, 3, 3))
    m[:, 0, 0], m[:, 0, 1], m[:, 0, 2] = sw, s1, s2
    m[:, 1, 0], m[:, 1, 1], m[:, 1, 2] = s1, s2, s3
    m[:, 2, 0], m[:, 2, 1], m[:, 2, 2] = s2, s3, s4
    rhs = np.stack([sy, sty, st2y], axis=1)
    det = np.linalg.det(m)
    ok = np.abs(det) > 1e-12 * np.maximum(sw, 1e-300) ** 3
    fit = sy / sw
    if np.any(ok):
        sol = np.linalg.solve(m[ok], rhs[ok][:, :, None])[:, 0, 0]
        fit = fit.copy()
        fit[ok] = sol
    return fit


# ---------------------------------------------------------------------------
# seasonal folding
# ---------------------------------------------------------------------------

def calendar_buckets(start_date: datetime.date, n_days: int) -> np.ndarray:
    """Day-of-year bucket (0..364) for each day, leap-aware.

    Non-leap years map ordinal day d to bucket d - 1. In leap years
    February 29 goes to bucket 364 (shared with December 31) and March
    onward shifts down two, so March 1 lands on bucket 59 in every year.
    """
    d0 = np.datetime64(start_date.isoformat(), "D")
    dates = d0 + np.arange(n_days)
    years = dates.astype("datetime64[Y]")
    doy = (dates - years.astype("datetime64[D]")).astype(np.int64) + 1
    yr = years.astype(np.int64) + 1970
    leap = (yr % 4 == 0) & ((yr % 100 != 0) | (yr % 400 == 0))
    bucket = doy - 1
    bucket = np.where(leap & (doy == 60), 364, bucket)
    bucket = np.where(leap & (doy > 60), doy - 2, bucket)
    return bucket.astype(np.int64)


def _fill_empty_buckets(means: np.ndarray) -> np.ndarray:
    """Circular linear interpolation over buckets that saw no valid day."""
    bad = ~np.isfinite(means)
    if not bad.any():
        return means
    if bad.all():
        raise ValueError("no valid days in any seasonal bucket")
    n = means.size
    idx = np.arange(n, dtype=np.float64)
    good = ~bad
    # wrap one good point on each side so the interpolation is periodic
    xp = np.concatenate(([idx[good][-1] - n], idx[good], [idx[good][0] + n]))
    fp = np.concatenate(([means[good][-1]], means[good], [means[good][0]]))
    out = means.copy()
    out[bad] = np.interp(idx[bad], xp, fp)
    return out


def _periodic_seasonal(detr, bucket, w, period):
    num = np.bincount(bucket, weights=w * detr, minlength=period)
    den = np.bincount(bucket, weights=w, minlength=period)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = num / den
    means = _fill_empty_buckets(means)
    means = means - means.mean()
    return means[bucket]


def _windowed_seasonal(detr, bucket, w, period, width, degree):
    seasonal = np.zeros_like(detr)
    for b in range(period):
        sel = np.flatnonzero(bucket == b)
        if sel.size == 0:
            continue
        if sel.size == 1 or w[sel].sum() <= 0:
            ww = w[sel]
            seasonal[sel] = (ww * detr[sel]).sum() / ww.sum() if ww.sum() > 0 else 0.0
            continue
        ord_ = np.arange(sel.size, dtype=np.float64)
        seasonal[sel] = loess_smooth(ord_, detr[sel], w[sel],
                                     min(width, sel.size), min(degree, sel.size - 1) or 1)
    wsum = w.sum()
    if wsum > 0:
        seasonal = seasonal - (w * seasonal).sum() / wsum
    return seasonal


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

def stl_decompose(series: DailySeries, params: StlParams = StlParams()) -> Decomposition:
    """Split a daily series into trend + seasonal + remainder.

    Inner iterations alternate the seasonal (calendar mean of the
    detrended series in periodic mode) and the loess trend of the
    deseasonalized series. Each robustness iteration then recomputes both
    with bisquare weights derived from the remainder, which pulls outliers
    out of trend and seasonal and leaves them in the remainder.

    The calendar-mean fold is used when period == 365; other periods fold
    positionally (day index modulo period).
    """
    y = series.values
    n = y.size
    if n < 2 * params.period:
        raise ValueError(
            f"series length {n} is shorter than two periods "
            f"({2 * params.period} days)"
        )
    valid = ~series.missing_mask
    yz = np.where(valid, y, 0.0)

    if params.period == 365:
        bucket = calendar_buckets(series.start_date, n)
    else:
        bucket = np.arange(n, dtype=np.int64) % params.period

    tw = params.trend_window
    if tw is None:
        tw = default_trend_window(params.period, n, params.seasonal_mode)
    xs = np.arange(n, dtype=np.float64)

    rho = np.ones(n)
    trend = np.zeros(n)
    seasonal = np.zeros(n)
    for outer in range(params.robust_iterations + 1):
        w = rho * valid
        for _ in range(params.inner_iterations):
            detr = yz - trend
            if params.seasonal_mode == "periodic":
                seasonal = _periodic_seasonal(detr, bucket, w, params.period)
            else:
                seasonal = _windowed_seasonal(
                    detr, bucket, w, params.period,
                    int(params.seasonal_mode), params.loess_degree,
                )
            trend = loess_smooth(xs, yz - seasonal, w, tw, params.loess_degree)
        if outer < params.robust_iterations:
            resid = np.where(valid, yz - trend - seasonal, np.nan)
            rho = _bisquare(resid)

    remainder = np.where(valid, yz - trend - seasonal, np.nan)
    return Decomposition(trend=trend, seasonal=seasonal,
                         remainder=remainder, period=params.period)


def _bisquare(resid: np.ndarray) -> np.ndarray:
    """Bisquare robustness weights, cutoff at 6 * median(|residual|)."""
    absr = np.abs(resid)
    h = 6.0 * np.nanmedian(absr)
    if not h > 0:
        return np.where(np.isfinite(resid), 1.0, 0.0)
    u = absr / h
    w = np.where(u < 1.0, (1.0 - u**2) ** 2, 0.0)
    return np.where(np.isfinite(resid), w, 0.0)


def remainder_of(series: DailySeries, params: StlParams = StlParams()):
    """Remainder sample with missing days dropped, plus its size M."""
    dec = stl_decompose(series, params)
    sample = dec.remainder[np.isfinite(dec.remainder)]
    return sample, int(sample.size)
