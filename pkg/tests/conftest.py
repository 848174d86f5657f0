import datetime

import numpy as np
import pytest

from windinfo.ingest import DailySeries


def make_daily(values, start=datetime.date(2013, 1, 1), station_id="T00",
               filled=None):
    """DailySeries from a value array; NaNs become the missing mask."""
    vals = np.asarray(values, dtype=np.float64)
    miss = np.isnan(vals)
    cov = np.where(miss, 0.0, 1.0)
    fill = np.zeros(vals.size, bool) if filled is None else np.asarray(filled, bool)
    return DailySeries(station_id, start, vals, miss, cov, fill)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
