import numpy as np
import pytest

from windinfo import kde
from windinfo.infometrics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    entropy_power,
    fim_sample_average,
    fisher_information,
    fs_metrics,
    fs_plane,
    shannon_entropy,
    write_fs_results_csv,
)
from windinfo.ingest import StationMeta, StationSet

_TWO_PI_E = 2.0 * np.pi * np.e


def test_entropy_power_identity():
    # exp(2H)/(2 pi e) with H = 0.5 ln(2 pi e v) gives back v exactly
    for v in (0.25, 1.0, 7.5):
        h = 0.5 * np.log(_TWO_PI_E * v)
        assert entropy_power(h) == pytest.approx(v, rel=1e-12)
    with pytest.raises(ValueError):
        entropy_power(np.inf)


def test_gaussian_sample_matches_analytic_values():
    # N(0, sigma^2): I = 1/sigma^2, H = 0.5 ln(2 pi e sigma^2), N_X = sigma^2
    sigma = 1.0
    x = np.random.default_rng(7).normal(0.0, sigma, 4000)
    fs = fs_metrics(x)
    assert fs.fim == pytest.approx(1.0 / sigma**2, rel=0.15)
    assert fs.entropy == pytest.approx(0.5 * np.log(_TWO_PI_E * sigma**2), rel=0.03)
    assert fs.entropy_power == pytest.approx(sigma**2, rel=0.08)
    assert fs.fs_complexity == pytest.approx(fs.fim * fs.entropy_power, rel=1e-12)
    assert fs.m == 4000


def test_entropy_agrees_with_resubstitution_estimate(rng):
    # -mean(log f(x_i)) is an independent plug-in route to the same H
    x = rng.gamma(5.0, 1.2, 3000)
    est = kde.DensityEstimate(x, kde.silverman_bandwidth(x))
    h_quad = shannon_entropy(est)
    h_sub = -float(np.mean(np.log(kde.pdf_at(est, x))))
    assert h_quad == pytest.approx(h_sub, rel=0.05)


def test_fim_agrees_with_sample_average_estimator(rng):
    # integral route weighs the score by the smoothed density, the sample
    # route by the raw points; they drift apart by ~8% at this sample size
    x = rng.normal(3.0, 1.5, 3000)
    est = kde.DensityEstimate(x, kde.silverman_bandwidth(x))
    assert fisher_information(est) == pytest.approx(fim_sample_average(est), rel=0.12)


def test_trapezoid_agrees_with_adaptive_scheme(rng):
    x = rng.normal(0.0, 1.0, 400)
    est = kde.DensityEstimate(x, kde.silverman_bandwidth(x))
    adaptive = QuadratureSpec(scheme="adaptive")
    assert fisher_information(est) == pytest.approx(
        fisher_information(est, adaptive), rel=1e-6)
    assert shannon_entropy(est) == pytest.approx(
        shannon_entropy(est, adaptive), rel=1e-6)


def test_quadrature_error_estimate_is_small(rng):
    x = rng.normal(0.0, 1.0, 500)
    est = kde.DensityEstimate(x, kde.silverman_bandwidth(x))
    h, err = shannon_entropy(est, return_error=True)
    assert err >= 0.0
    assert err < 1e-8 * abs(h)  # 4096 trapezoid nodes on a smooth density
    i, ierr = fisher_information(est, return_error=True)
    assert ierr < 1e-6 * i


def test_scaling_and_translation_identities(rng):
    x = rng.normal(4.0, 1.3, 2000)
    base = fs_metrics(x)
    c = 3.7
    scaled = fs_metrics(c * x)
    assert scaled.entropy_power == pytest.approx(c**2 * base.entropy_power, rel=1e-9)
    assert scaled.fim == pytest.approx(base.fim / c**2, rel=1e-9)
    shifted = fs_metrics(x + 12.3)
    assert shifted.entropy_power == pytest.approx(base.entropy_power, rel=1e-9)
    assert shifted.fim == pytest.approx(base.fim, rel=1e-9)


@pytest.mark.parametrize("draw", ["normal", "exponential", "uniform"])
def test_stam_bound(draw, rng):
    x = getattr(rng, draw)(size=1500) + (3.0 if draw != "uniform" else 0.0)
    fs = fs_metrics(x)
    assert fs.fs_complexity >= 1.0 - 1e-3
    if draw == "normal":
        # smoothing bias inflates the product a little at this sample size
        assert fs.fs_complexity == pytest.approx(1.0, rel=0.15)


def test_min_m_guard(rng):
    with pytest.raises(ValueError, match="min_m|sample"):
        fs_metrics(rng.normal(0, 1, 40))
    fs = fs_metrics(rng.normal(0, 1, 40), min_m=30)
    assert fs.m == 40


def test_bandwidth_modes(rng):
    x = rng.normal(0, 1, 500)
    b_fixed = fs_metrics(x, bandwidth=0.3)
    assert b_fixed.bandwidth == 0.3
    b_sil = fs_metrics(x)
    assert b_sil.bandwidth == pytest.approx(kde.silverman_bandwidth(x), rel=1e-12)
    with pytest.raises(ValueError):
        fs_metrics(x, bandwidth="nope")


def _toy_stations():
    return StationSet([
        StationMeta("A", 0.0, 0.0, 100.0, 0.1, "NET_A"),
        StationMeta("B", 1000.0, 0.0, 450.0, 0.3, "NET_B"),
        StationMeta("C", 0.0, 1000.0, 900.0, 0.6, "NET_A"),
    ])


def test_fs_plane_frame(rng):
    stations = _toy_stations()
    metrics = {sid: fs_metrics(rng.normal(0, 1 + i, 400))
               for i, sid in enumerate(stations.ids)}
    df = fs_plane(stations, metrics)
    assert list(df.columns) == ["station_id", "entropy_power", "fim",
                                "elevation", "slope_mu", "network"]
    assert list(df["station_id"]) == ["A", "B", "C"]
    assert df.loc[df.station_id == "B", "elevation"].item() == 450.0

    partial = {k: v for k, v in metrics.items() if k != "B"}
    df2 = fs_plane(stations, partial, exclusions={"B": "m_too_small"})
    assert list(df2["station_id"]) == ["A", "C"]
    with pytest.raises(ValueError, match="neither"):
        fs_plane(stations, partial)


def test_write_fs_results_roundtrip(tmp_path, rng):
    metrics = {"S1": fs_metrics(rng.normal(0, 1, 300)),
               "S0": fs_metrics(rng.gamma(4, 1, 300))}
    path = tmp_path / "fs_results.csv"
    write_fs_results_csv(metrics, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ("station_id,fim,entropy_nats,entropy_power,"
                        "fs_complexity,m_used,bandwidth")
    assert len(lines) == 3
    sid, fim, ent, npow, comp, m, bw = lines[1].split(",")
    assert sid == "S0"  # rows sorted by id
    assert float(fim) == metrics["S0"].fim  # 17 significant digits round-trip
    assert int(m) == 300
