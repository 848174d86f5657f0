"""Pipeline orchestration for the command line.

Subcommands, in pipeline order:

    synth      write a synthetic fixture bundle (stations.csv, measurements/)
    ingest     raw measurements -> per-station daily CSVs + qc_report.csv
    decompose  daily CSVs -> trend/seasonal/remainder CSVs
    fitdist    per-station family fits -> kl_report.csv + kl_boxplot.csv
    fs         remainder samples -> fs_results.csv + fs_plane.csv
    map        station metrics -> ESRI ASCII grids + shuffle reports
    report     metric-vs-covariate correlations -> correlation_report.csv

Each command resolves its configuration as defaults, then `--config`
key=value lines, then explicit flags; the resolved configuration is echoed
to `run_config.txt` in the output directory before any computation. All
artifacts are written atomically and deterministically, so a rerun with
the same inputs, config, and seed is byte-identical.

The single global seed fans out to the stochastic stages by fixed offsets
(shuffle test +101, correlation permutations +202, shuffled-map
permutation +303), keeping each sub-analysis individually reproducible.

Exit status: 0 success, 1 computational failure, 2 input error.
"""

import argparse
import dataclasses
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import distributions, ingest, spatial, stl, synthetic
from ._util import atomic_write_text, fmt17, fmtr
from .infometrics import QuadratureSpec, fs_metrics, fs_plane, write_fs_results_csv
from .kde import log_spaced_grid

__all__ = ["RunConfig", "main"]

SEED_SHUFFLE = 101
SEED_CORR = 202
SEED_MAP_PERM = 303


@dataclass
class RunConfig:
    """Fully defaulted pipeline configuration; any field can come from a
    --config file (key=value lines) or a command-line flag."""

    stations: str = "stations.csv"
    measurements: str = "measurements"
    out: str = "out"
    min_coverage: float = 0.8
    max_gap_days: int = 3
    min_retention: float = 0.7
    period: int = 365
    seasonal: str = "periodic"
    trend_window: int = 0  # 0 = pick the default for the series length
    robust_iterations: int = 1
    bandwidth: str = "silverman"
    cv_grid: str = ""  # "lo:hi:n", empty = default grid around Silverman
    quad_nodes: int = 4096
    range_pad: float = 8.0
    min_m: int = 100
    kl_on: str = "daily"  # sample for fitdist: "daily" or "remainder"
    empirical: str = "kde"  # reference density: "kde" or "histogram"
    k: int = 0  # 0 = select by leave-one-out cross-validation
    weighting: str = "uniform"
    cellsize: float = 250.0
    n_shuffles: int = 199
    n_stations: int = 24
    years: int = 3
    coupling: str = "monotone"  # synth disorder coupling: "monotone" or "none"
    step_seconds: int = 1800
    seed: int = 0
    jobs: int = 1
    skip_bad: bool = False


class InputError(Exception):
    """Problem with files or flags; maps to exit status 2."""


def _coerce(raw: str, to_type):
    if to_type is bool:
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return to_type(raw)


def resolve_config(args) -> RunConfig:
    """defaults < --config file < explicit flags."""
    cfg = RunConfig()
    fields = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    types = {"stations": str, "measurements": str, "out": str}
    for f in dataclasses.fields(RunConfig):
        types[f.name] = type(getattr(cfg, f.name))
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    if "=" not in line:
                        raise InputError(
                            f"{args.config}:{lineno}: expected key=value, got {line!r}"
                        )
                    key, val = (s.strip() for s in line.split("=", 1))
                    if key not in fields:
                        raise InputError(f"{args.config}:{lineno}: unknown key {key!r}")
                    try:
                        setattr(cfg, key, _coerce(val, types[key]))
                    except ValueError as exc:
                        raise InputError(f"{args.config}:{lineno}: {exc}") from None
        except OSError as exc:
            raise InputError(f"cannot read config: {exc}") from None
    for key in fields:
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(cfg, key, flag)
    return cfg


def _echo_config(cfg: RunConfig, command: str) -> None:
    os.makedirs(cfg.out, exist_ok=True)
    lines = [f"command = {command}"]
    for f in sorted(dataclasses.fields(RunConfig), key=lambda f: f.name):
        lines.append(f"{f.name} = {getattr(cfg, f.name)}")
    atomic_write_text(os.path.join(cfg.out, "run_config.txt"), "\n".join(lines) + "\n")


def _pmap(fn, items, jobs: int):
    """Ordered map, optionally across processes; merge order never depends
    on scheduling."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _resolve_cv_grid(cfg: RunConfig):
    if not cfg.cv_grid:
        return None
    try:
        lo, hi, n = cfg.cv_grid.split(":")
        return log_spaced_grid(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise InputError(f"--cv-grid must be lo:hi:n, got {cfg.cv_grid!r} ({exc})") from None


def _quadrature(cfg: RunConfig) -> QuadratureSpec:
    return QuadratureSpec(range_pad=cfg.range_pad, nodes=cfg.quad_nodes)


def _stl_params(cfg: RunConfig) -> stl.StlParams:
    if cfg.seasonal == "periodic":
        seasonal = "periodic"
    else:
        try:
            seasonal = int(cfg.seasonal)
        except ValueError:
            raise InputError(
                f"--seasonal must be 'periodic' or an odd window, got {cfg.seasonal!r}"
            ) from None
    try:
        return stl.StlParams(
            period=cfg.period,
            seasonal_mode=seasonal,
            trend_window=cfg.trend_window or None,
            robust_iterations=cfg.robust_iterations,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------------------
# shared readers
# ---------------------------------------------------------------------------

QC_HEADER = "station_id,n_days,n_missing,n_filled,retained_fraction,excluded,reason"


def _read_qc_exclusions(out_dir: str) -> dict:
    """station_id -> reason for stations the QC pass excluded."""
    path = os.path.join(out_dir, "qc_report.csv")
    if not os.path.exists(path):
        return {}
    excluded = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != QC_HEADER:
            raise InputError(f"{path}: unexpected header {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if parts[5] == "true":
                excluded[parts[0]] = parts[6]
    return excluded


def _daily_ids(out_dir: str) -> list:
    ddir = os.path.join(out_dir, "daily")
    if not os.path.isdir(ddir):
        raise InputError(f"no daily directory at {ddir}; run `ingest` first")
    return sorted(f[:-4] for f in os.listdir(ddir) if f.endswith(".csv"))


def _read_remainder(path: str) -> np.ndarray:
    vals = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "date,trend,seasonal,remainder":
            raise InputError(f"{path}: unexpected header {header!r}")
        for line in fh:
            field = line.rstrip("\n").split(",")[3]
            if field != "":
                vals.append(float(field))
    return np.array(vals, dtype=np.float64)


def _station_sample(cfg: RunConfig, sid: str, source: str) -> np.ndarray:
    if source == "daily":
        series = ingest.read_daily_csv(os.path.join(cfg.out, "daily", f"{sid}.csv"), sid)
        return series.values[~series.missing_mask]
    path = os.path.join(cfg.out, "stl", f"{sid}.csv")
    if not os.path.exists(path):
        raise InputError(f"no decomposition for {sid} at {path}; run `decompose` first")
    return _read_remainder(path)


def _read_fs_results(out_dir: str):
    path = os.path.join(out_dir, "fs_results.csv")
    if not os.path.exists(path):
        raise InputError(f"no {path}; run `fs` first")
    ids, fim, npow = [], [], []
    with open(path, encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            parts = line.rstrip("\n").split(",")
            ids.append(parts[0])
            fim.append(float(parts[1]))
            npow.append(float(parts[3]))
    return ids, np.array(fim), np.array(npow)


def _stations_for(cfg: RunConfig, ids) -> ingest.StationSet:
    try:
        station_set = ingest.parse_station_table(cfg.stations)
    except OSError as exc:
        raise InputError(f"cannot read station table: {exc}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    missing = [sid for sid in ids if sid not in station_set]
    if missing:
        raise InputError(f"stations absent from {cfg.stations}: {missing[:5]}")
    return station_set


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(cfg: RunConfig) -> int:
    if cfg.coupling not in ("monotone", "none"):
        raise InputError(f"--coupling must be monotone or none, got {cfg.coupling!r}")
    kwargs = {}
    if cfg.coupling == "none":
        kwargs = {"noise_gain": 0.0, "heavy_tail_gain": 0.0}
    spec = synthetic.SyntheticSpec(
        n_stations=cfg.n_stations, years=cfg.years, seed=cfg.seed,
        step_seconds=cfg.step_seconds, **kwargs,
    )
    net = synthetic.generate_network(spec)
    os.makedirs(os.path.join(cfg.out, "measurements"), exist_ok=True)
    synthetic.write_station_table(net.stations, os.path.join(cfg.out, "stations.csv"))
    for raw in net.series:
        synthetic.write_measurements_csv(
            raw, os.path.join(cfg.out, "measurements", f"{raw.station_id}.csv")
        )
    lines = ["station_id,truncation_rate"]
    for sid in sorted(net.truncation_rates):
        lines.append(f"{sid},{fmtr(net.truncation_rates[sid])}")
    atomic_write_text(os.path.join(cfg.out, "truncation_report.csv"),
                      "\n".join(lines) + "\n")
    print(f"synth: wrote {len(net.stations)} stations under {cfg.out}")
    return 0


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

def _ingest_one(task):
    sid, meas_path, daily_path, cfg = task
    try:
        raw = ingest.read_measurements_csv(meas_path, sid)
        daily = ingest.aggregate_daily(raw, cfg.min_coverage)
    except (OSError, ValueError) as exc:
        return (sid, None, f"parse_error: {exc}")
    except Exception as exc:  # surfaced as a computational failure
        return (sid, None, f"internal: {exc}")
    before = daily.n_missing
    daily = ingest.fill_short_gaps(daily, cfg.max_gap_days)
    ingest.write_daily_csv(daily, daily_path)
    retained = ingest.retained_fraction(daily)
    row = {
        "n_days": len(daily),
        "n_missing": daily.n_missing,
        "n_filled": before - daily.n_missing,
        "retained": retained,
        "excluded": retained < cfg.min_retention,
        "reason": "low_retention" if retained < cfg.min_retention else "",
    }
    return (sid, row, None)


def cmd_ingest(cfg: RunConfig) -> int:
    station_set = _stations_for(cfg, [])
    if not os.path.isdir(cfg.measurements):
        raise InputError(f"no measurements directory at {cfg.measurements}")
    os.makedirs(os.path.join(cfg.out, "daily"), exist_ok=True)
    tasks = []
    for sid in sorted(station_set.ids):
        tasks.append((
            sid,
            os.path.join(cfg.measurements, f"{sid}.csv"),
            os.path.join(cfg.out, "daily", f"{sid}.csv"),
            cfg,
        ))
    results = _pmap(_ingest_one, tasks, cfg.jobs)

    lines = [QC_HEADER]
    n_bad = 0
    for sid, row, err in results:
        if err is not None:
            n_bad += 1
            if not cfg.skip_bad:
                print(f"ingest: {sid}: {err}", file=sys.stderr)
                return 2
            lines.append(f"{sid},0,0,0,0.0,true,{err.split(':')[0]}")
            continue
        lines.append(
            f"{sid},{row['n_days']},{row['n_missing']},{row['n_filled']},"
            f"{fmtr(row['retained'])},{'true' if row['excluded'] else 'false'},"
            f"{row['reason']}"
        )
    atomic_write_text(os.path.join(cfg.out, "qc_report.csv"), "\n".join(lines) + "\n")
    print(f"ingest: {len(results) - n_bad} of {len(results)} stations ingested")
    return 0


# ---------------------------------------------------------------------------
# decompose
# ---------------------------------------------------------------------------

def _decompose_one(task):
    sid, daily_path, out_path, cfg = task
    series = ingest.read_daily_csv(daily_path, sid)
    dec = stl.stl_decompose(series, _stl_params(cfg))
    dates = series.dates
    lines = ["date,trend,seasonal,remainder"]
    for i in range(len(series)):
        rem = "" if series.missing_mask[i] else fmtr(dec.remainder[i])
        lines.append(
            f"{dates[i]},{fmtr(dec.trend[i])},{fmtr(dec.seasonal[i])},{rem}"
        )
    atomic_write_text(out_path, "\n".join(lines) + "\n")
    # post-write audit: the written components must still add up
    vals = series.values
    ok = ~series.missing_mask
    recon = dec.trend + dec.seasonal + dec.remainder
    err = np.abs(vals[ok] - recon[ok]) / np.maximum(1.0, np.abs(vals[ok]))
    if err.size and err.max() > 1e-9:
        raise ArithmeticError(f"{sid}: additivity violated after write ({err.max():g})")
    return sid


def cmd_decompose(cfg: RunConfig) -> int:
    excluded = _read_qc_exclusions(cfg.out)
    ids = [sid for sid in _daily_ids(cfg.out) if sid not in excluded]
    if not ids:
        raise InputError("no ingested stations to decompose")
    os.makedirs(os.path.join(cfg.out, "stl"), exist_ok=True)
    tasks = [
        (sid, os.path.join(cfg.out, "daily", f"{sid}.csv"),
         os.path.join(cfg.out, "stl", f"{sid}.csv"), cfg)
        for sid in ids
    ]
    try:
        _pmap(_decompose_one, tasks, cfg.jobs)
    except (ValueError, ArithmeticError) as exc:
        print(f"decompose: {exc}", file=sys.stderr)
        return 1
    print(f"decompose: {len(ids)} stations decomposed")
    return 0


# ---------------------------------------------------------------------------
# fitdist
# ---------------------------------------------------------------------------

def _fit_one(task):
    sid, sample, cfg = task
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        reports = distributions.rank_families(
            sample, bandwidth=cfg.bandwidth, quad=_quadrature(cfg),
            empirical=cfg.empirical,
        )
    rows = []
    for rep in reports:
        vals = list(rep.params.values) + [""] * (3 - len(rep.params.values))
        rows.append((
            sid, rep.family,
            *(fmt17(v) if v != "" else "" for v in vals),
            fmt17(rep.log_likelihood), fmt17(rep.kl_divergence),
            "true" if rep.converged else "false",
        ))
    return rows


def cmd_fitdist(cfg: RunConfig) -> int:
    if cfg.kl_on not in ("daily", "remainder"):
        raise InputError(f"--on must be daily or remainder, got {cfg.kl_on!r}")
    excluded = _read_qc_exclusions(cfg.out)
    ids = [sid for sid in _daily_ids(cfg.out) if sid not in excluded]
    if not ids:
        raise InputError("no stations to fit")
    station_set = _stations_for(cfg, ids)
    tasks = [(sid, _station_sample(cfg, sid, cfg.kl_on), cfg) for sid in ids]
    try:
        all_rows = _pmap(_fit_one, tasks, cfg.jobs)
    except ValueError as exc:
        print(f"fitdist: {exc}", file=sys.stderr)
        return 1

    lines = ["station_id,family,param1,param2,param3,log_lik,kl_nats,converged"]
    for rows in all_rows:
        for r in rows:
            lines.append(",".join(str(c) for c in r))
    atomic_write_text(os.path.join(cfg.out, "kl_report.csv"), "\n".join(lines) + "\n")

    box = []
    for rows in all_rows:
        for r in rows:
            box.append((station_set[r[0]].network, r[1], r[0], r[6]))
    box.sort()
    blines = ["network,family,station_id,kl_nats"]
    blines.extend(",".join(b) for b in box)
    atomic_write_text(os.path.join(cfg.out, "kl_boxplot.csv"), "\n".join(blines) + "\n")
    print(f"fitdist: {len(ids)} stations fitted on {cfg.kl_on} samples")
    return 0


# ---------------------------------------------------------------------------
# fs
# ---------------------------------------------------------------------------

def _fs_one(task):
    sid, cfg = task
    sample = _station_sample(cfg, sid, "remainder")
    if sample.size < cfg.min_m:
        return (sid, None, f"m_too_small: {sample.size} < {cfg.min_m}")
    try:
        fm = fs_metrics(sample, bandwidth=cfg.bandwidth, quad=_quadrature(cfg),
                        min_m=cfg.min_m, cv_grid=_resolve_cv_grid(cfg))
    except ValueError as exc:
        return (sid, None, f"metric_failure: {exc}")
    return (sid, fm, None)


def cmd_fs(cfg: RunConfig) -> int:
    if cfg.bandwidth not in ("silverman", "cv"):
        raise InputError(f"--bandwidth must be silverman or cv, got {cfg.bandwidth!r}")
    excluded = _read_qc_exclusions(cfg.out)
    ids = [sid for sid in _daily_ids(cfg.out) if sid not in excluded]
    if not ids:
        raise InputError("no stations for FS metrics")
    station_set = _stations_for(cfg, ids)
    results = _pmap(_fs_one, [(sid, cfg) for sid in ids], cfg.jobs)

    metrics, exclusions = {}, dict(excluded)
    for sid, fm, err in results:
        if fm is None:
            exclusions[sid] = err
        else:
            metrics[sid] = fm
    if not metrics:
        print("fs: no station yielded metrics", file=sys.stderr)
        return 1
    write_fs_results_csv(metrics, os.path.join(cfg.out, "fs_results.csv"))

    plane = fs_plane(station_set, metrics, exclusions)
    lines = [",".join(plane.columns)]
    for row in plane.itertuples(index=False):
        lines.append(
            f"{row.station_id},{fmt17(row.entropy_power)},{fmt17(row.fim)},"
            f"{fmt17(row.elevation)},{fmt17(row.slope_mu)},{row.network}"
        )
    atomic_write_text(os.path.join(cfg.out, "fs_plane.csv"), "\n".join(lines) + "\n")

    xlines = ["station_id,reason"]
    for sid in sorted(exclusions):
        xlines.append(f"{sid},{exclusions[sid]}")
    atomic_write_text(os.path.join(cfg.out, "fs_exclusions.csv"),
                      "\n".join(xlines) + "\n")
    print(f"fs: metrics for {len(metrics)} stations "
          f"({len(exclusions)} excluded)")
    return 0


# ---------------------------------------------------------------------------
# map and report
# ---------------------------------------------------------------------------

def _metric_points(cfg: RunConfig):
    ids, fim, npow = _read_fs_results(cfg.out)
    station_set = _stations_for(cfg, ids)
    pts = np.array([[station_set[sid].x, station_set[sid].y] for sid in ids])
    return ids, pts, {"fim": fim, "nx": npow}, station_set


def cmd_map(cfg: RunConfig) -> int:
    ids, pts, metrics, _ = _metric_points(cfg)
    if len(ids) < 10:
        print(f"map: only {len(ids)} stations; need at least 10", file=sys.stderr)
        return 1
    bounds = (pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max())
    mdir = os.path.join(cfg.out, "maps")
    os.makedirs(mdir, exist_ok=True)
    perm_rng = np.random.default_rng((cfg.seed + SEED_MAP_PERM,))
    perm = perm_rng.permutation(len(ids))
    try:
        for name, vals in sorted(metrics.items()):
            k = cfg.k or spatial.select_k(
                pts, vals,
                [c for c in spatial.DEFAULT_K_CANDIDATES if c <= len(ids) - 1],
                cfg.weighting,
            )
            model = spatial.KnnModel(pts, vals, k=k, weighting=cfg.weighting)
            grid = spatial.make_grid_map(model, bounds, cfg.cellsize)
            spatial.write_esri_ascii(grid, os.path.join(mdir, f"{name}.asc"))

            shuffled = spatial.KnnModel(pts, vals[perm], k=k, weighting=cfg.weighting)
            sgrid = spatial.make_grid_map(shuffled, bounds, cfg.cellsize)
            spatial.write_esri_ascii(sgrid, os.path.join(mdir, f"{name}_shuffled.asc"))

            rep = spatial.shuffle_test(pts, vals, k=k, n_shuffles=cfg.n_shuffles,
                                       seed=cfg.seed + SEED_SHUFFLE,
                                       weighting=cfg.weighting)
            spatial.write_shuffle_report(
                rep, os.path.join(mdir, f"shuffle_{name}.txt"))
            print(f"map: {name}: k={k} observed R2={rep.observed_skill:.3f} "
                  f"p={rep.p_value:.4f}")
    except ValueError as exc:
        print(f"map: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_report(cfg: RunConfig) -> int:
    ids, pts, metrics, station_set = _metric_points(cfg)
    elev = np.array([station_set[sid].elevation for sid in ids])
    slope = np.array([station_set[sid].slope_mu for sid in ids])
    covs = {"elevation": elev, "slope_mu": slope}
    lines = ["metric,covariate,pearson_r,pearson_p,spearman_rho,spearman_p,n_stations"]
    try:
        for mname, mvals in sorted(metrics.items()):
            for cname, cvals in sorted(covs.items()):
                rep = spatial.covariate_correlation(
                    mvals, cvals, seed=cfg.seed + SEED_CORR)
                lines.append(
                    f"{mname},{cname},{fmt17(rep.pearson_r)},{fmtr(rep.pearson_p)},"
                    f"{fmt17(rep.spearman_rho)},{fmtr(rep.spearman_p)},{len(ids)}"
                )
    except ValueError as exc:
        print(f"report: {exc}", file=sys.stderr)
        return 1
    atomic_write_text(os.path.join(cfg.out, "correlation_report.csv"),
                      "\n".join(lines) + "\n")
    print(f"report: correlations over {len(ids)} stations written")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--seed", type=int, help="global seed (fans out by fixed offsets)")
    p.add_argument("--jobs", type=int, help="parallel station workers")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="windinfo",
        description="Wind-speed disorder pipeline: ingest, decompose, fit, "
                    "information metrics, mapping.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic fixture bundle")
    _add_common(p)
    p.add_argument("--n-stations", dest="n_stations", type=int)
    p.add_argument("--years", type=int)
    p.add_argument("--coupling", choices=["monotone", "none"])
    p.add_argument("--step-seconds", dest="step_seconds", type=int)

    p = sub.add_parser("ingest", help="aggregate raw measurements to daily means")
    _add_common(p)
    p.add_argument("--stations")
    p.add_argument("--measurements")
    p.add_argument("--min-coverage", dest="min_coverage", type=float)
    p.add_argument("--max-gap", dest="max_gap_days", type=int)
    p.add_argument("--skip-bad", dest="skip_bad", action="store_true", default=None)

    p = sub.add_parser("decompose", help="trend/seasonal/remainder per station")
    _add_common(p)
    p.add_argument("--seasonal", help="periodic, or an odd window width")
    p.add_argument("--trend-window", dest="trend_window", type=int)
    p.add_argument("--period", type=int)

    p = sub.add_parser("fitdist", help="family fits and KL ranking per station")
    _add_common(p)
    p.add_argument("--stations")
    p.add_argument("--on", dest="kl_on", choices=["daily", "remainder"])
    p.add_argument("--bandwidth", choices=["silverman", "cv"])
    p.add_argument("--cv-grid", dest="cv_grid")
    p.add_argument("--empirical", choices=["kde", "histogram"])

    p = sub.add_parser("fs", help="information metrics per station")
    _add_common(p)
    p.add_argument("--stations")
    p.add_argument("--bandwidth", choices=["silverman", "cv"])
    p.add_argument("--cv-grid", dest="cv_grid")
    p.add_argument("--min-m", dest="min_m", type=int)
    p.add_argument("--quad-nodes", dest="quad_nodes", type=int)

    p = sub.add_parser("map", help="kNN grids and shuffle structure test")
    _add_common(p)
    p.add_argument("--stations")
    p.add_argument("--cellsize", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--weighting", choices=["uniform", "inverse_distance"])
    p.add_argument("--shuffles", dest="n_shuffles", type=int)

    p = sub.add_parser("report", help="metric vs covariate correlations")
    _add_common(p)
    p.add_argument("--stations")

    return ap


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "decompose": cmd_decompose,
    "fitdist": cmd_fitdist,
    "fs": cmd_fs,
    "map": cmd_map,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        _echo_config(cfg, args.command)
        return COMMANDS[args.command](cfg)
    except InputError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
