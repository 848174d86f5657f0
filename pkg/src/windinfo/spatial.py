"""kNN mapping of station metrics, covariate correlation, and the
shuffled-station structure test.

Distances are plain Euclidean in projected meters; elevation never enters
the metric. Neighbor ties at identical distance are resolved toward the
earlier training point, so predictions are reproducible regardless of how
the distances happen to collide.

The structure test asks whether a metric's spatial arrangement carries
information: its leave-one-out kNN skill (R²) on the true station
assignment is compared with the skill distribution after randomly
permuting values over stations. The p-value uses the add-one estimator,
so it can never be exactly zero.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ._util import atomic_write_text, fmtr

__all__ = [
    "KnnModel",
    "GridMap",
    "ShuffleReport",
    "CorrelationReport",
    "knn_predict",
    "loo_predictions",
    "loo_r2",
    "select_k",
    "make_grid_map",
    "shuffle_test",
    "covariate_correlation",
    "write_esri_ascii",
    "read_esri_ascii",
    "write_shuffle_report",
    "read_shuffle_report",
]

WEIGHTINGS = ("uniform", "inverse_distance")
NODATA = -9999.0
_DIST_EPS = 1e-9
_MAX_CELLS = int(5e7)
_QUERY_BLOCK = 2_000_000


@dataclass(frozen=True)
class KnnModel:
    """Training set and hyperparameters for nearest-neighbor prediction."""

    points: np.ndarray
    values: np.ndarray
    k: int
    weighting: str = "uniform"

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        vals = np.array(self.values, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        if vals.shape != (pts.shape[0],):
            raise ValueError("values must have shape (n,)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("coordinates must be finite")
        if not np.all(np.isfinite(vals)):
            raise ValueError("training values must be finite")
        if not 1 <= self.k <= pts.shape[0]:
            raise ValueError(f"k must be in [1, {pts.shape[0]}], got {self.k}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}")
        pts.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class GridMap:
    """Regular raster; row 0 is the northernmost row, NaN marks nodata."""

    xll: float
    yll: float
    cellsize: float
    ncols: int
    nrows: int
    values: np.ndarray

    def __post_init__(self):
        if self.cellsize <= 0:
            raise ValueError("cellsize must be positive")
        vals = np.array(self.values, dtype=np.float64).ravel()
        if vals.size != self.ncols * self.nrows:
            raise ValueError(
                f"values length {vals.size} != ncols*nrows = {self.ncols * self.nrows}"
            )
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def as_array(self) -> np.ndarray:
        """(nrows, ncols) view, north row first."""
        return self.values.reshape(self.nrows, self.ncols)


@dataclass(frozen=True)
class ShuffleReport:
    """Observed LOO skill against the permutation-null skill distribution."""

    observed_skill: float
    null_skills: np.ndarray
    n_shuffles: int
    seed: int
    p_value: float

    def __post_init__(self):
        nulls = np.array(self.null_skills, dtype=np.float64)
        nulls.flags.writeable = False
        object.__setattr__(self, "null_skills", nulls)
        if nulls.size != self.n_shuffles:
            raise ValueError("null_skills length must equal n_shuffles")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value out of range: {self.p_value}")


@dataclass(frozen=True)
class CorrelationReport:
    pearson_r: float
    pearson_p: float
    spearman_rho: float
    spearman_p: float
    n_permutations: int
    seed: int


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------

def _neighbor_table(d2: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest training points per query row; exact ties
    fall to the lower training index (stable sort on squared distance)."""
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def _predict_from_neighbors(values, nbr, d2, weighting):
    if weighting == "uniform":
        return values[nbr].mean(axis=1)
    d = np.sqrt(np.take_along_axis(d2, nbr, axis=1))
    w = 1.0 / (d + _DIST_EPS)
    return (w * values[nbr]).sum(axis=1) / w.sum(axis=1)


def knn_predict(model: KnnModel, query):
    """Predict the metric at one (x, y) or at an (m, 2) array of points."""
    q = np.asarray(query, dtype=np.float64)
    single = q.ndim == 1
    q2 = np.atleast_2d(q)
    if q2.shape[1] != 2:
        raise ValueError("query must be (x, y) or an (m, 2) array")
    dx = q2[:, 0][:, None] - model.points[:, 0][None, :]
    dy = q2[:, 1][:, None] - model.points[:, 1][None, :]
    d2 = dx * dx + dy * dy
    nbr = _neighbor_table(d2, model.k)
    out = _predict_from_neighbors(model.values, nbr, d2, model.weighting)
    return float(out[0]) if single else out


def _pairwise_d2(points: np.ndarray) -> np.ndarray:
    dx = points[:, 0][:, None] - points[:, 0][None, :]
    dy = points[:, 1][:, None] - points[:, 1][None, :]
    return dx * dx + dy * dy


def loo_predictions(points, values, k: int, weighting: str = "uniform") -> np.ndarray:
    """Leave-one-out prediction at every training point."""
    pts = np.asarray(points, dtype=np.float64)
    vals = np.asarray(values, dtype=np.float64)
    if not 1 <= k <= pts.shape[0] - 1:
        raise ValueError(f"k must be in [1, {pts.shape[0] - 1}] for leave-one-out")
    d2 = _pairwise_d2(pts)
    np.fill_diagonal(d2, np.inf)
    nbr = _neighbor_table(d2, k)
    return _predict_from_neighbors(vals, nbr, d2, weighting)


def loo_r2(points, values, k: int, weighting: str = "uniform") -> float:
    """Leave-one-out R² (skill) of the kNN model on its own stations."""
    vals = np.asarray(values, dtype=np.float64)
    pred = loo_predictions(points, vals, k, weighting)
    ss_tot = float(np.sum((vals - vals.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("zero-variance values: skill undefined")
    ss_res = float(np.sum((vals - pred) ** 2))
    return 1.0 - ss_res / ss_tot


DEFAULT_K_CANDIDATES = (1, 2, 3, 5, 7, 10, 15)


def select_k(points, values, k_candidates=DEFAULT_K_CANDIDATES,
             weighting: str = "uniform") -> int:
    """Candidate k with the smallest leave-one-out MSE; ties go to the
    smaller k."""
    pts = np.asarray(points, dtype=np.float64)
    vals = np.asarray(values, dtype=np.float64)
    cands = sorted(set(int(k) for k in k_candidates))
    if not cands:
        raise ValueError("empty candidate set")
    n = pts.shape[0]
    if cands[0] < 1 or cands[-1] > n - 1:
        raise ValueError(f"candidates must lie in [1, {n - 1}], got {cands}")
    d2 = _pairwise_d2(pts)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    best_k, best_mse = None, np.inf
    for k in cands:
        nbr = order[:, :k]
        pred = _predict_from_neighbors(vals, nbr, d2, weighting)
        mse = float(np.mean((vals - pred) ** 2))
        if mse < best_mse:
            best_k, best_mse = k, mse
    return best_k


def make_grid_map(model: KnnModel, bounds, cellsize: float = 250.0,
                  max_cells: int = _MAX_CELLS) -> GridMap:
    """Predict at every cell center of a regular grid over ``bounds``.

    ``bounds`` is (xmin, ymin, xmax, ymax) and must contain every training
    station; dimensions round outward so the grid covers the bounds fully.
    """
    xmin, ymin, xmax, ymax = (float(b) for b in bounds)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"degenerate bounds {bounds}")
    if cellsize <= 0:
        raise ValueError("cellsize must be positive")
    px, py = model.points[:, 0], model.points[:, 1]
    if px.min() < xmin or px.max() > xmax or py.min() < ymin or py.max() > ymax:
        raise ValueError("bounds must cover all training stations")
    ncols = max(1, int(np.ceil((xmax - xmin) / cellsize - 1e-12)))
    nrows = max(1, int(np.ceil((ymax - ymin) / cellsize - 1e-12)))
    if ncols * nrows > max_cells:
        raise ValueError(
            f"grid of {ncols}x{nrows} = {ncols * nrows} cells exceeds the "
            f"{max_cells} cap; use a coarser cellsize"
        )
    xc = xmin + (np.arange(ncols) + 0.5) * cellsize
    yc = ymin + (nrows - np.arange(nrows) - 0.5) * cellsize  # north row first
    qx, qy = np.meshgrid(xc, yc)
    queries = np.column_stack([qx.ravel(), qy.ravel()])
    out = np.empty(queries.shape[0])
    block = max(1, _QUERY_BLOCK // max(model.n, 1))
    for lo in range(0, queries.shape[0], block):
        out[lo:lo + block] = knn_predict(model, queries[lo:lo + block])
    return GridMap(xll=xmin, yll=ymin, cellsize=float(cellsize),
                   ncols=ncols, nrows=nrows, values=out)


# ---------------------------------------------------------------------------
# structure test and correlations
# ---------------------------------------------------------------------------

def shuffle_test(points, values, k: int, n_shuffles: int = 199, seed: int = 0,
                 weighting: str = "uniform") -> ShuffleReport:
    """Permutation test of spatial structure in the station values.

    The observed statistic is the LOO R² of the true assignment; the null
    re-permutes the values over the fixed station geometry. Each replicate
    draws its permutation from a generator derived from (seed, replicate),
    so the report is reproducible and independent of evaluation order.
    """
    pts = np.asarray(points, dtype=np.float64)
    vals = np.asarray(values, dtype=np.float64)
    n = pts.shape[0]
    if n < 10:
        raise ValueError(f"structure test needs at least 10 stations, got {n}")
    if n_shuffles < 99:
        raise ValueError(f"n_shuffles must be >= 99, got {n_shuffles}")

    d2 = _pairwise_d2(pts)
    np.fill_diagonal(d2, np.inf)
    nbr = _neighbor_table(d2, k)

    def skill(v):
        pred = _predict_from_neighbors(v, nbr, d2, weighting)
        ss_tot = float(np.sum((v - v.mean()) ** 2))
        return 1.0 - float(np.sum((v - pred) ** 2)) / ss_tot

    if float(np.sum((vals - vals.mean()) ** 2)) == 0.0:
        raise ValueError("zero-variance values: skill undefined")
    observed = skill(vals)
    nulls = np.empty(n_shuffles)
    for j in range(n_shuffles):
        rng = np.random.default_rng((int(seed), j))
        nulls[j] = skill(vals[rng.permutation(n)])
    p = (1.0 + float(np.count_nonzero(nulls >= observed))) / (1.0 + n_shuffles)
    return ShuffleReport(observed_skill=observed, null_skills=nulls,
                         n_shuffles=n_shuffles, seed=int(seed), p_value=p)


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    ac = a - a.mean()
    bc = b - b.mean()
    return float((ac * bc).sum() / np.sqrt((ac * ac).sum() * (bc * bc).sum()))


def covariate_correlation(metric, covariate, n_permutations: int = 9999,
                          seed: int = 0) -> CorrelationReport:
    """Pearson r and Spearman rho with two-sided permutation p-values.

    Permutations shuffle the covariate against the metric with a seeded
    generator; p-values use the add-one estimator.
    """
    a = np.asarray(metric, dtype=np.float64)
    b = np.asarray(covariate, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("metric and covariate must be 1-d of equal length")
    if a.size < 3:
        raise ValueError("need at least 3 pairs")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("missing pairs are not allowed")
    if a.std() == 0.0 or b.std() == 0.0:
        raise ValueError("zero-variance input: correlation undefined")

    ra, rb = rankdata(a), rankdata(b)
    r_obs = _pearson(a, b)
    rho_obs = _pearson(ra, rb)

    rng = np.random.default_rng(int(seed))
    exceed_r = 0
    exceed_rho = 0
    for _ in range(n_permutations):
        perm = rng.permutation(a.size)
        if abs(_pearson(a, b[perm])) >= abs(r_obs) - 1e-15:
            exceed_r += 1
        if abs(_pearson(ra, rb[perm])) >= abs(rho_obs) - 1e-15:
            exceed_rho += 1
    p_r = (1.0 + exceed_r) / (1.0 + n_permutations)
    p_rho = (1.0 + exceed_rho) / (1.0 + n_permutations)
    return CorrelationReport(pearson_r=r_obs, pearson_p=p_r,
                             spearman_rho=rho_obs, spearman_p=p_rho,
                             n_permutations=n_permutations, seed=int(seed))


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def write_esri_ascii(grid: GridMap, path) -> None:
    """ESRI ASCII raster: six header lines then rows, north row first.

    NaN cells are written as the NODATA sentinel; floats use shortest
    round-trip formatting so a write/read cycle is bit-exact.
    """
    lines = [
        f"ncols {grid.ncols}",
        f"nrows {grid.nrows}",
        f"xllcorner {fmtr(grid.xll)}",
        f"yllcorner {fmtr(grid.yll)}",
        f"cellsize {fmtr(grid.cellsize)}",
        "NODATA_value -9999",
    ]
    arr = grid.as_array()
    for i in range(grid.nrows):
        row = arr[i]
        lines.append(" ".join(
            "-9999" if np.isnan(v) else fmtr(v) for v in row
        ))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_esri_ascii(path) -> GridMap:
    """Inverse of write_esri_ascii; NODATA cells come back as NaN."""
    with open(path, encoding="utf-8") as fh:
        header = {}
        for _ in range(6):
            key, val = fh.readline().split()
            header[key.lower()] = val
        body = fh.read().split()
    ncols = int(header["ncols"])
    nrows = int(header["nrows"])
    nodata = float(header["nodata_value"])
    vals = np.array(body, dtype=np.float64)
    if vals.size != ncols * nrows:
        raise ValueError(
            f"{path}: expected {ncols * nrows} cells, found {vals.size}"
        )
    vals[vals == nodata] = np.nan
    return GridMap(xll=float(header["xllcorner"]), yll=float(header["yllcorner"]),
                   cellsize=float(header["cellsize"]), ncols=ncols, nrows=nrows,
                   values=vals)


def write_shuffle_report(report: ShuffleReport, path) -> None:
    """Plain-text key-value dump of every ShuffleReport field."""
    lines = [
        f"observed_skill = {fmtr(report.observed_skill)}",
        f"n_shuffles = {report.n_shuffles}",
        f"seed = {report.seed}",
        f"p_value = {fmtr(report.p_value)}",
        "null_skills = " + " ".join(fmtr(v) for v in report.null_skills),
    ]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_shuffle_report(path) -> ShuffleReport:
    fields = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            key, val = line.split("=", 1)
            fields[key.strip()] = val.strip()
    return ShuffleReport(
        observed_skill=float(fields["observed_skill"]),
        null_skills=np.array(fields["null_skills"].split(), dtype=np.float64),
        n_shuffles=int(fields["n_shuffles"]),
        seed=int(fields["seed"]),
        p_value=float(fields["p_value"]),
    )
