"""Information-theoretic analysis of wind-speed records.

The package turns raw anemometer files into per-station disorder metrics
and maps: daily aggregation with quality control, seasonal-trend
decomposition, Gaussian kernel density estimation, Fisher information and
Shannon entropy power of the deseasonalized fluctuations, classical
distribution fits ranked by Kullback-Leibler divergence, and kNN spatial
interpolation with a permutation test for spatial structure. A synthetic
network generator makes the whole chain reproducible without any
proprietary data.
"""

from .distributions import (DistParams, FitReport, empirical_density,
                            fit_mle, kl_divergence, logpdf, pdf,
                            rank_families)
from .infometrics import (FSMetrics, QuadratureSpec, entropy_power,
                          fisher_information, fs_metrics, fs_plane,
                          shannon_entropy)
from .ingest import (DailySeries, RawSeries, StationMeta, StationSet,
                     aggregate_daily, fill_short_gaps, parse_station_table,
                     read_measurements_csv)
from .kde import (DensityEstimate, cv_bandwidth, pdf_at, pdf_derivative_at,
                  silverman_bandwidth)
from .spatial import (GridMap, KnnModel, ShuffleReport, covariate_correlation,
                      knn_predict, make_grid_map, select_k, shuffle_test)
from .stl import Decomposition, StlParams, loess_smooth, remainder_of, stl_decompose
from .synthetic import (SyntheticSpec, generate_known_density_sample,
                        generate_network)

__version__ = "1.0.0"

__all__ = [
    "DailySeries", "DensityEstimate", "Decomposition", "DistParams",
    "FSMetrics", "FitReport", "GridMap", "KnnModel", "QuadratureSpec",
    "RawSeries", "ShuffleReport", "StationMeta", "StationSet", "StlParams",
    "SyntheticSpec",
    "aggregate_daily", "covariate_correlation", "cv_bandwidth",
    "empirical_density", "entropy_power", "fill_short_gaps",
    "fisher_information", "fit_mle", "fs_metrics", "fs_plane",
    "generate_known_density_sample", "generate_network", "kl_divergence",
    "knn_predict", "loess_smooth", "logpdf", "make_grid_map",
    "parse_station_table", "pdf", "pdf_at", "pdf_derivative_at",
    "rank_families", "read_measurements_csv", "remainder_of", "select_k",
    "shannon_entropy", "shuffle_test", "silverman_bandwidth",
    "stl_decompose",
]
