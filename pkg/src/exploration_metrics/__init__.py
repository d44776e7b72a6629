"""Offline exploration metrics for datasets of states in a bounded box."""

from .distributions import FAMILIES, DistributionSpec, sample
from .estimators import (
    DivergenceEstimate,
    KnnDensityModel,
    NnrConfig,
    kl_knn,
    kl_knn_from_data,
    kl_nnr,
    kl_nnr_pair,
    knn_log_density,
    symmetric_kl,
    unit_ball_volume,
)
from .exceptions import InputError
from .harness import (
    ExperimentSpec,
    SweepResult,
    compute_metrics,
    default_scale_grid,
    ingest_dataset,
    read_csv,
    run_sweep,
    write_csv,
)
from .metrics import METRIC_IDS, MetricResult, x_bbm, x_bin, x_nn, x_urel
from .neighbors import BruteForceIndex, NeighborIndex, build_index, kth_distance, labeled_neighborhood
from .plotting import render_plot
from .statespace import StateSpace, UniformPrior

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "DistributionSpec",
    "sample",
    "DivergenceEstimate",
    "KnnDensityModel",
    "NnrConfig",
    "kl_knn",
    "kl_knn_from_data",
    "kl_nnr",
    "kl_nnr_pair",
    "knn_log_density",
    "symmetric_kl",
    "unit_ball_volume",
    "InputError",
    "ExperimentSpec",
    "SweepResult",
    "compute_metrics",
    "default_scale_grid",
    "ingest_dataset",
    "read_csv",
    "run_sweep",
    "write_csv",
    "METRIC_IDS",
    "MetricResult",
    "x_bbm",
    "x_bin",
    "x_nn",
    "x_urel",
    "BruteForceIndex",
    "NeighborIndex",
    "build_index",
    "kth_distance",
    "labeled_neighborhood",
    "render_plot",
    "StateSpace",
    "UniformPrior",
]
