"""Exploration metrics of a dataset of states inside a :class:`StateSpace`.

``x_urel`` is the negative symmetric KL divergence between the uniform prior
over the box and the data distribution (0 is perfectly uniform coverage,
more negative is less exploration). ``x_bin``, ``x_bbm`` and ``x_nn`` are
the occupied-bin ratio, bounding-box mean and covariance-trace baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import (
    DEFAULT_K_KNN,
    DEFAULT_K_NNR,
    DEFAULT_RATIO_FLOOR,
    KnnDensityModel,
    NnrConfig,
    kl_knn,
    kl_knn_from_data,
    kl_nnr_pair,
    symmetric_kl,
)
from .exceptions import InputError
from .statespace import StateSpace, as_points

METRIC_IDS = ("xurel_knn", "xurel_nnr", "xbin", "xbbm", "xnn")


@dataclass(frozen=True)
class MetricResult:
    metric_id: str
    value: float
    params: dict = field(default_factory=dict)
    dataset_size: int = 0


def _points_in(data, space: StateSpace) -> np.ndarray:
    pts = as_points(data, space.dim)
    if pts.shape[0] == 0:
        raise InputError("dataset is empty")
    return pts


def _zero_log_density(pts: np.ndarray) -> np.ndarray:
    # uniform on the unit cube
    inside = np.all((pts >= 0.0) & (pts <= 1.0), axis=1)
    return np.where(inside, 0.0, -np.inf)


def x_urel(
    data,
    space: StateSpace,
    estimator: str = "knn",
    k: int | None = None,
    rng: np.random.Generator | None = None,
    prior_samples=None,
    ratio_floor: float = DEFAULT_RATIO_FLOOR,
    knn_model: KnnDensityModel | None = None,
) -> MetricResult:
    """Uniform relative entropy ``-D(U||Q_D) - D(Q_D||U)``.

    Both data and prior samples are mapped onto the unit cube first; KL is
    invariant to that map and it makes Euclidean neighborhoods commensurate
    across axes. The prior side uses ``len(data)`` uniform draws from
    ``rng`` unless ``prior_samples`` (in the unit cube) are given.
    ``knn_model`` may carry a prebuilt model of the normalized data.
    """
    pts = _points_in(data, space)
    if not np.all(space.contains(pts)):
        raise InputError("x_urel needs every data point inside the state space; clip first")
    n = pts.shape[0]
    unit = space.normalize(pts)
    if prior_samples is None:
        if rng is None:
            raise InputError("x_urel needs either rng or prior_samples")
        prior = rng.random((n, space.dim))
    else:
        prior = as_points(prior_samples, space.dim)

    if estimator == "knn":
        k = DEFAULT_K_KNN if k is None else k
        if n < k + 1:
            raise InputError(f"x_urel(knn) needs n >= k+1 = {k + 1}, got {n}")
        model = knn_model if knn_model is not None else KnnDensityModel(unit, k)
        forward = kl_knn(prior, _zero_log_density, unit, model=model)
        backward = kl_knn_from_data(unit, _zero_log_density, model=model)
    elif estimator == "nnr":
        k = DEFAULT_K_NNR if k is None else k
        config = NnrConfig(k, ratio_floor)
        forward, backward = kl_nnr_pair(prior, unit, config)
    else:
        raise InputError(f"unknown estimator {estimator!r}; use 'knn' or 'nnr'")

    total = symmetric_kl(forward, backward)
    params = {
        "k": k,
        "m": prior.shape[0],
        "forward": forward.value,
        "backward": backward.value,
        "excluded_fraction": total.excluded_fraction,
        "clamped_fraction": total.clamped_fraction,
        "unreliable": forward.unreliable or backward.unreliable,
    }
    if estimator == "nnr":
        params["ratio_floor"] = ratio_floor
    return MetricResult(f"xurel_{estimator}", -total.value, params, n)


def bin_divisions(n: int, d: int) -> int:
    """Bins per dimension so that a uniform sample fills each with ~5 points."""
    root = (n / 5.0) ** (1.0 / d)
    nearest = round(root)
    # exact integer roots such as 1000 ** (1/3) come out a few ulps off
    if nearest >= 1 and abs(root - nearest) < 1e-9 * root:
        return nearest
    return max(1, math.ceil(root))


def x_bin(data, space: StateSpace) -> MetricResult:
    """Fraction of occupied grid cells, relative to ``min(N, total cells)``."""
    pts = space.clip(_points_in(data, space))
    n, d = pts.shape
    div = bin_divisions(n, d)
    cells = np.floor(space.normalize(pts) * div).astype(np.int64)
    np.clip(cells, 0, div - 1, out=cells)
    occupied = np.unique(cells, axis=0).shape[0]
    denom = min(n, div**d)
    return MetricResult(
        "xbin", occupied / denom,
        {"divisions": div, "occupied": occupied, "denominator": denom}, n,
    )


def x_bbm(data, space: StateSpace) -> MetricResult:
    """Mean per-dimension bounding-box extent as a fraction of the side length."""
    pts = _points_in(data, space)
    extent = (pts.max(axis=0) - pts.min(axis=0)) / space.sides
    return MetricResult("xbbm", float(extent.mean()), {}, pts.shape[0])


def x_nn(data, space: StateSpace) -> MetricResult:
    """Trace of the sample covariance (n-1 denominator) in unit-cube coordinates."""
    pts = _points_in(data, space)
    if pts.shape[0] < 2:
        raise InputError("x_nn needs at least two points")
    # column-wise sort makes the sum order, and thus the value, permutation invariant
    unit = np.sort(space.normalize(pts), axis=0)
    # shift by a data value so constant columns give exactly zero
    unit = unit - unit[unit.shape[0] // 2]
    trace = float(np.var(unit, axis=0, ddof=1).sum())
    return MetricResult("xnn", trace, {"normalized": True}, pts.shape[0])
