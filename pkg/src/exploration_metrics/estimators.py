"""Sample-based KL-divergence estimators.

Two families are implemented:

* ``knn``: plug a k-nearest-neighbor density estimate into the Monte Carlo
  form ``D(P||Q) ~ mean_{s~P} [log p(s) - log q(s)]``.
* ``nnr``: estimate the density ratio directly from how many of a point's
  neighbors in the merged sample come from each distribution.

All per-sample terms are sorted before averaging, so results do not depend
on sample order and are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .exceptions import InputError
from .neighbors import NeighborIndex, merged_neighbors
from .statespace import as_points

DEFAULT_K_KNN = 5
DEFAULT_K_NNR = 100
DEFAULT_RATIO_FLOOR = 1e-6
UNRELIABLE_FRACTION = 0.1


def log_unit_ball_volume(d: int) -> float:
    if d < 1:
        raise InputError("dimension must be >= 1")
    return 0.5 * d * math.log(math.pi) - float(gammaln(0.5 * d + 1.0))


def unit_ball_volume(d: int) -> float:
    """Volume of the Euclidean unit ball in ``d`` dimensions."""
    return math.exp(log_unit_ball_volume(d))


def _stable_mean(terms: np.ndarray) -> float:
    return float(np.sort(terms).mean()) if terms.size else float("nan")


@dataclass
class KnnDensityModel:
    """k-NN density estimate ``q(x) = k / (n V_d R_k(x)^d)`` of a dataset."""

    data: np.ndarray
    k: int = DEFAULT_K_KNN
    index: NeighborIndex | None = None
    log_unit_ball: float = field(init=False)

    def __post_init__(self):
        self.data = as_points(self.data)
        if self.k < 1:
            raise InputError("k must be >= 1")
        if self.index is None:
            self.index = NeighborIndex(self.data)
        self.log_unit_ball = log_unit_ball_volume(self.dim)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @property
    def unit_ball_volume(self) -> float:
        return math.exp(self.log_unit_ball)

    def log_density(self, queries, in_data=None) -> np.ndarray:
        """Log-density at each query; ``+inf`` where ``R_k`` is zero.

        ``in_data`` gives, per query, the index of the data point the query
        is (excluded from its own neighborhood), or -1.
        """
        r = self.index.kth_distance(queries, self.k, in_data)
        base = math.log(self.k) - math.log(self.n) - self.log_unit_ball
        with np.errstate(divide="ignore"):
            return base - self.dim * np.log(r)

    def log_density_of_data(self) -> np.ndarray:
        """Leave-one-out log-density at every data point."""
        return self.log_density(self.data, np.arange(self.n))


def knn_log_density(model: KnnDensityModel, query, query_in_data: bool = False) -> float:
    """Log-density at a single point; with ``query_in_data`` the query must be a data point."""
    q = as_points(query, model.dim)
    exclude = None
    if query_in_data:
        hits = np.flatnonzero(np.all(model.data == q[0], axis=1))
        if hits.size == 0:
            raise InputError("query_in_data set but the query is not a data point")
        exclude = hits[:1]
    return float(model.log_density(q, exclude)[0])


@dataclass(frozen=True)
class NnrConfig:
    k: int = DEFAULT_K_NNR
    ratio_floor: float = DEFAULT_RATIO_FLOOR

    def __post_init__(self):
        if self.k < 1:
            raise InputError("k must be >= 1")
        if not 0.0 < self.ratio_floor <= 1.0:
            raise InputError("ratio_floor must lie in (0, 1]")

    @property
    def ratio_ceiling(self) -> float:
        return 1.0 / self.ratio_floor


@dataclass(frozen=True)
class DivergenceEstimate:
    """A KL divergence in nats with the bookkeeping of how it was obtained.

    ``excluded_fraction`` is the share of kNN terms dropped as non-finite;
    ``clamped_fraction`` the share of NNR ratios pushed into the clamp range.
    """

    value: float
    estimator: str
    direction: str
    k: int
    n_p: int
    n_q: int
    excluded_fraction: float = 0.0
    clamped_fraction: float = 0.0

    @property
    def unreliable(self) -> bool:
        return self.excluded_fraction > UNRELIABLE_FRACTION

    def meta(self) -> dict:
        return {
            "k": self.k,
            "n_p": self.n_p,
            "n_q": self.n_q,
            "excluded_fraction": self.excluded_fraction,
            "clamped_fraction": self.clamped_fraction,
            "unreliable": self.unreliable,
        }


def _finite_mean(terms: np.ndarray):
    finite = np.isfinite(terms)
    excluded = 1.0 - finite.mean() if terms.size else 0.0
    return _stable_mean(terms[finite]), float(excluded)


def kl_knn(
    p_samples,
    p_log_density: Callable[[np.ndarray], np.ndarray],
    data,
    k: int = DEFAULT_K_KNN,
    model: KnnDensityModel | None = None,
) -> DivergenceEstimate:
    """Estimate ``D(P || Q)`` where Q is known only through ``data``.

    ``p_samples`` are draws from P, which must be independent of ``data``;
    ``p_log_density`` evaluates log p on an ``(m, d)`` array.
    """
    if model is None:
        model = KnnDensityModel(as_points(data), k)
    samples = as_points(p_samples, model.dim)
    if model.n < model.k:
        raise InputError(f"need at least k={model.k} data points, got {model.n}")
    log_p = np.asarray(p_log_density(samples), dtype=float).reshape(-1)
    log_q = model.log_density(samples)
    value, excluded = _finite_mean(log_p - log_q)
    return DivergenceEstimate(value, "knn", "p_to_q", model.k, samples.shape[0], model.n, excluded)


def kl_knn_from_data(
    data,
    q_log_density: Callable[[np.ndarray], np.ndarray],
    k: int = DEFAULT_K_KNN,
    model: KnnDensityModel | None = None,
) -> DivergenceEstimate:
    """Estimate ``D(Q_data || Q)`` for a reference Q with known log-density.

    The data points act as the Monte Carlo samples and their own density is
    the leave-one-out kNN estimate.
    """
    if model is None:
        model = KnnDensityModel(as_points(data), k)
    if model.n < model.k + 1:
        raise InputError(f"need at least k+1={model.k + 1} data points, got {model.n}")
    log_p = model.log_density_of_data()
    log_q = np.asarray(q_log_density(model.data), dtype=float).reshape(-1)
    value, excluded = _finite_mean(log_p - log_q)
    return DivergenceEstimate(value, "knn", "q_to_p", model.k, model.n, model.n, excluded)


def _nnr_value(from_x: np.ndarray, k: int, n_x: int, n_y: int, config: NnrConfig):
    from_y = k - from_x
    eta = n_y / n_x
    ratio = eta * from_x / (from_y + 1.0)
    clamped = (ratio < config.ratio_floor) | (ratio > config.ratio_ceiling)
    terms = -np.log(np.clip(ratio, config.ratio_floor, config.ratio_ceiling))
    return max(_stable_mean(terms), 0.0), float(clamped.mean())


def kl_nnr(p_samples, q_samples, config: NnrConfig | None = None, index=None) -> DivergenceEstimate:
    """Nearest-neighbor-ratio estimate of ``D(P || Q)``.

    For every P-sample ``Y_i`` the ratio q/p is estimated as
    ``eta * N_i / (M_i + 1)`` from the X- and Y-counts among its k nearest
    neighbors in the merged sample (``eta = M / N``). Ratios are clamped
    to ``[ratio_floor, 1 / ratio_floor]`` and the average of ``-log ratio``
    is floored at zero.

    ``index`` may be a prebuilt index over ``vstack([q_samples, p_samples])``.
    """
    config = config or NnrConfig()
    x = as_points(q_samples)
    y = as_points(p_samples, x.shape[1])
    from_x = (merged_neighbors(x, y, config.k, index) < x.shape[0]).sum(axis=1)
    value, clamped = _nnr_value(from_x, config.k, x.shape[0], y.shape[0], config)
    return DivergenceEstimate(value, "nnr", "p_to_q", config.k, y.shape[0], x.shape[0],
                              clamped_fraction=clamped)


def kl_nnr_pair(a, b, config: NnrConfig | None = None):
    """``(D(A||B), D(B||A))`` by NNR from a single neighbor search over ``B ∪ A``.

    Equivalent to two :func:`kl_nnr` calls except that exact distance ties
    are broken by the one merged ordering (B first).
    """
    config = config or NnrConfig()
    b = as_points(b)
    a = as_points(a, b.shape[1])
    n_b, n_a = b.shape[0], a.shape[0]
    z = np.vstack([b, a])
    if z.shape[0] - 1 < config.k:
        raise InputError(f"k={config.k} exceeds |A| + |B| - 1 = {z.shape[0] - 1}")
    nbrs = NeighborIndex(z).query(z, config.k, exclude=np.arange(z.shape[0]))[1]
    from_b = (nbrs < n_b).sum(axis=1)
    v_ab, c_ab = _nnr_value(from_b[n_b:], config.k, n_b, n_a, config)
    v_ba, c_ba = _nnr_value(config.k - from_b[:n_b], config.k, n_a, n_b, config)
    return (
        DivergenceEstimate(v_ab, "nnr", "p_to_q", config.k, n_a, n_b, clamped_fraction=c_ab),
        DivergenceEstimate(v_ba, "nnr", "q_to_p", config.k, n_b, n_a, clamped_fraction=c_ba),
    )


def symmetric_kl(forward: DivergenceEstimate, backward: DivergenceEstimate) -> DivergenceEstimate:
    if forward.estimator != backward.estimator:
        raise InputError(
            f"cannot combine {forward.estimator} and {backward.estimator} estimates"
        )
    return DivergenceEstimate(
        forward.value + backward.value,
        forward.estimator,
        "symmetric",
        forward.k,
        forward.n_p,
        forward.n_q,
        max(forward.excluded_fraction, backward.excluded_fraction),
        0.5 * (forward.clamped_fraction + backward.clamped_fraction),
    )
