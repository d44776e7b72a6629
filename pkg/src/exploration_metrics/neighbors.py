"""Exact Euclidean k-nearest-neighbor search.

Two interchangeable indexes are provided: :class:`NeighborIndex` partitions
space with a kd-tree, :class:`BruteForceIndex` scans every point and serves
as the reference. Both return neighbors ordered by ``(distance, index)`` so
ties resolve to the lower point index, and both report distances computed
by the same expression, so their outputs agree bit for bit.

Self-exclusion is by index, never by coordinate equality: duplicated points
remain neighbors of each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import InputError
from .statespace import as_points

# relative slack for the kd-tree's own distance rounding
_REL_SLACK = 1e-9
_CHUNK_ELEMENTS = 2**22


def _distances(diff: np.ndarray) -> np.ndarray:
    return np.sqrt((diff * diff).sum(axis=-1))


def _exclude_array(exclude, m: int) -> np.ndarray | None:
    if exclude is None:
        return None
    exc = np.asarray(exclude, dtype=np.intp).reshape(-1)
    if exc.shape[0] != m:
        raise InputError(f"exclude has {exc.shape[0]} entries for {m} queries")
    return exc


def _sort_rows(dist: np.ndarray, idx: np.ndarray):
    order = np.lexsort((idx, dist), axis=-1)
    return np.take_along_axis(dist, order, -1), np.take_along_axis(idx, order, -1)


class _BaseIndex:
    points: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def _check(self, queries, k: int, exclude):
        q = as_points(queries, self.dim)
        exc = _exclude_array(exclude, q.shape[0])
        if k < 1:
            raise InputError("k must be >= 1")
        available = len(self) - (1 if exc is not None else 0)
        if k > available:
            raise InputError(f"k={k} exceeds the {available} available neighbors")
        return q, exc

    def query(self, queries, k: int, exclude=None):
        """Return ``(distances, indices)``, each of shape ``(m, k)``.

        ``exclude`` optionally gives, per query, one point index to leave out
        (use -1 for none).
        """
        raise NotImplementedError

    def kth_distance(self, queries, k: int, exclude=None) -> np.ndarray:
        return self.query(queries, k, exclude)[0][:, k - 1]


class BruteForceIndex(_BaseIndex):
    """O(n) scan per query. Reference implementation."""

    def __init__(self, points):
        self.points = _validated(points)

    def query(self, queries, k: int, exclude=None):
        q, exc = self._check(queries, k, exclude)
        n = len(self)
        step = max(1, _CHUNK_ELEMENTS // max(1, n * self.dim))
        dists = np.empty((q.shape[0], k))
        idxs = np.empty((q.shape[0], k), dtype=np.intp)
        all_idx = np.arange(n)
        for start in range(0, q.shape[0], step):
            stop = min(start + step, q.shape[0])
            d = _distances(self.points[None, :, :] - q[start:stop, None, :])
            if exc is not None:
                rows = np.flatnonzero(exc[start:stop] >= 0)
                d[rows, exc[start:stop][rows]] = np.inf
            # stable sort on distance keeps ascending index among ties
            order = np.argsort(d, axis=1, kind="stable")[:, :k]
            dists[start:stop] = np.take_along_axis(d, order, 1)
            idxs[start:stop] = all_idx[order]
        return dists, idxs


class NeighborIndex(_BaseIndex):
    """kd-tree index answering exact k-NN queries.

    The tree proposes ``k + 2`` candidates per query; distances are then
    recomputed exactly and ordered by ``(distance, index)``. Rows whose
    k-th distance is tied (up to the tree's rounding) with a point outside
    the candidate set fall back to a ball query so tie-breaking stays
    identical to the brute-force scan.
    """

    def __init__(self, points):
        self.points = _validated(points)
        self._tree = cKDTree(self.points)

    def query(self, queries, k: int, exclude=None):
        q, exc = self._check(queries, k, exclude)
        n, m = len(self), q.shape[0]
        kk = min(n, k + 2)
        step = max(1, _CHUNK_ELEMENTS // max(1, kk * self.dim))
        dists = np.empty((m, k))
        idxs = np.empty((m, k), dtype=np.intp)
        for start in range(0, m, step):
            stop = min(start + step, m)
            qs = q[start:stop]
            _, cand = self._tree.query(qs, k=kk)
            cand = np.asarray(cand, dtype=np.intp).reshape(stop - start, kk)
            d = _distances(self.points[cand] - qs[:, None, :])
            if exc is not None:
                d[cand == exc[start:stop, None]] = np.inf
            d, cand = _sort_rows(d, cand)
            boundary = d[:, k - 1]
            n_valid = np.isfinite(d).sum(axis=1)
            last = d[np.arange(stop - start), n_valid - 1]
            safe = (kk == n) | (last > boundary * (1.0 + _REL_SLACK))
            dists[start:stop] = d[:, :k]
            idxs[start:stop] = cand[:, :k]
            for row in np.flatnonzero(~safe):
                r = start + row
                self_idx = exc[r] if exc is not None else -1
                dists[r], idxs[r] = self._ball_resolve(q[r], k, boundary[row], self_idx)
        return dists, idxs

    def _ball_resolve(self, query, k, radius, self_idx):
        cand = np.asarray(
            self._tree.query_ball_point(query, r=radius * (1.0 + _REL_SLACK)), dtype=np.intp
        )
        cand = cand[cand != self_idx]
        d = _distances(self.points[cand] - query)
        d, cand = _sort_rows(d[None], cand[None])
        return d[0, :k], cand[0, :k]


def _validated(points) -> np.ndarray:
    try:
        arr = np.asarray(points, dtype=float)
    except ValueError as exc:
        raise InputError(f"ragged or non-numeric points: {exc}") from exc
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InputError(f"need a non-empty (n, d) array of points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("points must be finite")
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def build_index(points, brute_force: bool = False) -> NeighborIndex | BruteForceIndex:
    return BruteForceIndex(points) if brute_force else NeighborIndex(points)


def _self_index(index: _BaseIndex, query: np.ndarray) -> int:
    hits = np.flatnonzero(np.all(index.points == query, axis=1))
    if hits.size == 0:
        raise InputError("exclude_self requires the query to be one of the indexed points")
    return int(hits[0])


def kth_distance(index: _BaseIndex, query, k: int, exclude_self: bool = False) -> float:
    """Distance from ``query`` to its k-th nearest indexed point.

    ``query`` is either a coordinate vector or an integer point index. With
    ``exclude_self`` a coordinate query is identified with the lowest-index
    indexed point at exactly those coordinates; duplicates of it still count.
    """
    if isinstance(query, (int, np.integer)):
        qi = int(query)
        q = index.points[qi]
    else:
        q = as_points(query, index.dim)[0]
        qi = _self_index(index, q) if exclude_self else -1
    exclude = [qi] if exclude_self else None
    return float(index.kth_distance(q[None, :], k, exclude)[0])


@dataclass(frozen=True)
class LabeledNeighborhood:
    """Composition of a query's k-neighborhood in the merged set X ∪ Y."""

    counts_from_x: int
    counts_from_y: int
    k: int


def merged_neighbors(x_set, y_set, k: int, index: _BaseIndex | None = None):
    """Neighbor indices (into ``Z = X ∪ Y``, X first) of every Y point, self excluded.

    Returns an ``(M, k)`` index array; entries ``< len(x_set)`` come from X.
    """
    x = as_points(x_set)
    y = as_points(y_set, x.shape[1])
    n_x = x.shape[0]
    if index is None:
        index = NeighborIndex(np.vstack([x, y]))
    elif len(index) != n_x + y.shape[0]:
        raise InputError("supplied index does not cover X ∪ Y")
    if n_x + y.shape[0] - 1 < k:
        raise InputError(f"k={k} exceeds |X| + |Y| - 1 = {n_x + y.shape[0] - 1}")
    self_idx = n_x + np.arange(y.shape[0])
    return index.query(index.points[self_idx], k, exclude=self_idx)[1]


def labeled_counts(x_set, y_set, k: int, index: _BaseIndex | None = None):
    """Arrays ``(N_i, M_i)`` of X- and Y-neighbors for every Y point."""
    n_x = as_points(x_set).shape[0]
    nbrs = merged_neighbors(x_set, y_set, k, index)
    from_x = (nbrs < n_x).sum(axis=1)
    return from_x, k - from_x


def labeled_neighborhood(x_set, y_set, query_index: int, k: int) -> LabeledNeighborhood:
    x = as_points(x_set)
    y = as_points(y_set, x.shape[1])
    if not 0 <= query_index < y.shape[0]:
        raise InputError(f"query_index {query_index} out of range for {y.shape[0]} Y points")
    if x.shape[0] + y.shape[0] - 1 < k:
        raise InputError(f"k={k} exceeds |X| + |Y| - 1 = {x.shape[0] + y.shape[0] - 1}")
    z = np.vstack([x, y])
    self_idx = x.shape[0] + query_index
    nbrs = NeighborIndex(z).query(z[self_idx][None, :], k, exclude=[self_idx])[1][0]
    from_x = int((nbrs < x.shape[0]).sum())
    return LabeledNeighborhood(from_x, k - from_x, k)
