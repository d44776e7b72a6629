"""Scale sweeps over the synthetic families, batch metric evaluation, I/O."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import distributions
from .distributions import DEFAULT_MODE_OFFSET, DEFAULT_SIGMA, FAMILIES, DistributionSpec
from .estimators import DEFAULT_K_KNN, DEFAULT_K_NNR, DEFAULT_RATIO_FLOOR, KnnDensityModel
from .exceptions import InputError
from .metrics import METRIC_IDS, MetricResult, x_bbm, x_bin, x_nn, x_urel
from .statespace import StateSpace

CSV_COLUMNS = ("family", "scale", "metric", "rep", "value", "mean", "min", "max")


def default_scale_grid(family: str) -> list[float]:
    if family == "growing_uniform":
        grid = np.linspace(0.01, 1.5, 15)
    elif family in ("truncated_normal", "bimodal_scale"):
        grid = np.logspace(-2, 1, 15)
    elif family == "bimodal_location":
        grid = np.linspace(0.01, 0.95, 15)
    else:
        raise InputError(f"unknown family {family!r}")
    return [float(s) for s in grid]


@dataclass(frozen=True)
class ExperimentSpec:
    family: str
    scale_grid: tuple = ()
    dim: int = 25
    n: int = 2000
    reps: int = 10
    metrics: tuple = METRIC_IDS
    base_seed: int = 0
    k_knn: int = DEFAULT_K_KNN
    k_nnr: int = DEFAULT_K_NNR
    ratio_floor: float = DEFAULT_RATIO_FLOOR
    mode_offset: float = DEFAULT_MODE_OFFSET
    sigma: float = DEFAULT_SIGMA
    space: StateSpace | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        grid = tuple(float(s) for s in (self.scale_grid or default_scale_grid(self.family)))
        object.__setattr__(self, "scale_grid", grid)
        object.__setattr__(self, "metrics", tuple(self.metrics))
        if self.reps < 1:
            raise InputError("reps must be >= 1")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InputError("scale_grid must be strictly increasing")
        unknown = set(self.metrics) - set(METRIC_IDS)
        if unknown:
            raise InputError(f"unknown metrics {sorted(unknown)}; choose from {METRIC_IDS}")
        if "xurel_knn" in self.metrics and self.n < self.k_knn + 1:
            raise InputError(f"n={self.n} too small for k={self.k_knn}")
        if "xurel_nnr" in self.metrics and 2 * self.n - 1 < self.k_nnr:
            raise InputError(f"n={self.n} too small for NNR k={self.k_nnr}")
        if self.space is not None and self.space.dim != self.dim:
            raise InputError("space dimension does not match dim")

    @property
    def state_space(self) -> StateSpace:
        return self.space if self.space is not None else StateSpace.unit(self.dim)

    def distribution(self, scale: float) -> DistributionSpec:
        return DistributionSpec(
            self.family, scale, self.dim, self.space, self.mode_offset, self.sigma
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["scale_grid"] = list(self.scale_grid)
        out["metrics"] = list(self.metrics)
        out["space"] = None if self.space is None else self.space.to_dict()
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> ExperimentSpec:
        obj = dict(obj)
        if obj.get("space") is not None:
            obj["space"] = StateSpace.from_dict(obj["space"])
        try:
            return cls(**obj)
        except TypeError as exc:
            raise InputError(f"bad experiment spec: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> ExperimentSpec:
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from exc


@dataclass
class SweepResult:
    """Metric values indexed ``[scale, metric, rep]``; NaN marks a missing cell."""

    family: str
    scales: np.ndarray
    metrics: tuple
    values: np.ndarray

    @classmethod
    def empty(cls, family: str = "") -> SweepResult:
        return cls(family, np.zeros(0), (), np.zeros((0, 0, 0)))

    @property
    def reps(self) -> int:
        return self.values.shape[2]

    def _reduce(self, fn) -> np.ndarray:
        out = np.full(self.values.shape[:2], np.nan)
        has = ~np.all(np.isnan(self.values), axis=2)
        if has.any():
            out[has] = fn(self.values[has], axis=1)
        return out

    def mean(self) -> np.ndarray:
        return self._reduce(np.nanmean)

    def min(self) -> np.ndarray:
        return self._reduce(np.nanmin)

    def max(self) -> np.ndarray:
        return self._reduce(np.nanmax)

    def series(self, metric: str):
        """``(scales, mean, min, max)`` for one metric."""
        j = self.metrics.index(metric)
        return self.scales, self.mean()[:, j], self.min()[:, j], self.max()[:, j]


def compute_metrics(
    data,
    space: StateSpace,
    metrics=METRIC_IDS,
    seed: int | None = 0,
    rng: np.random.Generator | None = None,
    k_knn: int = DEFAULT_K_KNN,
    k_nnr: int = DEFAULT_K_NNR,
    ratio_floor: float = DEFAULT_RATIO_FLOOR,
) -> list[MetricResult]:
    """Evaluate several metrics on one dataset.

    Both x_urel variants share one set of prior samples (drawn first, so the
    result does not depend on the order of ``metrics``) and the kNN model.
    A failing metric yields a NaN result carrying ``params["error"]``.
    """
    metrics = list(metrics)
    if not metrics:
        return []
    pts = np.asarray(data, dtype=float)
    if rng is None:
        rng = np.random.default_rng(seed)
    n = pts.shape[0] if pts.ndim == 2 else len(pts)
    prior = None
    if any(m.startswith("xurel") for m in metrics):
        prior = rng.random((n, space.dim))
    knn_model = None
    results = []
    for metric in metrics:
        try:
            if metric == "xurel_knn":
                if knn_model is None and n >= k_knn + 1:
                    knn_model = KnnDensityModel(space.normalize(pts), k_knn)
                res = x_urel(pts, space, "knn", k_knn, prior_samples=prior, knn_model=knn_model)
            elif metric == "xurel_nnr":
                res = x_urel(pts, space, "nnr", k_nnr, prior_samples=prior,
                             ratio_floor=ratio_floor)
            elif metric == "xbin":
                res = x_bin(pts, space)
            elif metric == "xbbm":
                res = x_bbm(pts, space)
            elif metric == "xnn":
                res = x_nn(pts, space)
            else:
                raise InputError(f"unknown metric {metric!r}")
        except (InputError, ValueError) as exc:
            res = MetricResult(metric, float("nan"), {"error": str(exc)}, n)
        results.append(res)
    return results


def _run_cell(spec: ExperimentSpec, scale: float, rep: int) -> list[float]:
    rng = np.random.default_rng(spec.base_seed + rep)
    data = distributions.sample(spec.distribution(scale), spec.n, rng)
    results = compute_metrics(
        data, spec.state_space, spec.metrics, rng=rng,
        k_knn=spec.k_knn, k_nnr=spec.k_nnr, ratio_floor=spec.ratio_floor,
    )
    return [r.value for r in results]


def _run_cell_args(args):
    return _run_cell(*args)


def run_sweep(spec: ExperimentSpec, workers: int = 1) -> SweepResult:
    """Evaluate every metric for each scale and repetition.

    Repetition ``r`` uses ``default_rng(base_seed + r)`` at every scale, so
    the same variates drive the whole sweep. With ``workers > 1`` cells run
    in a process pool; results are assembled in cell order either way.
    """
    cells = [(spec, s, r) for s in spec.scale_grid for r in range(spec.reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_run_cell_args, cells, chunksize=1))
    else:
        flat = [_run_cell(*c) for c in cells]
    values = np.array(flat, dtype=float).reshape(
        len(spec.scale_grid), spec.reps, len(spec.metrics)
    ).transpose(0, 2, 1)
    return SweepResult(spec.family, np.array(spec.scale_grid), spec.metrics, values)


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def sweep_rows(result: SweepResult):
    mean, lo, hi = result.mean(), result.min(), result.max()
    for i, scale in enumerate(result.scales):
        for j, metric in enumerate(result.metrics):
            for r in range(result.reps):
                yield [result.family, repr(float(scale)), metric, str(r),
                       _fmt(result.values[i, j, r]), "", "", ""]
            yield [result.family, repr(float(scale)), metric, "agg", "",
                   _fmt(mean[i, j]), _fmt(lo[i, j]), _fmt(hi[i, j])]


def write_csv(results, path) -> None:
    """Write one or several sweep results to a CSV file."""
    if isinstance(results, SweepResult):
        results = [results]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for result in results:
        writer.writerows(sweep_rows(result))
    try:
        Path(path).write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> list[SweepResult]:
    """Parse a sweep CSV back into one :class:`SweepResult` per family (raw rows only)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise InputError(f"{path}: unexpected header {header}")
        cells: dict[str, dict] = {}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_COLUMNS):
                raise InputError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields")
            family, scale, metric, rep, value = row[:5]
            if rep == "agg":
                continue
            try:
                key = (float(scale), metric, int(rep))
                val = float(value) if value else float("nan")
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
            cells.setdefault(family, {})[key] = val
    out = []
    for family, fam_cells in cells.items():
        scales = list(dict.fromkeys(k[0] for k in fam_cells))
        metrics = tuple(dict.fromkeys(k[1] for k in fam_cells))
        reps = max(k[2] for k in fam_cells) + 1
        values = np.full((len(scales), len(metrics), reps), np.nan)
        for (s, m, r), v in fam_cells.items():
            values[scales.index(s), metrics.index(m), r] = v
        out.append(SweepResult(family, np.array(scales), metrics, values))
    return out


@dataclass
class IngestResult:
    points: np.ndarray
    n_read: int
    n_rejected: int = 0
    n_clipped: int = 0


def _float_row(fields, where: str) -> list[float]:
    try:
        return [float(f) for f in fields]
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: not a numeric state ({exc})") from exc


def _read_csv_states(path, dim: int) -> list[list[float]]:
    rows = []
    with open(path, newline="") as fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            if lineno == 1 and not rows and all(_is_name(f) for f in fields):
                continue  # header
            row = _float_row(fields, f"{path}:{lineno}")
            if len(row) != dim:
                raise InputError(f"{path}:{lineno}: state has dimension {len(row)}, expected {dim}")
            rows.append(row)
    return rows


def _is_name(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return True
    return False


def _read_jsonl_states(path, dim: int) -> list[list[float]]:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
                states = [obj["s"], obj["s_next"]]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InputError(f"{where}: bad transition ({exc!r})") from exc
            for state in states:
                row = _float_row(state, where)
                if len(row) != dim:
                    raise InputError(f"{where}: state has dimension {len(row)}, expected {dim}")
                rows.append(row)
    return rows


def ingest_dataset(path, format: str, space: StateSpace, clip_policy: str = "reject") -> IngestResult:
    """Load states from a CSV of rows or a JSONL file of ``{"s", "s_next"}`` transitions.

    Out-of-box states are dropped (``reject``) or projected onto the box
    (``clip``); the counts are reported on the result.
    """
    if clip_policy not in ("reject", "clip"):
        raise InputError(f"clip_policy must be 'reject' or 'clip', not {clip_policy!r}")
    if format == "csv":
        rows = _read_csv_states(path, space.dim)
    elif format in ("jsonl", "jsonl_transitions"):
        rows = _read_jsonl_states(path, space.dim)
    else:
        raise InputError(f"unknown format {format!r}; use 'csv' or 'jsonl_transitions'")
    pts = np.array(rows, dtype=float).reshape(-1, space.dim)
    if not np.all(np.isfinite(pts)):
        raise InputError(f"{path}: non-finite state values")
    inside = space.contains(pts) if len(pts) else np.zeros(0, dtype=bool)
    n_out = int((~inside).sum())
    if clip_policy == "reject":
        return IngestResult(pts[inside], len(pts), n_rejected=n_out)
    return IngestResult(space.clip(pts), len(pts), n_clipped=n_out)
