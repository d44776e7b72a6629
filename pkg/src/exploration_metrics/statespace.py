"""Bounded box state spaces and the uniform prior over them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import InputError


def as_points(points, dim: int | None = None) -> np.ndarray:
    """Coerce ``points`` to a float array of shape ``(n, d)``.

    A 1-D input is read as a single point when ``dim`` matches its length,
    otherwise as ``n`` one-dimensional points.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        if dim is not None and dim != 1 and arr.shape[0] == dim:
            arr = arr.reshape(1, -1)
        else:
            arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise InputError(f"expected a 2-D array of points, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise InputError(f"points have dimension {arr.shape[1]}, expected {dim}")
    return arr


@dataclass(frozen=True)
class StateSpace:
    """Axis-aligned hyperbox ``[lower, upper]`` in R^d."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).reshape(-1)
        upper = np.array(self.upper, dtype=float).reshape(-1)
        if lower.size == 0 or lower.shape != upper.shape:
            raise InputError(
                f"lower and upper must be non-empty and of equal length "
                f"(got {lower.size} and {upper.size})"
            )
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise InputError("state-space bounds must be finite")
        if np.any(lower >= upper):
            bad = np.flatnonzero(lower >= upper).tolist()
            raise InputError(f"lower < upper violated in dimensions {bad}")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unit(cls, dim: int) -> StateSpace:
        if dim < 1:
            raise InputError("dimension must be >= 1")
        return cls(np.zeros(dim), np.ones(dim))

    @classmethod
    def from_dict(cls, obj: dict) -> StateSpace:
        try:
            return cls(obj["lower"], obj["upper"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"state-space descriptor needs 'lower' and 'upper': {exc}") from exc

    @classmethod
    def from_json(cls, path) -> StateSpace:
        try:
            obj = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def sides(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def half_sides(self) -> np.ndarray:
        return 0.5 * self.sides

    def volume(self) -> float:
        return float(np.prod(self.sides))

    def contains(self, points) -> np.ndarray:
        """Boolean mask of points inside the box, boundary inclusive."""
        pts = as_points(points, self.dim)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)

    def clip(self, points) -> np.ndarray:
        """Clamp every coordinate into ``[lower, upper]``. Keeps the input's shape."""
        arr = np.asarray(points, dtype=float)
        if self.dim == 1 and arr.ndim <= 1:
            return np.clip(arr, self.lower[0], self.upper[0])
        if arr.ndim == 0 or arr.shape[-1] != self.dim:
            raise InputError(f"points have shape {arr.shape}, expected trailing dimension {self.dim}")
        return np.clip(arr, self.lower, self.upper)

    def normalize(self, points) -> np.ndarray:
        """Affine map of the box onto the unit cube."""
        return (as_points(points, self.dim) - self.lower) / self.sides

    def sample_uniform(self, m: int, rng: np.random.Generator) -> np.ndarray:
        if m < 1:
            raise InputError("need at least one sample")
        return self.lower + rng.random((m, self.dim)) * self.sides

    def uniform_log_density(self, points) -> np.ndarray | float:
        """Log-density of the uniform prior; ``-inf`` outside the box.

        Returns a scalar for a single point, an array for ``(n, d)`` input.
        """
        single = np.ndim(points) <= 1 and (self.dim > 1 or np.ndim(points) == 0)
        pts = as_points(points, self.dim)
        out = np.where(self.contains(pts), -np.log(self.sides).sum(), -np.inf)
        return float(out[0]) if single else out


@dataclass(frozen=True)
class UniformPrior:
    """Maximum-entropy distribution on a :class:`StateSpace`."""

    space: StateSpace
    log_density: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "log_density", float(-np.log(self.space.sides).sum()))

    def logpdf(self, points) -> np.ndarray | float:
        return self.space.uniform_log_density(points)

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        return self.space.sample_uniform(m, rng)


def volume(space: StateSpace) -> float:
    return space.volume()


def clip(space: StateSpace, point) -> np.ndarray:
    return space.clip(point)


def sample_uniform(space: StateSpace, m: int, rng: np.random.Generator) -> np.ndarray:
    return space.sample_uniform(m, rng)


def uniform_log_density(space: StateSpace, point):
    return space.uniform_log_density(point)
