"""Functions on [0, 1] sampled on a uniform grid.

Two interpolation rules are supported. ``linear`` is piecewise linear.
``cubic-monotone`` is a piecewise cubic Hermite interpolant whose node slopes
come from fourth-order finite differences, clipped by Hyman's limiter so that
on every cell the interpolant is monotone between its two node values (the
node slopes stay within three times the adjacent secants, and are zeroed at
local extrema of the data).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from gausskuzmin.errors import DomainError


class Interpolation(str, Enum):
    LINEAR = "linear"
    CUBIC_MONOTONE = "cubic-monotone"


def nodes(n: int) -> np.ndarray:
    """x_j = j/(n - 1), j = 0..n-1."""
    if n < 2:
        raise DomainError("grid needs at least 2 nodes")
    return np.arange(n, dtype=float) / (n - 1)


def _raw_slopes(y: np.ndarray, h: float) -> np.ndarray:
    n = y.size
    if n < 5:
        return np.gradient(y, h, edge_order=1 if n == 2 else 2)
    d = np.empty(n)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h)
    d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h)
    d[-1] = (25.0 * y[-1] - 48.0 * y[-2] + 36.0 * y[-3] - 16.0 * y[-4] + 3.0 * y[-5]) / (12.0 * h)
    d[-2] = (3.0 * y[-1] + 10.0 * y[-2] - 18.0 * y[-3] + 6.0 * y[-4] - y[-5]) / (12.0 * h)
    return d


def monotone_slopes(y: np.ndarray) -> np.ndarray:
    """Node slopes for the cubic-monotone rule on a uniform grid over [0, 1]."""
    y = np.asarray(y, dtype=float)
    n = y.size
    h = 1.0 / (n - 1)
    secant = np.diff(y) / h
    d = _raw_slopes(y, h)

    # Hyman filter. Each node is limited by the secants on both sides; the
    # endpoints only have one.
    left = np.concatenate(([secant[0]], secant))
    right = np.concatenate((secant, [secant[-1]]))
    sign = np.sign(right)
    same_sign = left * right > 0
    cap = 3.0 * np.minimum(np.abs(left), np.abs(right))
    limited = sign * np.minimum(np.maximum(sign * d, 0.0), cap)
    return np.where(same_sign, limited, 0.0)


def hermite_weights(t: np.ndarray):
    """Cubic Hermite basis (h00, h01, h10, h11) at local coordinate t in [0, 1]."""
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h01 = 3.0 * t2 - 2.0 * t3
    h10 = t3 - 2.0 * t2 + t
    h11 = t3 - t2
    return h00, h01, h10, h11


def locate(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cell index k in [0, n-2] and local coordinate t in [0, 1] for points x in [0, 1].

    Points within a few ulps of a node are snapped onto it, so evaluation at a
    node reproduces the stored value exactly.
    """
    u = np.asarray(x, dtype=float) * (n - 1)
    r = np.rint(u)
    snap = np.abs(u - r) <= 4.0 * np.finfo(float).eps * np.maximum(u, 1.0)
    u = np.where(snap, r, u)
    k = np.minimum(np.floor(u), n - 2).astype(np.int64)
    k = np.maximum(k, 0)
    t = u - k
    return k, t


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function at ``nodes(len(values))`` plus an interpolation rule."""

    values: np.ndarray
    interpolation: Interpolation = Interpolation.CUBIC_MONOTONE
    _slopes: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise DomainError("GridFunction needs a 1-d array of at least 2 values")
        if not np.all(np.isfinite(v)):
            raise DomainError("GridFunction values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "interpolation", Interpolation(self.interpolation))

    @classmethod
    def from_callable(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        grid_size: int,
        interpolation: Interpolation | str = Interpolation.CUBIC_MONOTONE,
    ) -> "GridFunction":
        x = nodes(grid_size)
        return cls(np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape), interpolation)

    @classmethod
    def constant(cls, c: float, grid_size: int, interpolation=Interpolation.CUBIC_MONOTONE):
        return cls(np.full(grid_size, float(c)), interpolation)

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def nodes(self) -> np.ndarray:
        return nodes(self.grid_size)

    @property
    def spacing(self) -> float:
        return 1.0 / (self.grid_size - 1)

    @property
    def slopes(self) -> np.ndarray:
        """Node slopes used by the interpolant (secant-based for ``linear``)."""
        if self._slopes is None:
            if self.interpolation is Interpolation.LINEAR:
                s = np.zeros(self.grid_size)
            else:
                s = monotone_slopes(self.values)
            s.setflags(write=False)
            object.__setattr__(self, "_slopes", s)
        return self._slopes

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(values, self.interpolation)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(~((arr >= 0.0) & (arr <= 1.0))):
            raise DomainError("GridFunction is only defined on [0, 1]; no extrapolation")
        k, t = locate(arr, self.grid_size)
        v = self.values
        if self.interpolation is Interpolation.LINEAR:
            out = (1.0 - t) * v[k] + t * v[k + 1]
        else:
            d = self.slopes
            h00, h01, h10, h11 = hermite_weights(t)
            out = h00 * v[k] + h01 * v[k + 1] + self.spacing * (h10 * d[k] + h11 * d[k + 1])
        return float(out) if out.ndim == 0 else out

    def sup_distance(self, other) -> float:
        """Max node-wise |self - other|; ``other`` may be a GridFunction, array or callable."""
        if isinstance(other, GridFunction):
            ov = other.values
        elif callable(other):
            ov = np.asarray(other(self.nodes), dtype=float)
        else:
            ov = np.asarray(other, dtype=float)
        return float(np.max(np.abs(self.values - ov)))
