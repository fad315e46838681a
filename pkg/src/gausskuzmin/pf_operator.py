"""Perron-Frobenius operator of the Gauss map under the Gauss measure.

    (Uf)(x) = sum_{i>=1} P_i(x) f(1/(x+i)),   P_i(x) = (x+1)/((x+i)(x+i+1))

The series is truncated at i = I. Because the interpolant of a grid function
is linear in its node values and node slopes, every truncated series of the
form sum_i w_i(x_j) f(1/(x_j+i)) is a fixed sparse matrix acting on
[values, slopes]. Those matrices are assembled once per configuration and
cached; a single application is then a sparse mat-vec.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
import scipy.sparse as sp

from gausskuzmin.errors import DomainError
from gausskuzmin.grid import GridFunction, Interpolation, hermite_weights, locate, nodes

DEFAULT_GRID = 4097
DEFAULT_TRUNCATION = 10_000

# Max number of (node, i) pairs materialized at once during assembly.
_CHUNK_PAIRS = 1 << 21


class TailMode(str, Enum):
    NONE = "none"
    CONSTANT_CORRECTION = "constant-correction"


@dataclass(frozen=True)
class OperatorConfig:
    truncation_index: int = DEFAULT_TRUNCATION
    tail_mode: TailMode = TailMode.CONSTANT_CORRECTION
    grid_size: int = DEFAULT_GRID
    interpolation: Interpolation = Interpolation.CUBIC_MONOTONE

    def __post_init__(self) -> None:
        if int(self.truncation_index) != self.truncation_index or self.truncation_index < 2:
            raise DomainError(f"truncation_index must be an integer >= 2, got {self.truncation_index}")
        if int(self.grid_size) != self.grid_size or self.grid_size < 2:
            raise DomainError(f"grid_size must be an integer >= 2, got {self.grid_size}")
        object.__setattr__(self, "truncation_index", int(self.truncation_index))
        object.__setattr__(self, "grid_size", int(self.grid_size))
        object.__setattr__(self, "tail_mode", TailMode(self.tail_mode))
        object.__setattr__(self, "interpolation", Interpolation(self.interpolation))

    @property
    def tail_on(self) -> bool:
        return self.tail_mode is TailMode.CONSTANT_CORRECTION

    def grid_function(self, values) -> GridFunction:
        return GridFunction(values, self.interpolation)

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> GridFunction:
        return GridFunction.from_callable(fn, self.grid_size, self.interpolation)


def _check_x(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError("x must lie in [0, 1]")
    return arr


def _scalar_or_array(out: np.ndarray):
    return float(out) if np.ndim(out) == 0 else out


def p_weight(i, x):
    """P_i(x) = (x+1)/((x+i)(x+i+1))."""
    i_arr = np.asarray(i)
    if np.any(i_arr < 1):
        raise DomainError("i must be >= 1")
    xa = _check_x(x)
    i_arr = i_arr.astype(float)
    return _scalar_or_array((xa + 1.0) / ((xa + i_arr) * (xa + i_arr + 1.0)))


def tail_mass(I, x):
    """sum_{i>I} P_i(x) = (x+1)/(x+I+1), by telescoping i/(x+i+1) - (i-1)/(x+i)."""
    if np.any(np.asarray(I) < 1):
        raise DomainError("I must be >= 1")
    xa = _check_x(x)
    return _scalar_or_array((xa + 1.0) / (xa + np.asarray(I, dtype=float) + 1.0))


# ---------------------------------------------------------------------------
# series kernels

def _weights_U(x: np.ndarray, i: np.ndarray) -> np.ndarray:
    return (x + 1.0) / ((x + i) * (x + i + 1.0))


def _weights_derivative(x: np.ndarray, i: np.ndarray) -> np.ndarray:
    return 1.0 / ((x + i) * (x + i))


def _weights_minus_one(x: np.ndarray, i: np.ndarray) -> np.ndarray:
    return np.broadcast_to(-1.0, np.broadcast_shapes(x.shape, i.shape))


_WEIGHTS = {
    "U": _weights_U,
    "derivative": _weights_derivative,
    "gk": _weights_minus_one,
}


def _accumulate(points: np.ndarray, weights: np.ndarray, n: int, cubic: bool) -> np.ndarray:
    """Dense (rows, n or 2n) coefficients of sum_i w_i f(points_i) for each row.

    ``points`` and ``weights`` have shape (rows, terms); terms are accumulated
    in column order.
    """
    rows = points.shape[0]
    width = 2 * n if cubic else n
    k, t = locate(points, n)
    base = (np.arange(rows, dtype=np.int64) * width)[:, None]
    idx = (base + k).ravel()
    w = np.ascontiguousarray(weights, dtype=float).ravel()
    t = t.ravel()
    size = rows * width
    if cubic:
        h00, h01, h10, h11 = hermite_weights(t)
        h = 1.0 / (n - 1)
        acc = np.bincount(idx, w * h00, minlength=size)
        acc += np.bincount(idx + 1, w * h01, minlength=size)
        acc += np.bincount(idx + n, w * (h * h10), minlength=size)
        acc += np.bincount(idx + n + 1, w * (h * h11), minlength=size)
    else:
        acc = np.bincount(idx, w * (1.0 - t), minlength=size)
        acc += np.bincount(idx + 1, w * t, minlength=size)
    return acc.reshape(rows, width)


@functools.lru_cache(maxsize=16)
def series_kernel(cfg: OperatorConfig, kind: str) -> sp.csr_matrix:
    """Sparse matrix S with (S @ [f, f']) [j] = sum_{i<=I} w_i(x_j) f(1/(x_j+i)).

    ``kind`` picks the weights: "U" (P_i), "derivative" (1/(x+i)^2) or
    "gk" (-1). For linear interpolation the slope block is omitted.
    """
    weights_fn = _WEIGHTS[kind]
    n, I = cfg.grid_size, cfg.truncation_index
    cubic = cfg.interpolation is Interpolation.CUBIC_MONOTONE
    x = nodes(n)
    i = np.arange(1, I + 1, dtype=float)[None, :]
    step = max(1, _CHUNK_PAIRS // I)
    blocks = []
    for j0 in range(0, n, step):
        xs = x[j0:j0 + step, None]
        pts = 1.0 / (xs + i)
        blocks.append(sp.csr_matrix(_accumulate(pts, weights_fn(xs, i), n, cubic)))
    mat = sp.vstack(blocks, format="csr")
    mat.sort_indices()
    return mat


@functools.lru_cache(maxsize=16)
def reciprocal_row(cfg: OperatorConfig) -> np.ndarray:
    """Coefficient row of sum_{i<=I} f(1/i), which does not depend on x."""
    n, I = cfg.grid_size, cfg.truncation_index
    cubic = cfg.interpolation is Interpolation.CUBIC_MONOTONE
    pts = 1.0 / np.arange(1, I + 1, dtype=float)[None, :]
    row = _accumulate(pts, np.ones_like(pts), n, cubic)[0]
    row.setflags(write=False)
    return row


def stacked(f: GridFunction, cfg: OperatorConfig) -> np.ndarray:
    """[values, slopes] in the layout the kernels expect."""
    if cfg.interpolation is Interpolation.CUBIC_MONOTONE:
        return np.concatenate((f.values, f.slopes))
    return f.values


def conform(f: GridFunction, cfg: OperatorConfig) -> GridFunction:
    if f.grid_size != cfg.grid_size:
        raise DomainError(f"grid size {f.grid_size} does not match config grid {cfg.grid_size}")
    if f.interpolation is not cfg.interpolation:
        return GridFunction(f.values, cfg.interpolation)
    return f


def apply_U(f: GridFunction, cfg: OperatorConfig = OperatorConfig()) -> GridFunction:
    """Uf on the grid of ``cfg``.

    With the tail correction, the omitted terms i > I are charged at f(0),
    i.e. f(0) * tail_mass(I, x).
    """
    f = conform(f, cfg)
    out = series_kernel(cfg, "U") @ stacked(f, cfg)
    if cfg.tail_on:
        out = out + f.values[0] * tail_mass(cfg.truncation_index, nodes(cfg.grid_size))
    return cfg.grid_function(out)


def h_function(cfg: OperatorConfig = OperatorConfig()) -> GridFunction:
    """h(x) = sum_i P_i(x)/(x+i)^2, i.e. U applied to x^2."""
    return apply_U(cfg.sample(np.square), cfg)


def normalization_error(cfg: OperatorConfig = OperatorConfig()) -> float:
    """sup over nodes of |U1 - 1|."""
    one = GridFunction.constant(1.0, cfg.grid_size, cfg.interpolation)
    return apply_U(one, cfg).sup_distance(one)


@dataclass(frozen=True)
class MonotoneFlipReport:
    is_input_nondecreasing: bool
    is_output_nonincreasing: bool
    worst_violation: float


def check_monotone_flip(
    f: GridFunction, cfg: OperatorConfig = OperatorConfig(), slack: float = 0.0
) -> MonotoneFlipReport:
    """Apply U to ``f`` and measure how far Uf is from non-increasing on the grid.

    ``worst_violation`` is the largest increase between consecutive output
    nodes (0 if there is none). Non-monotone inputs are reported, not rejected.
    """
    if slack < 0:
        raise DomainError("slack must be >= 0")
    f = conform(f, cfg)
    out = apply_U(f, cfg).values
    worst = max(0.0, float(np.max(np.diff(out))))
    return MonotoneFlipReport(
        is_input_nondecreasing=bool(np.all(np.diff(f.values) >= -slack)),
        is_output_nonincreasing=worst <= slack,
        worst_violation=worst,
    )


def random_nondecreasing_pl(rng: np.random.Generator, grid_size: int, max_breaks: int = 12) -> np.ndarray:
    """Grid samples of a random non-decreasing piecewise-linear function on [0, 1].

    Some pieces are flat and some jumps are steep, so the family covers both
    plateaus and near-discontinuities.
    """
    n_breaks = int(rng.integers(1, max_breaks + 1))
    knots = np.concatenate(([0.0], np.sort(rng.random(n_breaks)), [1.0]))
    steps = rng.exponential(1.0, size=knots.size - 1)
    steps[rng.random(steps.size) < 0.3] = 0.0
    levels = rng.normal() + np.concatenate(([0.0], np.cumsum(steps)))
    return np.interp(nodes(grid_size), knots, levels)
