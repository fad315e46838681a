"""Gauss-Kuzmin recursion on distribution functions and the derivative pipeline.

Two routes to the same limit are provided:

* ``gk_step`` iterates F_{n+1}(x) = sum_i [F_n(1/i) - F_n(1/(x+i))] directly;
* ``iterate_g`` follows g_n = (x+1) F_n', for which the recursion becomes
  g_{n+1} = U g_n, and tracks M_n = max |g_n'|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from gausskuzmin import constants
from gausskuzmin.errors import DomainError, SeedShapeError
from gausskuzmin.grid import GridFunction, nodes
from gausskuzmin.pf_operator import (
    OperatorConfig,
    apply_U,
    conform,
    reciprocal_row,
    series_kernel,
    stacked,
)

SEED_TOLERANCE = 1e-9
CUSTOM_SEED_TOLERANCE = 1e-12

# sup errors at or below this are indistinguishable from the discretization
# floor of the default grid, so rates fitted through them are meaningless.
NOISE_FLOOR = 1e-10

CONVERGED = "converged below noise floor"


@dataclass(frozen=True)
class IterationReport:
    n: int
    sup_error: Optional[float] = None
    M_n: Optional[float] = None
    ratio_error: Optional[float] = None
    ratio_M: Optional[float] = None


@dataclass(frozen=True)
class IterationConfig:
    operator: OperatorConfig = field(default_factory=OperatorConfig)
    steps: int = 16
    initial: Union[str, GridFunction] = "identity"

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if isinstance(self.initial, str):
            if self.initial not in ("identity", "gauss"):
                raise DomainError(f"unknown initial function {self.initial!r}")
        elif isinstance(self.initial, GridFunction):
            F = self.initial
            if F.grid_size != self.operator.grid_size:
                raise DomainError("custom initial function is on a different grid")
            if abs(F.values[0]) > CUSTOM_SEED_TOLERANCE or abs(F.values[-1] - 1.0) > CUSTOM_SEED_TOLERANCE:
                raise SeedShapeError("custom seed must satisfy F(0) = 0 and F(1) = 1 within 1e-12")
        else:
            raise TypeError("initial must be 'identity', 'gauss' or a GridFunction")

    def initial_distribution(self) -> GridFunction:
        op = self.operator
        if self.initial == "identity":
            return op.sample(lambda x: x)
        if self.initial == "gauss":
            return op.sample(constants.gauss_cdf)
        return conform(self.initial, op)

    def initial_g(self) -> GridFunction:
        op = self.operator
        if self.initial == "identity":
            return op.sample(lambda x: x + 1.0)
        if self.initial == "gauss":
            return GridFunction.constant(constants.INV_LOG2, op.grid_size, op.interpolation)
        return to_g(derivative_of(conform(self.initial, op)))


def _endpoint_derivatives(v: np.ndarray, h: float) -> tuple[float, float]:
    """First and second derivative at x = 0 from one-sided differences."""
    if v.size >= 5:
        d1 = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
        d2 = (35.0 * v[0] - 104.0 * v[1] + 114.0 * v[2] - 56.0 * v[3] + 11.0 * v[4]) / (12.0 * h * h)
        return d1, d2
    if v.size >= 3:
        return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h), (v[0] - 2.0 * v[1] + v[2]) / (h * h)
    return (v[1] - v[0]) / h, 0.0


def gk_tail(F: GridFunction, cfg: OperatorConfig) -> np.ndarray:
    """Estimate of sum_{i>I} [F(1/i) - F(1/(x+i))] at the nodes.

    Uses F(y) ~ F(0) + F'(0) y + F''(0) y^2 / 2 near 0 and evaluates the
    resulting sums over i > I by the midpoint rule, whose error is O(I^-3).
    """
    x = nodes(cfg.grid_size)
    a = cfg.truncation_index + 0.5
    d1, d2 = _endpoint_derivatives(F.values, F.spacing)
    first = np.log1p(x / a)
    second = x / (a * (x + a))
    return d1 * first + 0.5 * d2 * second


def gk_step(F: GridFunction, cfg: OperatorConfig = OperatorConfig()) -> GridFunction:
    """One step of F_{n+1}(x) = sum_i [F_n(1/i) - F_n(1/(x+i))]."""
    F = conform(F, cfg)
    if abs(F.values[0]) > SEED_TOLERANCE or abs(F.values[-1] - 1.0) > SEED_TOLERANCE:
        raise SeedShapeError(
            f"need F(0) = 0 and F(1) = 1 within {SEED_TOLERANCE}; "
            f"got F(0) = {F.values[0]!r}, F(1) = {F.values[-1]!r}"
        )
    vec = stacked(F, cfg)
    out = series_kernel(cfg, "gk") @ vec + float(reciprocal_row(cfg) @ vec)
    if cfg.tail_on:
        out += gk_tail(F, cfg)
    # every term cancels at x = 0
    out[0] = 0.0
    if cfg.tail_on:
        # the full series telescopes to F(1) - F(0) at x = 1; pinning it keeps
        # the tail model's O(I^-2) error from drifting the endpoint
        out[-1] = F.values[-1] - F.values[0]
    return cfg.grid_function(out)


def derivative_recursion_step(fprime: GridFunction, cfg: OperatorConfig = OperatorConfig()) -> GridFunction:
    """f'_{n+1}(x) = sum_i f'_n(1/(x+i)) / (x+i)^2."""
    fprime = conform(fprime, cfg)
    out = series_kernel(cfg, "derivative") @ stacked(fprime, cfg)
    if cfg.tail_on:
        # sum_{i>I} (x+i)^-2 by the midpoint rule
        out += fprime.values[0] / (nodes(cfg.grid_size) + cfg.truncation_index + 0.5)
    return cfg.grid_function(out)


def to_g(fprime: GridFunction) -> GridFunction:
    """g(x) = (x+1) f'(x)."""
    return fprime.with_values(fprime.values * (fprime.nodes + 1.0))


def from_g(g: GridFunction) -> GridFunction:
    """f'(x) = g(x)/(x+1)."""
    return g.with_values(g.values / (g.nodes + 1.0))


def derivative_of(f: GridFunction) -> GridFunction:
    """Second-order finite-difference derivative (central inside, one-sided at the ends)."""
    if f.grid_size < 3:
        raise DomainError("derivative_of needs at least 3 nodes")
    return f.with_values(np.gradient(f.values, f.spacing, edge_order=2))


def _ratio(cur: float, prev: Optional[float]) -> Optional[float]:
    if prev is None or prev == 0.0:
        return None
    return cur / prev


def iterate_distribution(cfg: IterationConfig = IterationConfig()) -> list[IterationReport]:
    """Iterate gk_step and record sup |F_n - gauss_cdf| for n = 0..steps."""
    op = cfg.operator
    target = constants.gauss_cdf(nodes(op.grid_size))
    F = cfg.initial_distribution()
    reports: list[IterationReport] = []
    prev = None
    for n in range(cfg.steps + 1):
        if n > 0:
            F = gk_step(F, op)
        err = F.sup_distance(target)
        reports.append(IterationReport(n=n, sup_error=err, ratio_error=_ratio(err, prev)))
        prev = err
    return reports


def iterate_g(cfg: IterationConfig = IterationConfig()) -> list[IterationReport]:
    """Iterate g_{n+1} = U g_n and record M_n = max |g_n'| for n = 0..steps."""
    op = cfg.operator
    g = cfg.initial_g()
    reports: list[IterationReport] = []
    prev = None
    for n in range(cfg.steps + 1):
        if n > 0:
            g = apply_U(g, op)
        m = float(np.max(np.abs(derivative_of(g).values)))
        reports.append(IterationReport(n=n, M_n=m, ratio_M=_ratio(m, prev)))
        prev = m
    return reports


def run_iteration(cfg: IterationConfig = IterationConfig()) -> list[IterationReport]:
    """Both pipelines side by side: sup_error from F_n, M_n from g_n."""
    dist = iterate_distribution(cfg)
    deriv = iterate_g(cfg)
    return [
        IterationReport(n=a.n, sup_error=a.sup_error, M_n=b.M_n, ratio_error=a.ratio_error, ratio_M=b.ratio_M)
        for a, b in zip(dist, deriv)
    ]


@dataclass(frozen=True)
class RateEstimate:
    rate: Optional[float]
    r_squared: Optional[float]
    status: str = "ok"


def fit_rate(ns: Sequence[int], errors: Sequence[float]) -> RateEstimate:
    """Least-squares fit of log(error) = a + n log(rate)."""
    n = np.asarray(ns, dtype=float)
    e = np.asarray(errors, dtype=float)
    if n.size < 2:
        raise DomainError("need at least two points to fit a rate")
    if np.any(~np.isfinite(e)) or np.any(e <= NOISE_FLOOR):
        return RateEstimate(rate=None, r_squared=None, status=CONVERGED)
    y = np.log(e)
    slope, intercept = np.polyfit(n, y, 1)
    resid = y - (slope * n + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return RateEstimate(rate=math.exp(slope), r_squared=r2)


def estimate_rate(reports: Sequence[IterationReport], n_lo: int, n_hi: int) -> RateEstimate:
    """Geometric decay rate of sup_error over the window n_lo..n_hi (inclusive)."""
    if n_lo >= n_hi:
        raise DomainError("need n_lo < n_hi")
    by_n = {r.n: r for r in reports}
    missing = [k for k in range(n_lo, n_hi + 1) if k not in by_n]
    if missing:
        raise DomainError(f"window {n_lo}..{n_hi} not covered by the reports (missing n = {missing})")
    window = [by_n[k] for k in range(n_lo, n_hi + 1)]
    errs = [math.nan if r.sup_error is None else r.sup_error for r in window]
    return fit_rate([r.n for r in window], errs)
