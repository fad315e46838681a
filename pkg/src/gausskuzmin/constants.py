"""Zeta values, the contraction constant 2*zeta(3) - zeta(2), and the Gauss measure.

Everything here works in IEEE double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gausskuzmin.errors import DomainError

LOG2 = math.log(2.0)
INV_LOG2 = 1.0 / LOG2

# Smallest tolerance accepted by the series evaluators; below this double
# rounding dominates the certified remainder.
MIN_TOLERANCE = 1e-13

# A published decimal for 2*zeta(3) - zeta(2). It does
# not match the formula (which gives 0.7591797...); kept only for reporting.
PRINTED_Q = 0.7594798
PRINTED_Q_NOTE = (
    "published decimal 0.7594798 disagrees with 2*zeta(3) - zeta(2) = 0.7591797...; "
    "the formula value is used everywhere"
)


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float


@dataclass(frozen=True)
class GaussMeasure:
    """The Gauss measure on [0, 1], density 1/((1 + x) log 2)."""

    normalization: float = INV_LOG2

    def density(self, x):
        return self.normalization / (1.0 + np.asarray(x, dtype=float))

    def cdf(self, x):
        return gauss_cdf(x)

    def __call__(self, a: float, b: float) -> float:
        return gauss_measure(a, b)


def _check_tol(tol: float) -> None:
    if not (tol > 0):
        raise DomainError(f"tolerance must be positive, got {tol}")
    if tol < MIN_TOLERANCE:
        raise DomainError(f"tolerance {tol} is below the double-precision floor {MIN_TOLERANCE}")


def _zeta(s: int, tol: float) -> SeriesResult:
    # Euler-Maclaurin for the tail n >= N:
    #   N^(1-s)/(s-1) + N^-s/2 + s N^(-s-1)/12 - s(s+1)(s+2) N^(-s-3)/720 + ...
    # The terms alternate in sign and, since n^-s is completely monotone, the
    # first omitted one bounds the remainder.
    # Sized for full double accuracy even at loose tol; it costs < 2000 terms.
    target = min(0.5 * tol, 1e-17)
    n_terms = max(2, math.ceil((s * (s + 1) * (s + 2) / (720.0 * target)) ** (1.0 / (s + 3))))
    partial = math.fsum(k ** -float(s) for k in range(1, n_terms))
    nf = float(n_terms)
    tail = math.fsum((nf ** (1 - s) / (s - 1), 0.5 * nf ** (-s), s * nf ** (-s - 1) / 12.0))
    remainder = s * (s + 1) * (s + 2) * nf ** (-s - 3) / 720.0
    value = partial + tail
    rounding = 4.0 * math.ulp(value)
    return SeriesResult(value=value, terms_used=n_terms, tail_bound=remainder + rounding)


def zeta(s: int, tol: float = 1e-12) -> SeriesResult:
    """Riemann zeta at an integer s >= 2, accurate to ``tol``."""
    if int(s) != s or s < 2:
        raise DomainError(f"s must be an integer >= 2, got {s}")
    _check_tol(tol)
    return _zeta(int(s), tol)


def contraction_constant(tol: float = 1e-12) -> SeriesResult:
    """q = 2*zeta(3) - zeta(2) to within ``tol``."""
    _check_tol(tol)
    z3 = _zeta(3, tol / 4)
    z2 = _zeta(2, tol / 4)
    value = 2.0 * z3.value - z2.value
    bound = 2.0 * z3.tail_bound + z2.tail_bound + 2.0 * math.ulp(value)
    return SeriesResult(value=value, terms_used=max(z3.terms_used, z2.terms_used), tail_bound=bound)


def gauss_cdf(x):
    """log(1 + x)/log 2. Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError("gauss_cdf is defined on [0, 1]")
    out = np.log1p(arr) / LOG2
    return float(out) if out.ndim == 0 else out


def gauss_measure(a: float, b: float) -> float:
    """Gauss-measure mass of [a, b]."""
    if not (0.0 <= a <= b <= 1.0):
        raise DomainError(f"need 0 <= a <= b <= 1, got a={a}, b={b}")
    if a == b:
        return 0.0
    # log1p((b - a)/(1 + a)) avoids cancellation between two nearby logs
    return math.log1p((b - a) / (1.0 + a)) / LOG2


def digit_probability(k: int) -> float:
    """Gauss-measure probability that the first partial quotient equals k."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k}")
    k = int(k)
    return math.log1p(1.0 / (k * (k + 2))) / LOG2
