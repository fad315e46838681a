"""Monte Carlo check of the Gauss limit law for tau^n of a uniform point.

Each sample is a dyadic rational xi = m / 2^B with m drawn from a
counter-based generator keyed by (seed, index), so sample ``index`` never
depends on how the work is split. xi stands for every real point of the cell
[m/2^B, (m+1)/2^B). The cell is pushed through tau with exact integer
arithmetic; as long as it stays inside a single cylinder the first n digits
are shared by the whole cell and tau^n(xi) is a faithful sample. When a cell
straddles a digit boundary the B bits were not enough, and the sample is
rejected and counted.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from gausskuzmin import constants
from gausskuzmin.errors import DomainError

DEFAULT_HISTOGRAM_DIGITS = 10
_WORDS_PER_BLOCK = 4  # Philox emits 4 x 64 bits per counter value
_BLOCK_BITS = 64 * _WORDS_PER_BLOCK


@dataclass(frozen=True)
class MCConfig:
    n: int = 10
    samples: int = 100_000
    seed: int = 42
    precision_bits: Union[int, str] = "auto"

    def __post_init__(self) -> None:
        if self.n < 0:
            raise DomainError("n must be >= 0")
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.precision_bits != "auto":
            if int(self.precision_bits) != self.precision_bits or self.precision_bits < 64:
                raise DomainError("precision_bits must be 'auto' or an integer >= 64")

    @property
    def bits(self) -> int:
        if self.precision_bits == "auto":
            return 4 * self.n + 64
        return int(self.precision_bits)

    @property
    def blocks_per_sample(self) -> int:
        return -(-self.bits // _BLOCK_BITS)


@dataclass
class MCReport:
    ks_distance: Optional[float]
    samples: int
    n: int
    seed: int
    precision_bits: int
    rejected: int
    digit_histogram: list[int] = field(default_factory=list)
    status: str = "ok"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OrbitResult:
    value: Optional[float]
    next_digit: Optional[int]  # floor(1/value); None when value == 0 or rejected
    rejected: bool


def _mantissas(cfg: MCConfig, start: int, count: int) -> list[int]:
    """B-bit integers m for sample indices start..start+count-1."""
    k = cfg.blocks_per_sample
    bg = np.random.Philox(key=cfg.seed, counter=[start * k, 0, 0, 0])
    words = bg.random_raw(count * k * _WORDS_PER_BLOCK).reshape(count, k * _WORDS_PER_BLOCK)
    drop = k * _BLOCK_BITS - cfg.bits
    out = []
    for row in words.tolist():
        m = 0
        for w in row:
            m = (m << 64) | w
        out.append(m >> drop)
    return out


def uniform_variate(cfg: MCConfig, index: int) -> Fraction:
    """The index-th uniform variate as an exact dyadic rational m / 2^B."""
    if not (0 <= index < cfg.samples):
        raise DomainError(f"index must lie in [0, {cfg.samples})")
    return Fraction(_mantissas(cfg, index, 1)[0], 1 << cfg.bits)


def push_cell(lo: Fraction, hi: Fraction, n: int) -> OrbitResult:
    """Apply tau n times to every point of [lo, hi] (lo == hi for a single point).

    Returns the image of ``lo`` rounded to a double, or a rejection if some
    step would split the cell across two digits.
    """
    # (ap, aq) tracks the image of lo, (bp, bq) the image of hi; tau reverses
    # orientation, so which one is the left end alternates. Fractions are
    # not kept reduced, only their ratios matter.
    ap, aq = lo.numerator, lo.denominator
    bp, bq = hi.numerator, hi.denominator
    for _ in range(n):
        if ap * bq <= bp * aq:
            lp, lq, rp, rq = ap, aq, bp, bq
        else:
            lp, lq, rp, rq = bp, bq, ap, aq
        if lp == 0:
            if rp == 0:
                break  # tau(0) = 0
            return OrbitResult(None, None, True)
        d = lq // lp
        # every y in [l, r] has digit d iff r <= 1/d
        if d * rp > rq:
            return OrbitResult(None, None, True)
        ap, aq = aq - d * ap, ap
        bp, bq = bq - d * bp, bp
    value = ap / aq
    digit = aq // ap if ap else None
    return OrbitResult(value, digit, False)


def _orbit_of_mantissa(m: int, bits: int, n: int) -> OrbitResult:
    den = 1 << bits
    return push_cell(Fraction(m, den), Fraction(m + 1, den), n)


def sample_orbit_uniform(cfg: MCConfig, index: int, xi: Optional[Fraction] = None) -> OrbitResult:
    """tau^n of the index-th uniform sample.

    ``xi`` injects an exact rational instead of the random variate; it is then
    iterated exactly with no precision budget.
    """
    if xi is not None:
        xi = Fraction(xi)
        if not (0 <= xi < 1):
            raise DomainError("xi must lie in [0, 1)")
        return push_cell(xi, xi, cfg.n)
    m = _mantissas(cfg, index, 1)[0] if 0 <= index < cfg.samples else None
    if m is None:
        raise DomainError(f"index must lie in [0, {cfg.samples})")
    return _orbit_of_mantissa(m, cfg.bits, cfg.n)


def _run_chunk(args: tuple[MCConfig, int, int]) -> tuple[list[float], list[Optional[int]], int]:
    cfg, start, count = args
    values: list[float] = []
    digits: list[Optional[int]] = []
    rejected = 0
    for m in _mantissas(cfg, start, count):
        r = _orbit_of_mantissa(m, cfg.bits, cfg.n)
        if r.rejected:
            rejected += 1
        else:
            values.append(r.value)
            digits.append(r.next_digit)
    return values, digits, rejected


def ks_distance(samples, cdf) -> float:
    """sup_z |ECDF(z) - cdf(z)| from the sorted-sample formula."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("no samples")
    c = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - c)
    d_minus = np.max(c - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


def digit_histogram(digits, max_digit: int = DEFAULT_HISTOGRAM_DIGITS) -> list[int]:
    """Counts for digits 1..max_digit plus a final overflow bucket.

    A value of 0 has no next digit (None); it lands in the overflow bucket.
    """
    hist = [0] * (max_digit + 1)
    for d in digits:
        if d is None or d > max_digit:
            hist[-1] += 1
        else:
            hist[d - 1] += 1
    return hist


def run_samples(cfg: MCConfig, workers: int = 1, chunk: int = 10_000):
    """All accepted tau^n values (in index order), their next digits and the reject count."""
    tasks = [(cfg, s, min(chunk, cfg.samples - s)) for s in range(0, cfg.samples, chunk)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    values = [v for p in parts for v in p[0]]
    digits = [d for p in parts for d in p[1]]
    rejected = sum(p[2] for p in parts)
    return values, digits, rejected


def empirical_cdf_distance(
    cfg: MCConfig, workers: int = 1, max_digit: int = DEFAULT_HISTOGRAM_DIGITS
) -> MCReport:
    """KS distance between the law of tau^n(xi) and the Gauss CDF."""
    values, digits, rejected = run_samples(cfg, workers=workers)
    report = MCReport(
        ks_distance=None,
        samples=len(values),
        n=cfg.n,
        seed=cfg.seed,
        precision_bits=cfg.bits,
        rejected=rejected,
        digit_histogram=digit_histogram(digits, max_digit),
    )
    if not values:
        report.status = "all samples rejected"
        return report
    report.ks_distance = ks_distance(values, constants.gauss_cdf)
    return report


def uniform_cdf(x):
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


def ks_quantile_99(samples: int) -> float:
    """Asymptotic 99% quantile of the one-sample KS statistic."""
    return 1.63 / math.sqrt(samples)
