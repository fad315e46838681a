import math

import mpmath
import numpy as np
import pytest

from gausskuzmin import DomainError
from gausskuzmin.constants import (
    INV_LOG2,
    PRINTED_Q,
    GaussMeasure,
    contraction_constant,
    digit_probability,
    gauss_cdf,
    gauss_measure,
    zeta,
)

mpmath.mp.dps = 40


def brute_zeta(s, terms=10_000_000):
    """Direct partial sum plus the integral tail, with its bracket width."""
    k = np.arange(terms, 0, -1, dtype=float)
    partial = math.fsum(k ** -float(s))
    lower = terms ** (1 - s) / (s - 1) - terms ** (-s)  # int_{N+1}^inf <= tail
    upper = terms ** (1 - s) / (s - 1)                   # tail <= int_N^inf
    return partial + 0.5 * (lower + upper), 0.5 * (upper - lower)


def test_zeta2_against_pi():
    r = zeta(2, 1e-12)
    assert abs(r.value - float(mpmath.pi**2 / 6)) <= 1e-12
    assert r.tail_bound <= 1e-12


def test_zeta3_against_brute_force():
    r = zeta(3, 1e-12)
    oracle, width = brute_zeta(3)
    assert abs(r.value - oracle) <= 1e-12 + width
    assert r.value == pytest.approx(1.202056903159, abs=1e-12)


def test_zeta_loose_tolerance():
    r = zeta(2, 1e-2)
    assert abs(r.value - math.pi**2 / 6) <= 1e-2
    assert r.tail_bound <= 1e-2


@pytest.mark.parametrize("s", [2, 3, 4, 5, 7])
def test_zeta_within_tail_bound(s):
    r = zeta(s, 1e-12)
    assert abs(r.value - float(mpmath.zeta(s))) <= r.tail_bound
    assert r.tail_bound >= 0


@pytest.mark.parametrize("s", [2, 3, 4])
def test_zeta_brackets(s):
    r = zeta(s, 1e-10)
    n = r.terms_used
    bare = math.fsum(k ** -float(s) for k in range(1, n))
    first_integral = (n - 1) ** (1 - s) / (s - 1)
    assert bare <= r.value <= bare + first_integral


@pytest.mark.parametrize("args", [(2, 0.0), (2, -1e-3), (1, 1e-6), (2, 1e-15), (2.5, 1e-6)])
def test_zeta_rejects(args):
    with pytest.raises(DomainError):
        zeta(*args)


def test_contraction_constant_value():
    q = contraction_constant(1e-9)
    assert q.value == pytest.approx(0.759179739, abs=1e-9)
    exact = float(2 * mpmath.zeta(3) - mpmath.zeta(2))
    assert abs(q.value - exact) <= q.tail_bound
    # not the printed decimal
    assert abs(q.value - PRINTED_Q) > 2e-4


def test_contraction_constant_loose():
    assert abs(contraction_constant(1e-2).value - 0.76) <= 0.01


def test_contraction_constant_is_definition():
    t = 1e-8
    q = contraction_constant(t).value
    assert abs(q - (2 * zeta(3, t / 4).value - zeta(2, t / 4).value)) <= t


def test_contraction_constant_matches_partial_fraction_series():
    # sum_i [1/(i+1)^3 + 1/(i^3 (i+1))], 10^6 terms; tail ~ 1/N^2
    i = np.arange(1_000_000, 0, -1, dtype=float)
    series = math.fsum(1.0 / (i + 1) ** 3 + 1.0 / (i**3 * (i + 1)))
    t = 1e-9
    assert abs(contraction_constant(t).value - series) <= t + 2e-12


def test_contraction_constant_rejects():
    with pytest.raises(DomainError):
        contraction_constant(0.0)


def test_gauss_cdf_examples():
    assert gauss_cdf(0.0) == 0.0
    assert gauss_cdf(1.0) == 1.0
    assert gauss_cdf(0.5) == pytest.approx(float(mpmath.log(1.5) / mpmath.log(2)), abs=1e-15)
    assert gauss_cdf(0.5) == pytest.approx(0.5849625007, abs=1e-10)


def test_gauss_cdf_strictly_increasing():
    x = np.linspace(0.0, 1.0, 10_000)
    assert np.all(np.diff(gauss_cdf(x)) > 0)


@pytest.mark.parametrize("bad", [-1e-9, 1.0 + 1e-9])
def test_gauss_cdf_domain(bad):
    with pytest.raises(DomainError):
        gauss_cdf(bad)


def test_gauss_measure():
    assert gauss_measure(0.0, 1.0) == pytest.approx(1.0, abs=1e-16)
    assert gauss_measure(0.3, 0.3) == 0.0
    assert gauss_measure(0.5, 1.0) == pytest.approx(0.4150374993, abs=1e-10)
    with pytest.raises(DomainError):
        gauss_measure(0.6, 0.5)
    with pytest.raises(DomainError):
        gauss_measure(-0.1, 0.5)


def test_gauss_measure_object():
    gm = GaussMeasure()
    assert gm.normalization == INV_LOG2
    assert gm(0.0, 1.0) == pytest.approx(1.0)
    assert gm.density(0.0) == pytest.approx(INV_LOG2)


def test_digit_probability_examples():
    assert digit_probability(1) == pytest.approx(gauss_measure(0.5, 1.0), rel=1e-15)
    assert digit_probability(2) == pytest.approx(math.log(9 / 8) / math.log(2), rel=1e-14)
    assert digit_probability(2) == pytest.approx(0.16992500, abs=1e-8)
    with pytest.raises(DomainError):
        digit_probability(0)


def test_digit_probability_sums_to_one_from_below():
    total = 0.0
    prev = 0.0
    for k in range(1, 1_000_001):
        total += digit_probability(k)
        if k % 1000 == 0:
            assert prev < total < 1.0
            prev = total
    assert abs(total - 1.0) <= 1e-5
