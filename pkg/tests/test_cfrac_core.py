from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gausskuzmin import DomainError
from gausskuzmin.cfrac_core import (
    CFExpansion,
    convergents,
    evaluate,
    expand,
    orbit,
    tau,
    tau_exact,
)


def nested_value(digits):
    """Evaluate [0; d1, ..., dk] from the inside out."""
    v = Fraction(0)
    for d in reversed(digits):
        v = 1 / (d + v)
    return v


@st.composite
def rationals(draw, max_den=10**6):
    q = draw(st.integers(1, max_den))
    p = draw(st.integers(0, q - 1))
    return Fraction(p, q)


@pytest.mark.parametrize("x, expected", [(0.0, 0.0), (0.5, 0.0), (5 / 12, 0.4)])
def test_tau_examples(x, expected):
    assert tau(x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5])
def test_tau_domain(bad):
    with pytest.raises(DomainError):
        tau(bad)


@pytest.mark.parametrize(
    "x, expected",
    [(Fraction(0), Fraction(0)), (Fraction(2, 5), Fraction(1, 2)), (Fraction(1, 2), Fraction(0))],
)
def test_tau_exact_examples(x, expected):
    assert tau_exact(x) == expected


def test_tau_exact_domain():
    with pytest.raises(DomainError):
        tau_exact(Fraction(1))
    with pytest.raises(DomainError):
        tau_exact(Fraction(-1, 3))


@pytest.mark.parametrize(
    "x, digits",
    [(Fraction(0), ()), (Fraction(5, 12), (2, 2, 2)), (Fraction(2, 5), (2, 2))],
)
def test_expand_examples(x, digits):
    e = expand(x)
    assert e.digits == digits
    assert e.exact
    assert nested_value(digits) == x


def test_expand_accepts_strings_and_floats():
    assert expand("5/12").digits == (2, 2, 2)
    assert expand("0.4").digits == (2, 2)
    # 0.5 is exactly representable
    assert expand(0.5) == CFExpansion((2,), True)


def test_expand_truncates():
    e = expand(Fraction(5, 12), max_digits=2)
    assert e.digits == (2, 2) and not e.exact
    # golden-ratio convergent: many ones, cut short
    e = expand(Fraction(832040, 1346269), max_digits=5)
    assert e.digits == (1, 1, 1, 1, 1) and not e.exact


def test_expand_domain():
    with pytest.raises(DomainError):
        expand(Fraction(3, 2))
    with pytest.raises(DomainError):
        expand(Fraction(1, 3), max_digits=0)


@pytest.mark.parametrize(
    "digits, value",
    [((), Fraction(0)), ((2, 2, 2), Fraction(5, 12)), ((1,), Fraction(1))],
)
def test_evaluate_examples(digits, value):
    assert evaluate(CFExpansion(digits, exact=True)) == value
    assert evaluate(list(digits)) == nested_value(digits)


def test_expansion_invariants():
    with pytest.raises(DomainError):
        CFExpansion((2, 0), exact=False)
    with pytest.raises(DomainError):
        CFExpansion((2, 1), exact=True)
    CFExpansion((2, 1), exact=False)


def test_convergents_recurrence():
    assert convergents((2, 2, 2)) == [Fraction(1, 2), Fraction(2, 5), Fraction(5, 12)]


@pytest.mark.parametrize(
    "x, n, expected",
    [
        (Fraction(0), 3, [0, 0, 0, 0]),
        (Fraction(5, 12), 2, [Fraction(5, 12), Fraction(2, 5), Fraction(1, 2)]),
        (Fraction(5, 12), 3, [Fraction(5, 12), Fraction(2, 5), Fraction(1, 2), Fraction(0)]),
    ],
)
def test_orbit_examples(x, n, expected):
    assert orbit(x, n) == expected


def test_orbit_float_path():
    out = orbit(0.3, 2)
    assert out[0] == 0.3
    assert out[1] == pytest.approx(1 / 3, abs=1e-14)
    with pytest.raises(DomainError):
        orbit(1.2, 2)


@given(rationals())
def test_roundtrip(x):
    e = expand(x)
    assert e.exact
    assert evaluate(e) == x
    assert nested_value(e.digits) == x


@given(rationals())
def test_digits_follow_orbit(x):
    e = expand(x)
    orb = orbit(x, len(e.digits))
    for k, d in enumerate(e.digits):
        assert orb[k] != 0
        assert d == int(1 / orb[k])
    assert orb[-1] == 0


@given(rationals())
def test_shift_property(x):
    e = expand(x)
    if x != 0:
        assert expand(tau_exact(x)).digits == e.digits[1:]


@given(rationals())
def test_denominator_decreases(x):
    if x != 0:
        assert tau_exact(x).denominator < x.denominator


@given(rationals())
def test_canonical_form(x):
    e = expand(x)
    if len(e.digits) >= 2:
        assert e.digits[-1] >= 2
