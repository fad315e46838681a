"""Continued-fraction primitives: the Gauss map, digit expansions, convergents, orbits.

Exact rationals are carried as :class:`fractions.Fraction`, which is always
stored in lowest terms with a positive denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

from gausskuzmin.errors import DomainError

ExactRational = Fraction
RealLike = Union[Fraction, int, float, Decimal, str]

DEFAULT_MAX_DIGITS = 10_000


@dataclass(frozen=True)
class CFExpansion:
    """Partial quotients d_1..d_k of x = [0; d_1, ..., d_k, ...].

    ``exact`` is true when the expansion terminated, i.e. x was rational and
    all of its digits are listed.
    """

    digits: tuple[int, ...]
    exact: bool

    def __post_init__(self) -> None:
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        for d in self.digits:
            if d < 1:
                raise DomainError(f"partial quotients must be >= 1, got {d}")
        if self.exact and len(self.digits) >= 2 and self.digits[-1] < 2:
            raise DomainError("exact expansions are canonical: last digit must be >= 2")

    def __len__(self) -> int:
        return len(self.digits)


def _check_unit_interval(x, *, what: str = "x") -> None:
    if not (0 <= x < 1):
        raise DomainError(f"{what} must lie in [0, 1), got {x}")


def to_fraction(x: RealLike) -> Fraction:
    """Convert ``x`` to an exact rational.

    Floats convert to the dyadic rational they store; strings accept both
    ``"p/q"`` and decimal notation.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float) and not math.isfinite(x):
        raise DomainError(f"cannot convert {x} to a rational")
    if isinstance(x, (int, float, Decimal, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational literal: {x!r}") from exc
    raise TypeError(f"unsupported type {type(x).__name__}")


def tau(x: float) -> float:
    """Gauss map on floats: 1/x - floor(1/x), with tau(0) = 0."""
    _check_unit_interval(x)
    if x == 0:
        return 0.0
    y = 1.0 / x
    return y - math.floor(y)


def tau_exact(x: Fraction) -> Fraction:
    """Gauss map on exact rationals.

    For x = p/q the image is (q mod p)/p, so the denominator drops from q to p.
    """
    x = to_fraction(x)
    _check_unit_interval(x)
    if x == 0:
        return Fraction(0)
    p, q = x.numerator, x.denominator
    return Fraction(q % p, p)


def expand(x: RealLike, max_digits: int = DEFAULT_MAX_DIGITS) -> CFExpansion:
    """Regular continued-fraction digits of ``x`` in [0, 1).

    Stops when the orbit reaches 0 (``exact=True``) or after ``max_digits``
    digits (``exact=False``).
    """
    if max_digits < 1:
        raise DomainError("max_digits must be >= 1")
    x = to_fraction(x)
    _check_unit_interval(x)
    p, q = x.numerator, x.denominator
    digits: list[int] = []
    while p != 0 and len(digits) < max_digits:
        d, r = divmod(q, p)
        digits.append(d)
        p, q = r, p
    return CFExpansion(tuple(digits), exact=(p == 0))


def convergents(digits: Sequence[int] | CFExpansion) -> list[Fraction]:
    """Convergents p_k/q_k of [0; d_1, ..., d_k] for k = 1..len(digits)."""
    if isinstance(digits, CFExpansion):
        digits = digits.digits
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    out = []
    for d in digits:
        if d < 1:
            raise DomainError(f"partial quotients must be >= 1, got {d}")
        p_prev, p = p, d * p + p_prev
        q_prev, q = q, d * q + q_prev
        out.append(Fraction(p, q))
    return out


def evaluate(e: CFExpansion | Sequence[int]) -> Fraction:
    """Exact value of the finite continued fraction [0; d_1, ..., d_k].

    The empty expansion is 0; ``[1]`` evaluates to 1.
    """
    conv = convergents(e)
    return conv[-1] if conv else Fraction(0)


def orbit(x: RealLike, n: int) -> list:
    """[x, tau(x), ..., tau^n(x)].

    Rational-typed inputs (Fraction, int, str, Decimal) are iterated exactly;
    floats use the floating-point map.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if isinstance(x, float):
        step = tau
        _check_unit_interval(x)
    else:
        x = to_fraction(x)
        _check_unit_interval(x)
        step = tau_exact
    out = [x]
    for _ in range(n):
        x = step(x)
        out.append(x)
    return out
