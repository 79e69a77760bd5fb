"""Rational scalars and integer-vector helpers shared by the kernel."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import isqrt, mpq

Q = mpq
NEG_INF = -math.inf
POS_INF = math.inf


def q(value) -> mpq:
    """Coerce an int, Fraction, mpq or "p/q" string to an exact rational.

    Floats are rejected: they would silently inject rounding error.
    """
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not an exact rational")
    if isinstance(value, str):
        value = value.strip()
        return mpq(Fraction(value))
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def qvec(values: Iterable) -> tuple:
    return tuple(q(v) for v in values)


def to_str(value) -> str:
    value = q(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_sqrt(value) -> mpq | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    value = q(value)
    if value < 0:
        return None
    num, den = int(value.numerator), int(value.denominator)
    rn, rd = int(isqrt(num)), int(isqrt(den))
    if rn * rn != num or rd * rd != den:
        return None
    return mpq(rn, rd)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), mpq(0))


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Scale a rational vector by a positive factor to coprime integers."""
    vec = [q(v) for v in vec]
    den = 1
    for v in vec:
        den = math.lcm(den, int(v.denominator))
    ints = [int(v * den) for v in vec]
    g = 0
    for i in ints:
        g = math.gcd(g, i)
    if g == 0:
        return tuple(ints)
    return tuple(i // g for i in ints)


def int_primitive(vec: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for i in vec:
        g = math.gcd(g, i)
    if g <= 1:
        return tuple(vec)
    return tuple(i // g for i in vec)
