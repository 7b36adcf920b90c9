"""Exact scalars and small helpers shared by every module.

All coordinates are ``gmpy2.mpq`` values.  Nothing in the predicates ever
touches a binary float.
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq, mpz

Scalar = type(mpq(0))

ZERO = mpq(0)
ONE = mpq(1)


def Q(value) -> mpq:
    """Coerce ints, strings ("p/q", "1.25", "3e-2"), Fractions and mpq to mpq.

    Floats are rejected: a float has already lost whatever exact value the
    caller meant.
    """
    if type(value) is Scalar:
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a string or Fraction")
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if "e" in text.lower() or "." in text:
            return _Q_from_fraction(Fraction(text))
        return mpq(text)
    return mpq(value)


def _Q_from_fraction(f: Fraction) -> mpq:
    return mpq(f.numerator, f.denominator)


def to_str(x) -> str:
    """Serialize a scalar as "p/q" (or "p" for integers)."""
    x = mpq(x)
    if x.denominator == 1:
        return str(int(x.numerator))
    return f"{int(x.numerator)}/{int(x.denominator)}"


def sgn(x) -> int:
    return (x > 0) - (x < 0)


def vec(coords: Iterable) -> tuple:
    return tuple(Q(c) for c in coords)


def sub(a: Sequence, b: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def add(a: Sequence, b: Sequence) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def scale(a: Sequence, s) -> tuple:
    return tuple(x * s for x in a)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), ZERO)


def cross(a: Sequence, b: Sequence) -> tuple:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def det(rows: Sequence[Sequence]) -> mpq:
    """Exact determinant by fraction-preserving Gaussian elimination."""
    m = [list(map(mpq, r)) for r in rows]
    n = len(m)
    result = ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return ZERO
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            result = -result
        p = m[col][col]
        result *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                row, prow = m[r], m[col]
                for c in range(col, n):
                    row[c] -= f * prow[c]
    return result


def integer_matrix(points: Sequence[Sequence]) -> np.ndarray:
    """Scale points by the lcm of all denominators to integers.

    Returns an int64 array when every entry fits in 29 bits (so 3x3
    determinants of differences cannot overflow) and an object array of
    Python ints otherwise.  Scaling by a positive constant preserves every
    orientation sign.
    """
    dens = [int(mpq(c).denominator) for p in points for c in p]
    L = reduce(lcm, dens, 1)
    ints = [[int(mpq(c) * L) for c in p] for p in points]
    big = max((abs(v) for row in ints for v in row), default=0)
    if big < (1 << 29):
        return np.array(ints, dtype=np.int64).reshape(len(points), -1)
    arr = np.empty((len(points), len(points[0]) if points else 0), dtype=object)
    for i, row in enumerate(ints):
        for j, v in enumerate(row):
            arr[i, j] = v
    return arr


def primitive(v: Sequence[int]) -> tuple:
    """Divide an integer vector by the gcd of its entries."""
    g = reduce(gcd, (abs(int(x)) for x in v), 0)
    if g == 0:
        return tuple(int(x) for x in v)
    return tuple(int(x) // g for x in v)


def as_mpz(x) -> mpz:
    return mpz(x)
