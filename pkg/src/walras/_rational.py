"""Exact rational helpers shared by every module.

``Rat`` is gmpy2's ``mpq`` when available (an order of magnitude faster than
:class:`fractions.Fraction`) and ``Fraction`` otherwise.  Both hash and
compare identically, so values from either type mix freely.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover
    Rat = Fraction

RationalLike = Union[int, str, Fraction, Rational]


def q(x: RationalLike) -> Rat:
    """Coerce ``x`` to an exact rational without ever passing through floats.

    Strings must be integers or ``"p/q"``; decimal strings and floats are
    rejected so that no binary rounding can sneak into a computation.
    """
    if isinstance(x, Rat):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Rat(x)
    if isinstance(x, Rational):
        return Rat(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        s = x.strip()
        if "." in s or "e" in s.lower():
            raise ValueError(f"decimal notation not allowed for exact rationals: {x!r}")
        f = Fraction(s)
        return Rat(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def fmt(x: RationalLike) -> str:
    """Canonical ``"p/q"`` string (integers print without a denominator)."""
    return str(q(x))
