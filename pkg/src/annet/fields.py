"""Exact coefficient fields.

Every algorithm in this package is written against a small field protocol:
a ``Field`` object owns ``zero``/``one`` and knows how to ``coerce`` raw
inputs into elements.  Elements are immutable, overload the arithmetic
operators, are falsy exactly when zero, and compare equal exactly when
their canonical forms coincide.  Three fields are provided here and in the
sibling modules:

* ``QQ`` -- arbitrary-precision rationals (gmpy2.mpq, Fraction fallback);
* ``FunctionField`` (ratfunc.py) -- univariate rational functions over any
  base field, used both for the spectral variable and, iterated, for
  symbolic edge weights;
* ``DualField`` (dual.py) -- dual numbers a + b*eps with eps^2 = 0 over any
  base field, used for exact forward-mode differentiation.

Rationals serialize as decimal strings "p/q" (the "/q" is omitted when the
denominator is 1); parsing accepts the same format.
"""

from __future__ import annotations

from typing import Any

try:
    from gmpy2 import mpq as _mpq
    from gmpy2 import mpz as _mpz

    def _make_rational(a: Any, b: Any = 1):
        return _mpq(a, b)

    _RATIONAL_TYPES = (type(_mpq(0)),)
    _COERCIBLE_TYPES = (type(_mpq(0)), type(_mpz(0)), int)
except ImportError:  # pragma: no cover
    from fractions import Fraction as _mpq

    def _make_rational(a, b=1):
        return _mpq(a, b)

    _RATIONAL_TYPES = (_mpq,)
    _COERCIBLE_TYPES = (_mpq, int)


class FieldError(ArithmeticError):
    """Raised on invalid field operations (division by zero, pole hits, ...)."""


def rational(value: Any, den: Any = None):
    """Coerce ``value`` into an exact rational.

    Accepts ints, existing rationals, Fractions, and strings "p/q" or "p".
    """
    if den is not None:
        return _make_rational(value, den)
    if isinstance(value, str):
        value = value.strip()
        if "/" in value:
            p, q = value.split("/")
            return _make_rational(int(p), int(q))
        return _make_rational(int(value))
    return _make_rational(value)


def format_rational(value) -> str:
    """Render a rational as "p/q", omitting "/1"."""
    s = str(value)
    return s[:-2] if s.endswith("/1") else s


class Field:
    """Protocol base for coefficient fields."""

    zero: Any
    one: Any

    def coerce(self, value: Any):
        raise NotImplementedError

    def contains(self, value: Any) -> bool:
        raise NotImplementedError


class RationalField(Field):
    """The field of arbitrary-precision rationals."""

    def __init__(self) -> None:
        self.zero = _make_rational(0)
        self.one = _make_rational(1)

    def coerce(self, value: Any):
        if isinstance(value, _COERCIBLE_TYPES):
            return _make_rational(value)
        if isinstance(value, str):
            return rational(value)
        try:
            from fractions import Fraction

            if isinstance(value, Fraction):
                return _make_rational(value.numerator, value.denominator)
        except ImportError:  # pragma: no cover
            pass
        raise TypeError(f"cannot coerce {value!r} into QQ")

    def contains(self, value: Any) -> bool:
        return isinstance(value, _RATIONAL_TYPES)

    def __repr__(self) -> str:
        return "QQ"


QQ = RationalField()
