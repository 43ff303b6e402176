"""Dense univariate polynomials over an arbitrary coefficient field.

A polynomial is an immutable coefficient tuple, lowest degree first, with a
nonzero leading coefficient (the zero polynomial has an empty tuple).  The
coefficient field is carried on the instance so that the same code runs
over rationals, iterated function fields and dual numbers.

gcd uses a content-managed Euclidean remainder sequence: every remainder is
rescaled (made primitive over the rationals, monic over extension fields)
before the next division, which keeps coefficient growth tame at the sizes
this package works with.
"""

from __future__ import annotations

from typing import Any, Iterable, Sequence

from .fields import Field, FieldError, QQ


class Poly:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: Field, coeffs: Iterable[Any], *, trusted: bool = False):
        self.field = field
        if trusted:
            self.coeffs = tuple(coeffs)
        else:
            cs = [field.coerce(c) if not field.contains(c) else c for c in coeffs]
            while cs and not cs[-1]:
                cs.pop()
            self.coeffs = tuple(cs)

    # -- constructors ---------------------------------------------------

    @staticmethod
    def const(field: Field, c) -> "Poly":
        c = field.coerce(c) if not field.contains(c) else c
        return Poly(field, (c,) if c else ())

    @staticmethod
    def zero(field: Field) -> "Poly":
        return Poly(field, (), trusted=True)

    @staticmethod
    def one(field: Field) -> "Poly":
        return Poly(field, (field.one,), trusted=True)

    @staticmethod
    def gen(field: Field) -> "Poly":
        return Poly(field, (field.zero, field.one), trusted=True)

    # -- basic structure -------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lc(self):
        if not self.coeffs:
            raise FieldError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)})"

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        cs = list(a)
        for i, c in enumerate(b):
            cs[i] = cs[i] + c
        while cs and not cs[-1]:
            cs.pop()
        return Poly(self.field, cs, trusted=True)

    def __neg__(self) -> "Poly":
        return Poly(self.field, tuple(-c for c in self.coeffs), trusted=True)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly.zero(self.field)
        zero = self.field.zero
        cs = [zero] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, bj in enumerate(b):
                if bj:
                    cs[i + j] = cs[i + j] + ai * bj
        while cs and not cs[-1]:
            cs.pop()
        return Poly(self.field, cs, trusted=True)

    def scale(self, c) -> "Poly":
        if not c:
            return Poly.zero(self.field)
        return Poly(self.field, tuple(a * c for a in self.coeffs), trusted=True)

    def shift(self, k: int) -> "Poly":
        """Multiply by x^k (k >= 0)."""
        if not self.coeffs:
            return self
        return Poly(self.field, (self.field.zero,) * k + self.coeffs, trusted=True)

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if not other:
            raise FieldError("polynomial division by zero")
        field = self.field
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly.zero(field), self
        inv_lc = field.one / other.lc
        quo = [field.zero] * (dq + 1)
        oc = other.coeffs
        for k in range(dq, -1, -1):
            top = rem[k + len(oc) - 1]
            if not top:
                continue
            q = top * inv_lc
            quo[k] = q
            for i, c in enumerate(oc):
                rem[k + i] = rem[k + i] - q * c
        while rem and not rem[-1]:
            rem.pop()
        return Poly(field, quo, trusted=False), Poly(field, rem, trusted=True)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    # -- normal forms ----------------------------------------------------

    def monic(self) -> "Poly":
        if not self:
            return self
        lc = self.lc
        if lc == self.field.one:
            return self
        return self.scale(self.field.one / lc)

    def primitive(self) -> "Poly":
        """Strip rational content (QQ base) or make monic (other fields)."""
        if not self:
            return self
        if self.field is QQ:
            num_gcd = 0
            den_lcm = 1
            for c in self.coeffs:
                num_gcd = _igcd(num_gcd, int(c.numerator))
                den_lcm = _ilcm(den_lcm, int(c.denominator))
            scale = QQ.coerce(den_lcm) / QQ.coerce(num_gcd)
            if self.lc < 0:
                scale = -scale
            return self.scale(scale)
        return self.monic()

    def derivative(self) -> "Poly":
        cs = [c * self.field.coerce(i) for i, c in enumerate(self.coeffs) if i > 0]
        return Poly(self.field, cs)

    def eval(self, x):
        acc = self.field.zero
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def map_coeffs(self, target_field: Field, fn) -> "Poly":
        return Poly(target_field, [fn(c) for c in self.coeffs])

    def valuation(self) -> int:
        """Index of the lowest nonzero coefficient (0 for the zero poly)."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return 0


def _igcd(a: int, b: int) -> int:
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def _ilcm(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return a // _igcd(a, b) * b


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd via a content-managed Euclidean remainder sequence."""
    while b:
        a, b = b, (a % b)
        if b:
            b = b.primitive()
    if not a:
        return a
    return a.monic()


def poly_from_coeffs(field: Field, coeffs: Sequence[Any]) -> Poly:
    return Poly(field, coeffs)
