"""Dual numbers a + b*eps (eps^2 = 0) over an arbitrary base field.

Used for exact forward-mode differentiation: rerun any computation with a
seed Dual(x, 1) in place of the input x and read the derivative off the
eps part.  Division is defined iff the value part of the divisor is
nonzero.
"""

from __future__ import annotations

from typing import Any

from .fields import Field, FieldError


class Dual:
    __slots__ = ("field", "a", "b")

    def __init__(self, field: "DualField", a, b):
        self.field = field
        self.a = a
        self.b = b

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Dual):
            return self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __repr__(self) -> str:
        return f"Dual({self.a!r}, {self.b!r})"

    def _co(self, other) -> "Dual":
        return other if isinstance(other, Dual) and other.field is self.field else self.field.coerce(other)

    def __add__(self, other) -> "Dual":
        o = self._co(other)
        return Dual(self.field, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> "Dual":
        return Dual(self.field, -self.a, -self.b)

    def __sub__(self, other) -> "Dual":
        o = self._co(other)
        return Dual(self.field, self.a - o.a, self.b - o.b)

    def __rsub__(self, other) -> "Dual":
        return self._co(other) - self

    def __mul__(self, other) -> "Dual":
        o = self._co(other)
        return Dual(self.field, self.a * o.a, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Dual":
        o = self._co(other)
        if not o.a:
            raise FieldError("dual division by zero value part")
        inv = self.field.base.one / o.a
        val = self.a * inv
        return Dual(self.field, val, (self.b - val * o.b) * inv)

    def __rtruediv__(self, other) -> "Dual":
        return self._co(other) / self

    def __pow__(self, k: int) -> "Dual":
        if k < 0:
            return (self.field.one / self) ** (-k)
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out


class DualField(Field):
    def __init__(self, base: Field):
        self.base = base
        self.zero = Dual(self, base.zero, base.zero)
        self.one = Dual(self, base.one, base.zero)
        self.eps = Dual(self, base.zero, base.one)

    def contains(self, value: Any) -> bool:
        return isinstance(value, Dual) and value.field is self

    def coerce(self, value: Any) -> Dual:
        if self.contains(value):
            return value
        v = value if self.base.contains(value) else self.base.coerce(value)
        return Dual(self, v, self.base.zero)

    def lift(self, value, derivative=None) -> Dual:
        v = value if self.base.contains(value) else self.base.coerce(value)
        d = self.base.zero if derivative is None else (
            derivative if self.base.contains(derivative) else self.base.coerce(derivative)
        )
        return Dual(self, v, d)

    def __repr__(self) -> str:
        return f"Dual[{self.base!r}]"
