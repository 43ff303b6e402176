"""Univariate rational function fields, iterable into towers.

``FunctionField(base, var)`` is the field of fractions of base[var].  Its
elements (``RatFunc``) are kept in a canonical form: numerator and
denominator coprime, denominator monic.  Two elements represent the same
function iff they are structurally equal, which is what makes the exact
equality assertions throughout the test suite meaningful.

Negative powers of the variable are ordinary elements with denominator
x^k, so Laurent-style values need no separate representation.

Towers: symbolic edge weights are handled by iterating the construction,
``FunctionField(FunctionField(QQ, "w1"), "w2")`` and so on, with the
spectral variable as the outermost level.  ``tower`` builds such a chain
from a list of symbol names.
"""

from __future__ import annotations

from typing import Any

from .fields import Field, FieldError, QQ
from .poly import Poly, poly_gcd


class RatFunc:
    __slots__ = ("field", "num", "den")

    def __init__(self, field: "FunctionField", num: Poly, den: Poly, *, canonical: bool = False):
        if not den:
            raise FieldError("division by zero polynomial")
        if not canonical:
            num, den = _normalize(num, den)
        self.field = field
        self.num = num
        self.den = den

    # -- structure ---------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.num)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RatFunc):
            return self.num == other.num and self.den == other.den
        if isinstance(other, int):
            return self == self.field.coerce(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"RatFunc({self.num.coeffs}/{self.den.coeffs} in {self.field.var})"

    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    # -- arithmetic ----------------------------------------------------------

    def _co(self, other) -> "RatFunc":
        return other if isinstance(other, RatFunc) and other.field is self.field else self.field.coerce(other)

    def __add__(self, other) -> "RatFunc":
        o = self._co(other)
        if self.den == o.den:
            return RatFunc(self.field, self.num + o.num, self.den)
        return RatFunc(self.field, self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(self.field, -self.num, self.den, canonical=True)

    def __sub__(self, other) -> "RatFunc":
        return self + (-self._co(other))

    def __rsub__(self, other) -> "RatFunc":
        return self._co(other) - self

    def __mul__(self, other) -> "RatFunc":
        o = self._co(other)
        return RatFunc(self.field, self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFunc":
        o = self._co(other)
        if not o.num:
            raise FieldError("division by zero")
        return RatFunc(self.field, self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other) -> "RatFunc":
        return self._co(other) / self

    def __pow__(self, k: int) -> "RatFunc":
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

    # -- calculus and substitution -----------------------------------------

    def derivative(self) -> "RatFunc":
        n, d = self.num, self.den
        return RatFunc(self.field, n.derivative() * d - n * d.derivative(), d * d)

    def eval(self, x):
        """Exact value at a base-field point; raises on poles."""
        base = self.field.base
        x = base.coerce(x) if not base.contains(x) else x
        dv = self.den.eval(x)
        if not dv:
            raise FieldError("evaluation at pole")
        return self.num.eval(x) / dv

    def subst_scale(self, c) -> "RatFunc":
        """Substitute x -> c*x for a nonzero base-field constant c."""
        base = self.field.base
        c = base.coerce(c)
        if not c:
            raise FieldError("scale by zero")

        def scaled(p: Poly) -> Poly:
            power = base.one
            cs = []
            for coeff in p.coeffs:
                cs.append(coeff * power)
                power = power * c
            return Poly(base, cs)

        return RatFunc(self.field, scaled(self.num), scaled(self.den))

    def subst_invert(self) -> "RatFunc":
        """Substitute x -> 1/x exactly."""
        n, d = self.num, self.den
        k = max(n.degree, d.degree, 0)
        rev_n = Poly(self.field.base, list(reversed(n.coeffs))).shift(k - n.degree if n else 0)
        rev_d = Poly(self.field.base, list(reversed(d.coeffs))).shift(k - d.degree)
        if not n:
            return self.field.zero
        return RatFunc(self.field, rev_n, rev_d)

    def to_obj(self):
        """JSON-friendly form: coefficient lists, lowest degree first."""
        from .fields import format_rational

        def conv(c):
            return c.to_obj() if isinstance(c, RatFunc) else format_rational(c)

        return {
            "var": self.field.var,
            "num": [conv(c) for c in self.num.coeffs],
            "den": [conv(c) for c in self.den.coeffs],
        }


def _normalize(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if not num:
        return num, Poly.one(den.field)
    g = poly_gcd(num, den)
    if g.degree > 0:
        num = num // g
        den = den // g
    lc = den.lc
    if lc != den.field.one:
        inv = den.field.one / lc
        num = num.scale(inv)
        den = den.scale(inv)
    return num, den


class FunctionField(Field):
    """Field of univariate rational functions over ``base`` in variable ``var``."""

    def __init__(self, base: Field, var: str):
        self.base = base
        self.var = var
        self.zero = RatFunc(self, Poly.zero(base), Poly.one(base), canonical=True)
        self.one = RatFunc(self, Poly.one(base), Poly.one(base), canonical=True)
        self.gen = RatFunc(self, Poly.gen(base), Poly.one(base), canonical=True)

    def contains(self, value: Any) -> bool:
        return isinstance(value, RatFunc) and value.field is self

    def coerce(self, value: Any) -> RatFunc:
        if self.contains(value):
            return value
        if isinstance(value, Poly) and value.field is self.base:
            return RatFunc(self, value, Poly.one(self.base), canonical=True)
        base_val = self.base.coerce(value) if not self.base.contains(value) else value
        return RatFunc(self, Poly.const(self.base, base_val), Poly.one(self.base), canonical=True)

    def from_num_den(self, num_coeffs, den_coeffs) -> RatFunc:
        return RatFunc(self, Poly(self.base, num_coeffs), Poly(self.base, den_coeffs))

    def monomial(self, coeff, power: int) -> RatFunc:
        """coeff * x^power for any integer power."""
        c = self.base.coerce(coeff) if not self.base.contains(coeff) else coeff
        if power >= 0:
            return RatFunc(self, Poly.const(self.base, c).shift(power), Poly.one(self.base))
        return RatFunc(self, Poly.const(self.base, c), Poly.one(self.base).shift(-power))

    def __repr__(self) -> str:
        return f"{self.base!r}({self.var})"


def tower(symbols: list[str], top_var: str = "lam") -> tuple[FunctionField, dict[str, RatFunc]]:
    """Build QQ(sym_1)...(sym_k)(top_var); returns the field and generators.

    The generator map contains each symbol and the top variable, all coerced
    into the top field so they can be combined freely.
    """
    field: Field = QQ
    gens_raw: dict[str, Any] = {}
    for name in symbols:
        field = FunctionField(field, name)
        gens_raw[name] = field.gen
    top = FunctionField(field, top_var)
    gens: dict[str, RatFunc] = {}
    for name, g in gens_raw.items():
        lifted = g
        chain: list[FunctionField] = []
        f = top
        while isinstance(f, FunctionField) and f is not getattr(lifted, "field", None):
            chain.append(f)
            f = f.base
        for f in reversed(chain):
            lifted = f.coerce(lifted)
        gens[name] = lifted
    gens[top_var] = top.gen
    return top, gens
