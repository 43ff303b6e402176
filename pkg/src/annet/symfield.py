"""Sparse multivariate rational-function field for symbolic edge weights.

Backed by sympy's FracField (sparse distributed polynomials with fast
multivariate gcd), wrapped in this package's Field protocol so the
measurement engine runs over it unchanged.  The spectral variable is the
last generator; symbols come first in the order given.

The dense iterated tower in ratfunc.py implements the same field and is
used to cross-check this backend at small symbol counts, but its dense
recursive representation grows too fast past a handful of symbols.
"""

from __future__ import annotations

from typing import Any, Sequence

import sympy
from sympy.polys.fields import field as _sympy_field

from .fields import Field, rational


class SymbolicField(Field):
    """QQ(sym_1, ..., sym_k, lam) with sparse representation."""

    def __init__(self, symbols: Sequence[str], top_var: str = "lam"):
        names = list(symbols) + [top_var]
        frac, *gens = _sympy_field(names, sympy.QQ)
        self.frac = frac
        self.var = top_var
        self.symbols = tuple(symbols)
        self.gens = dict(zip(names, gens))
        self.gen = self.gens[top_var]
        self.zero = frac.zero
        self.one = frac.one

    def contains(self, value: Any) -> bool:
        return getattr(value, "field", None) is self.frac

    def coerce(self, value: Any):
        if self.contains(value):
            return value
        q = rational(value)
        return self.frac.ground_new(sympy.QQ(int(q.numerator), int(q.denominator)))

    def generator(self, name: str):
        return self.gens[name]

    def __repr__(self) -> str:
        return f"QQ({', '.join(self.symbols + (self.var,))})"
