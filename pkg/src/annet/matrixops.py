"""Dense matrices over an arbitrary coefficient field, with exact determinants.

Determinants use Gaussian elimination with exact division and first-nonzero
pivoting; sizes in this package stay small, so no fraction-free machinery
is needed on top of the canonical-form arithmetic of the entries.
"""

from __future__ import annotations

from typing import Any, Callable, Sequence

from .fields import Field, FieldError


class Matrix:
    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: Field, rows: int, cols: int, entries: Sequence[Any]):
        if rows < 0 or cols < 0 or len(entries) != rows * cols:
            raise ValueError("entry count does not match shape")
        self.field = field
        self.rows = rows
        self.cols = cols
        self.entries = tuple(e if field.contains(e) else field.coerce(e) for e in entries)

    @staticmethod
    def from_rows(field: Field, rows: Sequence[Sequence[Any]]) -> "Matrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        flat = [x for row in rows for x in row]
        return Matrix(field, r, c, flat)

    @staticmethod
    def identity(field: Field, n: int) -> "Matrix":
        return Matrix(field, n, n, [field.one if i == j else field.zero for i in range(n) for j in range(n)])

    @staticmethod
    def zero(field: Field, rows: int, cols: int) -> "Matrix":
        return Matrix(field, rows, cols, [field.zero] * (rows * cols))

    def __getitem__(self, rc: tuple[int, int]):
        r, c = rc
        return self.entries[r * self.cols + c]

    def row(self, r: int) -> tuple:
        return self.entries[r * self.cols : (r + 1) * self.cols]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Matrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols})"

    def __add__(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return Matrix(self.field, self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return Matrix(self.field, self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)])

    def __mul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        zero = self.field.zero
        out = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a = ri[k]
                    if a:
                        b = other[k, j]
                        if b:
                            acc = acc + a * b
                out.append(acc)
        return Matrix(self.field, self.rows, other.cols, out)

    def scale(self, c) -> "Matrix":
        c = c if self.field.contains(c) else self.field.coerce(c)
        return Matrix(self.field, self.rows, self.cols, [c * e for e in self.entries])

    def transpose(self) -> "Matrix":
        return Matrix(
            self.field, self.cols, self.rows, [self[r, c] for c in range(self.cols) for r in range(self.rows)]
        )

    def map(self, fn: Callable[[Any], Any], field: Field | None = None) -> "Matrix":
        return Matrix(field or self.field, self.rows, self.cols, [fn(e) for e in self.entries])

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "Matrix":
        ents = [self[r, c] for r in row_idx for c in col_idx]
        return Matrix(self.field, len(row_idx), len(col_idx), ents)

    def det(self):
        """Exact determinant; raises on non-square input."""
        if self.rows != self.cols:
            raise FieldError("determinant of non-square matrix")
        n = self.rows
        field = self.field
        a = [list(self.row(r)) for r in range(n)]
        det = field.one
        for col in range(n):
            pivot_row = next((r for r in range(col, n) if a[r][col]), None)
            if pivot_row is None:
                return field.zero
            if pivot_row != col:
                a[col], a[pivot_row] = a[pivot_row], a[col]
                det = -det
            pivot = a[col][col]
            det = det * pivot
            inv = field.one / pivot
            for r in range(col + 1, n):
                factor = a[r][col]
                if not factor:
                    continue
                factor = factor * inv
                for c in range(col, n):
                    a[r][c] = a[r][c] - factor * a[col][c]
        return det

    def inverse(self) -> "Matrix":
        if self.rows != self.cols:
            raise FieldError("inverse of non-square matrix")
        n = self.rows
        field = self.field
        a = [list(self.row(r)) + [field.one if i == r else field.zero for i in range(n)] for r in range(n)]
        for col in range(n):
            pivot_row = next((r for r in range(col, n) if a[r][col]), None)
            if pivot_row is None:
                raise FieldError("singular matrix")
            a[col], a[pivot_row] = a[pivot_row], a[col]
            inv = field.one / a[col][col]
            a[col] = [x * inv for x in a[col]]
            for r in range(n):
                if r == col or not a[r][col]:
                    continue
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return Matrix(field, n, n, [a[r][n + c] for r in range(n) for c in range(n)])
