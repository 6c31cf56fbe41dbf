"""Dense exact matrices over Q and Q(x).

Both matrix types are immutable row tuples; the heavy lifting is delegated to
:class:`sympy.polys.matrices.DomainMatrix`, which runs fraction-free Bareiss
elimination over ``ZZ`` (or FLINT when ``python-flint`` is installed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

from ..errors import AlgebraError, NotSquareError, SingularMatrixError
from .polynomials import X, RationalFunction, UniPoly, to_fraction

_QQX = QQ.frac_field(X)


def _check_rect(rows: Sequence[Sequence]) -> None:
    if not rows or not rows[0]:
        raise AlgebraError("matrix dimensions must be at least 1")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise AlgebraError("ragged matrix rows")


@dataclass(frozen=True)
class RatMatrix:
    rows: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def of(cls, rows: Sequence[Sequence]) -> "RatMatrix":
        _check_rect(rows)
        return cls(tuple(tuple(to_fraction(v) for v in r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls.of([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    @property
    def is_square(self) -> bool:
        r, c = self.shape
        return r == c

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMatrix":
        return RatMatrix.of([[self.rows[i][j] for j in cols] for i in rows])

    def minor(self, drop: int) -> "RatMatrix":
        """Principal submatrix with row and column ``drop`` removed."""
        keep = [i for i in range(self.shape[0]) if i != drop]
        return self.submatrix(keep, keep)

    def row_lcms(self) -> list[int]:
        return [math.lcm(*(v.denominator for v in r)) for r in self.rows]

    def integer_rows(self, scales: Sequence[int]) -> list[list[int]]:
        return [[int(v * s) for v in r] for r, s in zip(self.rows, scales)]

    def to_domain_matrix(self) -> DomainMatrix:
        r, c = self.shape
        return DomainMatrix([[QQ(v.numerator, v.denominator) for v in row] for row in self.rows], (r, c), QQ)


@dataclass(frozen=True)
class RatFuncMatrix:
    rows: tuple[tuple[RationalFunction, ...], ...]

    @classmethod
    def of(cls, rows: Sequence[Sequence]) -> "RatFuncMatrix":
        _check_rect(rows)
        out = []
        for r in rows:
            out.append(tuple(v if isinstance(v, RationalFunction) else RationalFunction.of(v) for v in r))
        return cls(tuple(out))

    @classmethod
    def from_rat(cls, m: RatMatrix, shift: RationalFunction | None = None) -> "RatFuncMatrix":
        """Lift a rational matrix, optionally subtracting ``shift`` on the diagonal."""
        rows = []
        for i, r in enumerate(m.rows):
            row = []
            for j, v in enumerate(r):
                entry = RationalFunction.constant(v)
                if shift is not None and i == j:
                    entry = entry - shift
                row.append(entry)
            rows.append(row)
        return cls.of(rows)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij: tuple[int, int]) -> RationalFunction:
        i, j = ij
        return self.rows[i][j]

    def to_domain_matrix(self) -> DomainMatrix:
        r, c = self.shape
        return DomainMatrix([[_QQX.from_sympy(v.as_expr()) for v in row] for row in self.rows], (r, c), _QQX)

    @classmethod
    def from_domain_matrix(cls, dm: DomainMatrix) -> "RatFuncMatrix":
        dm = dm.convert_to(_QQX)
        return cls.of(
            [[RationalFunction.from_expr(_QQX.to_sympy(v)) for v in row] for row in dm.to_list()]
        )

    def __matmul__(self, other: "RatFuncMatrix") -> "RatFuncMatrix":
        return RatFuncMatrix.from_domain_matrix(self.to_domain_matrix().matmul(other.to_domain_matrix()))

    def __sub__(self, other: "RatFuncMatrix") -> "RatFuncMatrix":
        if self.shape != other.shape:
            raise AlgebraError("shape mismatch")
        return RatFuncMatrix.of(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)]
        )


def det_fraction_free(m: RatMatrix) -> Fraction:
    """Exact determinant via Bareiss on the row-wise integer lift of ``m``."""
    if not m.is_square:
        raise NotSquareError(f"determinant of a {m.shape[0]}x{m.shape[1]} matrix")
    scales = m.row_lcms()
    n = m.shape[0]
    dm = DomainMatrix([[ZZ(v) for v in r] for r in m.integer_rows(scales)], (n, n), ZZ)
    return Fraction(int(dm.det()), math.prod(scales))


def char_poly(m: RatMatrix) -> UniPoly:
    """``det(m - x I)``; leading coefficient ``(-1)^n``."""
    if not m.is_square:
        raise NotSquareError(f"characteristic polynomial of a {m.shape[0]}x{m.shape[1]} matrix")
    n = m.shape[0]
    lift = math.lcm(*m.row_lcms())
    dm = DomainMatrix([[ZZ(v) for v in r] for r in m.integer_rows([lift] * n)], (n, n), ZZ)
    # det(xI - L*M) = L^n det((x/L)I - M)
    desc = [int(c) for c in dm.charpoly()]
    ascending = [Fraction(desc[n - i] * lift**i, lift**n) for i in range(n + 1)]
    sign = -1 if n % 2 else 1
    return UniPoly.from_coefficients([sign * c for c in ascending])


def solve_linear_ratfunc(m: RatFuncMatrix, b: RatFuncMatrix) -> RatFuncMatrix:
    """Exact ``X`` with ``m @ X == b`` over ``Q(x)``."""
    rows, cols = m.shape
    if rows != cols:
        raise NotSquareError(f"solve with a {rows}x{cols} system matrix")
    if b.shape[0] != rows:
        raise AlgebraError("right-hand side has the wrong number of rows")
    dm = m.to_domain_matrix()
    if _QQX.is_zero(dm.det()):
        raise SingularMatrixError("system matrix is singular over Q(x)")
    return RatFuncMatrix.from_domain_matrix(dm.lu_solve(b.to_domain_matrix()))
