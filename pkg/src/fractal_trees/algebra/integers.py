"""Prime-factored integers and rationals with big-integer exponents.

Spanning-tree counts are carried in this form end to end; exponents grow
like ``m**n`` while the prime support stays tiny, so the full value is only
expanded on request and below a digit cap.
"""
from __future__ import annotations

import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from sympy import factorint, isprime

from ..errors import AlgebraError, ResourceCapExceeded

_LOG10_E = math.log10(math.e)


@contextmanager
def _unlimited_int_digits() -> Iterator[None]:
    # 3.11+ caps int <-> str conversions at 4300 digits
    if not hasattr(sys, "set_int_max_str_digits"):
        yield
        return
    previous = sys.get_int_max_str_digits()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(previous)


def int_to_decimal(value: int) -> str:
    with _unlimited_int_digits():
        return str(value)


def decimal_to_int(text: str) -> int:
    with _unlimited_int_digits():
        return int(text)


def _clean(exponents: Mapping[int, int]) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((int(p), int(e)) for p, e in exponents.items() if e != 0))


@dataclass(frozen=True)
class FactoredRational:
    """``sign * prod(p**e)`` with non-zero exponents of either sign."""

    exponents: tuple[tuple[int, int], ...] = ()
    sign: int = 1

    @classmethod
    def of(cls, exponents: Mapping[int, int], sign: int = 1) -> "FactoredRational":
        for p in exponents:
            if not isprime(p):
                raise AlgebraError(f"{p} is not prime")
        return cls(_clean(exponents), 1 if sign >= 0 else -1)

    @classmethod
    def one(cls) -> "FactoredRational":
        return cls()

    @classmethod
    def from_int(cls, value: int) -> "FactoredRational":
        return cls.from_fraction(Fraction(value))

    @classmethod
    def from_fraction(cls, value) -> "FactoredRational":
        value = Fraction(value)
        if value == 0:
            raise AlgebraError("zero has no factorization")
        exps: dict[int, int] = {}
        for p, e in factorint(abs(value.numerator)).items():
            exps[int(p)] = exps.get(int(p), 0) + int(e)
        for p, e in factorint(value.denominator).items():
            exps[int(p)] = exps.get(int(p), 0) - int(e)
        return cls(_clean(exps), 1 if value > 0 else -1)

    # --- views ------------------------------------------------------------
    def as_dict(self) -> dict[int, int]:
        return dict(self.exponents)

    def exponent(self, p: int) -> int:
        return self.as_dict().get(p, 0)

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.exponents]

    @property
    def is_integer(self) -> bool:
        return all(e > 0 for _, e in self.exponents)

    def log(self) -> float:
        """Natural log of the absolute value."""
        return math.fsum(e * math.log(p) for p, e in self.exponents)

    def log10(self) -> float:
        return self.log() * _LOG10_E

    def digits(self) -> int:
        """Decimal digits of the absolute value (integers only)."""
        if not self.exponents:
            return 1
        return int(math.floor(self.log10() + 1e-12)) + 1

    # --- arithmetic -------------------------------------------------------
    def __mul__(self, other: "FactoredRational") -> "FactoredRational":
        exps = self.as_dict()
        for p, e in other.exponents:
            exps[p] = exps.get(p, 0) + e
        return FactoredRational(_clean(exps), self.sign * other.sign)

    def __truediv__(self, other: "FactoredRational") -> "FactoredRational":
        return self * other.inverse()

    def inverse(self) -> "FactoredRational":
        return FactoredRational(tuple((p, -e) for p, e in self.exponents), self.sign)

    def __pow__(self, k: int) -> "FactoredRational":
        sign = self.sign if k % 2 else 1
        return FactoredRational(_clean({p: e * k for p, e in self.exponents}), sign)

    def __abs__(self) -> "FactoredRational":
        return FactoredRational(self.exponents, 1)

    # --- expansion --------------------------------------------------------
    def to_fraction(self, digit_cap: int | None = None) -> Fraction:
        if digit_cap is not None:
            num_digits = math.fsum(e * math.log10(p) for p, e in self.exponents if e > 0)
            den_digits = math.fsum(-e * math.log10(p) for p, e in self.exponents if e < 0)
            if max(num_digits, den_digits) > digit_cap:
                raise ResourceCapExceeded(f"expansion would exceed {digit_cap} digits")
        num = math.prod(p**e for p, e in self.exponents if e > 0)
        den = math.prod(p**-e for p, e in self.exponents if e < 0)
        return Fraction(self.sign * num, den)

    def __str__(self) -> str:
        if not self.exponents:
            return "-1" if self.sign < 0 else "1"
        body = " · ".join(f"{p}^{e}" for p, e in self.exponents)
        return f"-{body}" if self.sign < 0 else body


@dataclass(frozen=True)
class FactoredInteger(FactoredRational):
    """A positive-exponent :class:`FactoredRational`."""

    def __post_init__(self) -> None:
        if any(e <= 0 for _, e in self.exponents):
            raise AlgebraError("FactoredInteger exponents must be positive")

    @classmethod
    def from_rational(cls, value: FactoredRational) -> "FactoredInteger":
        if not value.is_integer:
            raise AlgebraError(f"{value} is not an integer")
        return cls(value.exponents, value.sign)

    def to_int(self, digit_cap: int | None = None) -> int:
        return int(self.to_fraction(digit_cap))

    def to_decimal(self, digit_cap: int | None = None) -> str:
        return int_to_decimal(self.to_int(digit_cap))
