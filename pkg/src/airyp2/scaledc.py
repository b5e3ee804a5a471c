"""Scaled complex numbers: value = mantissa * 10**exp10, |mantissa| in [1, 10).

Hankel determinants of smooth kernels grow/shrink far beyond binary64 range,
so determinant-valued quantities are carried in this form and only collapsed
to plain complex for well-conditioned ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ScaledComplex:
    """A complex value ``mantissa * 10**exp10`` with normalized mantissa."""

    mantissa: complex
    exp10: int = 0

    @staticmethod
    def of(value: complex, exp10: int = 0) -> "ScaledComplex":
        """Build a normalized ScaledComplex from ``value * 10**exp10``."""
        value = complex(value)
        if value == 0:
            return ScaledComplex(0j, 0)
        shift = math.floor(math.log10(abs(value)))
        return ScaledComplex(value / 10.0**shift, exp10 + shift)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    def to_complex(self) -> complex:
        """Collapse to plain complex; raises OverflowError out of range."""
        if self.is_zero:
            return 0j
        if self.exp10 > 300:
            raise OverflowError(f"scaled value 10**{self.exp10} exceeds binary64 range")
        if self.exp10 < -300:
            return 0j
        return self.mantissa * 10.0**self.exp10

    def log10_abs(self) -> float:
        if self.is_zero:
            return -math.inf
        return math.log10(abs(self.mantissa)) + self.exp10

    def __mul__(self, other):
        if isinstance(other, ScaledComplex):
            return ScaledComplex.of(self.mantissa * other.mantissa, self.exp10 + other.exp10)
        return ScaledComplex.of(self.mantissa * other, self.exp10)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ScaledComplex):
            if other.is_zero:
                raise ZeroDivisionError("division by zero ScaledComplex")
            return ScaledComplex.of(self.mantissa / other.mantissa, self.exp10 - other.exp10)
        return ScaledComplex.of(self.mantissa / other, self.exp10)

    def __neg__(self):
        return ScaledComplex(-self.mantissa, self.exp10)

    def __add__(self, other):
        if not isinstance(other, ScaledComplex):
            other = ScaledComplex.of(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.exp10 < other.exp10:
            self, other = other, self
        shift = other.exp10 - self.exp10
        if shift < -320:
            return self
        return ScaledComplex.of(self.mantissa + other.mantissa * 10.0**shift, self.exp10)

    def __sub__(self, other):
        if not isinstance(other, ScaledComplex):
            other = ScaledComplex.of(other)
        return self + (-other)

    def ratio(self, other: "ScaledComplex") -> complex:
        """self / other as a plain complex; the usual path to log-derivatives."""
        return (self / other).to_complex()
