"""Exact rational angles on the circle R/Z."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True, order=True)
class ExactAngle:
    """Angle ``num/den`` mod 1, always stored reduced with ``0 <= num < den``."""

    num: int
    den: int

    def __post_init__(self):
        if self.den < 1:
            raise ValueError(f"denominator must be positive, got {self.den}")
        num = self.num % self.den
        g = math.gcd(num, self.den)
        object.__setattr__(self, "num", num // g)
        object.__setattr__(self, "den", self.den // g)

    @classmethod
    def parse(cls, text: str) -> "ExactAngle":
        """Parse ``"p/q"`` (or a bare integer). Decimal angles are rejected."""
        text = text.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"angle must be an exact fraction p/q, got {text!r}")
        if "/" in text:
            p, q = text.split("/", 1)
            return cls(int(p), int(q))
        return cls(int(text), 1)

    @classmethod
    def from_fraction(cls, f: Fraction) -> "ExactAngle":
        return cls(f.numerator, f.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def double(self, times: int = 1) -> "ExactAngle":
        return ExactAngle(self.num * pow(2, times, self.den), self.den)

    def halves(self) -> tuple["ExactAngle", "ExactAngle"]:
        """The two preimages under doubling: t/2 and (t+1)/2."""
        return ExactAngle(self.num, 2 * self.den), ExactAngle(self.num + self.den, 2 * self.den)

    def conjugate(self) -> "ExactAngle":
        return ExactAngle(-self.num, self.den)

    def unit(self) -> complex:
        """exp(2 pi i t), evaluated so that t and 1-t give exact conjugates."""
        num = self.num
        if 2 * num > self.den:
            num -= self.den
        x = 2.0 * math.pi * num / self.den
        return complex(math.cos(x), math.sin(x))

    def polar(self, log_modulus: float) -> complex:
        return math.exp(log_modulus) * self.unit()

    def __float__(self) -> float:
        return self.num / self.den

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


def doubling_orbit(t: ExactAngle) -> tuple[list[ExactAngle], int, int]:
    """Orbit of t under doubling until the first repeat.

    Returns (orbit, preperiod, period) where orbit has preperiod + period
    distinct entries.
    """
    seen: dict[ExactAngle, int] = {}
    orbit: list[ExactAngle] = []
    x = t
    while x not in seen:
        seen[x] = len(orbit)
        orbit.append(x)
        x = x.double()
    pre = seen[x]
    return orbit, pre, len(orbit) - pre
