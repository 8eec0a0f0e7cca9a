"""Small numeric helpers shared across modules.

Enclosures are carried as :class:`Ball` objects: a center and a radius, both
mpmath numbers.  Every quantity that is reported as certified comes with such a
radius so that downstream code can decide comparisons or escalate precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import mpmath
from mpmath import mp, mpc, mpf

DEFAULT_PRECISION = 256


class PrecisionExhausted(RuntimeError):
    """Raised when a decision cannot be made within the precision ceiling."""


@dataclass(frozen=True)
class Ball:
    """Closed disk ``|z - center| <= radius`` (an interval when real)."""

    center: Any
    radius: Any

    @property
    def is_real(self) -> bool:
        return not isinstance(self.center, mpc)

    @property
    def lower(self):
        return self.center - self.radius

    @property
    def upper(self):
        return self.center + self.radius

    def contains(self, x) -> bool:
        return abs(x - self.center) <= self.radius

    def overlaps(self, other: "Ball") -> bool:
        return abs(self.center - other.center) <= self.radius + other.radius

    def abs(self) -> "Ball":
        return Ball(abs(self.center), self.radius)

    def to_json(self, digits: int = 40) -> dict:
        if self.is_real:
            center: Any = mpmath.nstr(self.center, digits)
        else:
            center = {
                "re": mpmath.nstr(self.center.real, digits),
                "im": mpmath.nstr(self.center.imag, digits),
            }
        return {"center": center, "radius": mpmath.nstr(self.radius, 5)}

    def __float__(self) -> float:
        return float(self.center)


def ulp_radius(x, prec: int | None = None):
    """A few units in the last place of ``x`` at ``prec`` bits."""
    prec = prec or mp.prec
    return (abs(x) + 1) * mpf(2) ** (10 - prec)


def frac_ceil(x, denominator_bits: int = 64) -> Fraction:
    """A dyadic rational upper bound for the real ``x``."""
    scale = 1 << denominator_bits
    return Fraction(int(mpmath.ceil(x * scale)) + 1, scale)


def mod_turn(x):
    """Reduce ``x`` into ``[0, 1)``."""
    return x - mpmath.floor(x)


def reduce_angle(x):
    """Reduce ``x`` into ``(-pi, pi]``."""
    two_pi = 2 * mp.pi
    y = x - two_pi * mpmath.floor(x / two_pi)
    if y > mp.pi:
        y -= two_pi
    return y


def circle_distance(x):
    """Distance from ``x`` to the nearest multiple of ``2*pi``."""
    return abs(reduce_angle(x))


def big_int_str(n: int) -> str:
    return str(int(n))
