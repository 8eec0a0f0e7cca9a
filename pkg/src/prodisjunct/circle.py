"""Arcs of the circle R / 2*pi*Z."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf

from ._numeric import reduce_angle


@dataclass(frozen=True)
class CircleInterval:
    """Open arc running counter-clockwise from ``lo`` for ``length`` radians.

    ``slack`` is the certified error on each endpoint.  Membership answers
    ``True`` or ``False`` only when the point is farther than ``slack`` from
    both endpoints and returns ``None`` otherwise.
    """

    lo: mpf
    length: mpf
    slack: mpf = mpf(0)

    @classmethod
    def from_endpoints(cls, a, b, slack=0) -> "CircleInterval":
        """The arc from ``a`` counter-clockwise to ``b``."""
        length = (b - a) % (2 * mp.pi)
        return cls(reduce_angle(a), length, mpf(slack))

    @classmethod
    def empty(cls) -> "CircleInterval":
        return cls(mpf(0), mpf(0), mpf(0))

    @property
    def hi(self):
        return reduce_angle(self.lo + self.length)

    @property
    def is_empty(self) -> bool:
        return self.length <= 0

    @property
    def midpoint(self):
        return reduce_angle(self.lo + self.length / 2)

    def offset_of(self, x):
        """Counter-clockwise distance from ``lo`` to ``x`` in ``[0, 2*pi)``."""
        return (x - self.lo) % (2 * mp.pi)

    def contains(self, x):
        if self.is_empty:
            return False
        off = self.offset_of(x)
        two_pi = 2 * mp.pi
        s = self.slack
        if s < off < self.length - s:
            return True
        if self.length + s < off < two_pi - s:
            return False
        return None

    def contains_arc(self, other: "CircleInterval"):
        """Certified ``other`` is a subset of this arc (``None`` when unsure)."""
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        start = self.offset_of(other.lo)
        s = self.slack + other.slack
        if start > 2 * mp.pi - s:
            start -= 2 * mp.pi
        end = start + other.length
        if start > s and end < self.length - s:
            return True
        if start < -s or end > self.length + s:
            return False
        return None

    def meets(self, other: "CircleInterval"):
        """Certified nonempty intersection (``None`` when unsure)."""
        if self.is_empty or other.is_empty:
            return False
        s = self.slack + other.slack
        a = self.offset_of(other.lo)
        two_pi = 2 * mp.pi
        # other starts inside self, or self starts inside other
        b = other.offset_of(self.lo)
        if (a < self.length - s) or (b < other.length - s):
            return True
        if (self.length + s < a < two_pi - s) and (other.length + s < b < two_pi - s):
            return False
        return None

    def subarc(self, start_offset, length) -> "CircleInterval":
        return CircleInterval(reduce_angle(self.lo + start_offset), mpf(length), self.slack)

    def widen(self, by) -> "CircleInterval":
        return CircleInterval(reduce_angle(self.lo - by), self.length + 2 * by, self.slack)

    def to_json(self, digits: int | None = None) -> dict:
        digits = digits or mp.dps + 5
        return {
            "lo": mpmath.nstr(self.lo, digits),
            "hi": mpmath.nstr(self.hi, digits),
            "length": mpmath.nstr(self.length, digits),
            "slack": mpmath.nstr(self.slack, 5),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CircleInterval":
        return cls(mpf(data["lo"]), mpf(data["length"]), mpf(data.get("slack", 0)))
