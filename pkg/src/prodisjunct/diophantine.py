"""Heights, lower bounds for linear forms in logarithms, and rotation hits.

The last part is the computational workhorse: given an irrational rotation
``x -> x + beta`` of the circle, find the first iterate that lands in a short
arc.  It is solved exactly on a dyadic grid with a Euclid-like recursion, so
arcs of length ``1e-60`` are reached in a few hundred big-integer steps rather
than by scanning ``1e60`` candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import sympy
from mpmath import mp, mpf

from ._numeric import Ball, PrecisionExhausted, circle_distance
from .circle import CircleInterval
from .lrs_core import RootEnclosure, isolate_roots

__all__ = [
    "AlgebraicNumber",
    "MatveevInstance",
    "BoundConstants",
    "weil_height",
    "height_arith_bounds",
    "matveev_constant",
    "matveev_exponent",
    "matveev_log_lower",
    "circle_distance",
    "min_affine_hit",
    "orbit_first_hit",
    "rotation_hit",
]

_X = sympy.Symbol("X")


# --------------------------------------------------------------------------
# Algebraic numbers and heights


@dataclass(frozen=True)
class AlgebraicNumber:
    """A root of a primitive irreducible integer polynomial, pinned by a disk."""

    minpoly: tuple
    root: RootEnclosure

    @property
    def degree(self) -> int:
        return len(self.minpoly) - 1

    @property
    def value(self):
        return self.root.center

    @classmethod
    def from_minpoly(cls, coeffs, approx, precision: int = 128) -> "AlgebraicNumber":
        poly = sympy.Poly(list(coeffs), _X, domain="ZZ")
        if not poly.is_irreducible:
            raise ValueError("minimal polynomial must be irreducible")
        poly = poly.primitive()[1]
        if poly.LC() < 0:
            poly = -poly
        fc = tuple(int(c) for c in poly.all_coeffs())
        roots = isolate_roots(fc, precision)
        best = min(roots, key=lambda r: abs(r.center - approx))
        return cls(fc, best)

    @classmethod
    def from_rational(cls, q) -> "AlgebraicNumber":
        q = Fraction(q)
        return cls.from_minpoly((q.denominator, -q.numerator), float(q))

    @classmethod
    def from_expr(cls, expr, precision: int = 128) -> "AlgebraicNumber":
        """From an exact sympy expression such as ``(2 + I) / sqrt(5)``."""
        expr = sympy.sympify(expr)
        poly = sympy.Poly(sympy.minimal_polynomial(expr, _X), _X)
        approx = complex(sympy.N(expr, 30))
        return cls.from_minpoly(poly.all_coeffs(), approx, precision)


def weil_height(a: AlgebraicNumber) -> Ball:
    """Logarithmic Weil height from the minimal polynomial and its roots.

    ``h = (log|a_0| + sum log max(|alpha_i|, 1)) / deg`` with ``a_0`` the
    leading coefficient.  The value 0 has height 0.
    """
    if a.minpoly == (1, 0):
        return Ball(mpf(0), mpf(0))
    roots = isolate_roots(a.minpoly, 128)
    with mp.workprec(128):
        total = mpmath.log(abs(a.minpoly[0]))
        rad = mpf(0)
        for r in roots:
            m = abs(r.center)
            if m + r.radius > 1:
                total += mpmath.log(max(m, 1))
                rad += r.radius
        deg = a.degree
        return Ball(total / deg, rad / deg + mpf(2) ** -120)


def height_arith_bounds(op: str, inputs) -> mpf:
    """Upper bounds for heights of sums, products and powers.

    Parameters
    ----------
    op : {"sum", "product", "power"}
    inputs : sequence
        Heights of the operands; for ``"power"`` a pair ``(h, n)``.
    """
    if op == "sum":
        hs = [mpf(h) for h in inputs]
        return mpmath.log(len(hs)) + sum(hs) if hs else mpf(0)
    if op == "product":
        return sum((mpf(h) for h in inputs), mpf(0))
    if op == "power":
        h, n = inputs
        return abs(int(n)) * mpf(h)
    raise ValueError(f"unknown operation {op!r}")


# --------------------------------------------------------------------------
# Matveev's bound


@dataclass(frozen=True)
class MatveevInstance:
    """``Lambda = prod alpha_j^{b_j} - 1`` over a field of degree ``D``.

    ``heights`` and ``abs_logs`` may be given directly as upper bounds, which
    is how callers supply data for numbers whose minimal polynomial is not
    computed; otherwise they are derived from ``alphas``.
    """

    D: int
    alphas: tuple = ()
    exponents: tuple = ()
    heights: tuple | None = None
    abs_logs: tuple | None = None

    @property
    def M(self) -> int:
        return len(self.heights) if self.heights is not None else len(self.alphas)

    @property
    def B(self) -> int:
        return max((abs(int(b)) for b in self.exponents), default=0)

    def h_primes(self) -> list:
        if self.heights is not None:
            hs = [mpf(h) for h in self.heights]
            logs = [mpf(x) for x in self.abs_logs]
        else:
            hs = [weil_height(a).upper for a in self.alphas]
            logs = []
            for a in self.alphas:
                if a.value == 0:
                    raise ValueError("multiplicands must be nonzero")
                logs.append(abs(mpmath.log(a.value)))
        return [max(self.D * h, lg, mpf("0.16")) for h, lg in zip(hs, logs)]


def matveev_constant(inst: MatveevInstance) -> mpf:
    """``3 * 30^(M+4) (M+1)^5.5 D^2 (1 + log D) prod h'_j``."""
    M, D = inst.M, inst.D
    prod = mpf(1)
    for h in inst.h_primes():
        prod *= h
    return (
        3 * mpf(30) ** (M + 4) * mpf(M + 1) ** mpf(5.5)
        * mpf(D) ** 2 * (1 + mpmath.log(D)) * prod
    )


def matveev_log_lower(inst: MatveevInstance, B=None) -> mpf:
    """Lower bound on ``log|Lambda|`` valid whenever ``Lambda != 0``."""
    B = inst.B if B is None else B
    return -matveev_constant(inst) * (1 + mpmath.log(inst.M * max(int(B), 1)))


def matveev_exponent(inst: MatveevInstance) -> mpf:
    """An exponent ``c`` with ``|Lambda| > B^(-c)`` whenever ``Lambda != 0``.

    Valid for ``B >= 3``, where ``1 + log(M B) <= (2 + log M) log B``.  For
    ``B <= 2`` the bound degenerates (``B = 1`` gives only ``|Lambda| > 1``)
    and callers should use :func:`matveev_log_lower` instead.
    """
    return matveev_constant(inst) * (2 + mpmath.log(inst.M))


@dataclass
class BoundConstants:
    """Named constants used by a computation, each tagged with its provenance.

    ``mode`` is ``"rigorous"`` for values derived from proven inequalities and
    ``"surrogate"`` for per-instance empirical stand-ins; the recipe says how
    the value was obtained.
    """

    entries: dict = field(default_factory=dict)

    def add(self, name: str, value, mode: str, recipe: str) -> None:
        if mode not in ("rigorous", "surrogate"):
            raise ValueError(mode)
        self.entries[name] = {"value": str(value), "mode": mode, "recipe": recipe}

    def to_json(self) -> dict:
        return dict(self.entries)


# --------------------------------------------------------------------------
# Exact rotation hits on a dyadic grid


def _min_multiple_hit(a: int, m: int, lo: int, hi: int):
    """Least ``x >= 0`` with ``lo <= (a*x) mod m <= hi``, or ``None``.

    Requires ``0 <= lo <= hi < m``.  Each round either finds the answer
    directly, reflects ``a -> m - a`` so that ``a <= m/2``, or passes to the
    same problem modulo ``a``; the modulus at least halves every two rounds.
    """
    stack = []
    while True:
        a %= m
        if lo == 0:
            res = 0
            break
        if a == 0:
            return None
        x = -(-lo // a)
        if a * x <= hi:
            res = x
            break
        if 2 * a > m:
            a, lo, hi = m - a, m - hi, m - lo
            continue
        # a*x must land in [lo + m*k, hi + m*k] for some k >= 1; that asks for
        # (m*k) mod a in [(-hi) mod a, (-lo) mod a], which never wraps here.
        stack.append((m, lo, a))
        a, m, lo, hi = m % a, a, (-hi) % a, (-lo) % a
    for m_, lo_, a_ in reversed(stack):
        res = -(-(lo_ + m_ * res) // a_)
    return res


def min_affine_hit(a: int, b: int, m: int, lo: int, hi: int):
    """Least ``x >= 0`` with ``(a*x + b) mod m`` in the cyclic range ``[lo, hi]``.

    ``lo > hi`` denotes the wrapped range ``[lo, m) + [0, hi]``.
    """
    span = (hi - lo) % m
    lo_s = (lo - b) % m
    if lo_s + span < m:
        return _min_multiple_hit(a, m, lo_s, lo_s + span)
    first = _min_multiple_hit(a, m, lo_s, m - 1)
    second = _min_multiple_hit(a, m, 0, lo_s + span - m)
    cands = [x for x in (first, second) if x is not None]
    return min(cands) if cands else None


def orbit_first_hit(beta, offset, arc_lo, arc_width, k_min: int, k_max: int):
    """Least ``k`` in ``[k_min, k_max]`` with ``offset + k*beta`` in the arc.

    All angles are in turns (units of a full circle).  The arc is the open
    set ``(arc_lo, arc_lo + arc_width)`` modulo 1.  A dyadic grid with enough
    bits turns the question into :func:`min_affine_hit`; each candidate is
    re-checked at higher precision and false positives from grid rounding are
    skipped.

    Returns ``None`` when no ``k`` in the range lands in the arc.  Raises
    :class:`PrecisionExhausted` when the working precision is too low to
    resolve the arc over the requested range.
    """
    k_min, k_max = int(k_min), int(k_max)
    if k_max < k_min or arc_width <= 0:
        return None
    span = k_max - k_min
    width_bits = max(0, int(-mpmath.floor(mpmath.log(arc_width, 2))))
    P = span.bit_length() + width_bits + 24
    if P + 16 > mp.prec:
        raise PrecisionExhausted(
            f"need about {P + 16} bits to resolve the arc over {span} steps"
        )
    m = 1 << P
    with mp.workprec(mp.prec + 32):
        beta_f = beta % 1
        A = int(mpmath.floor(beta_f * m))
        start = k_min
        while start <= k_max:
            j_span = k_max - start
            base = (offset + start * beta_f - arc_lo) % 1
            Bv = int(mpmath.floor(base * m))
            W = int(mpmath.ceil(arc_width * m))
            # the exact position lies in [Bv + j*A, Bv + j*A + j + 1) on the
            # grid; one more unit absorbs rounding in Bv
            lo = (m - (j_span + 2)) % m
            j = min_affine_hit(A, Bv, m, lo, W)
            if j is None or j > j_span:
                return None
            k = start + j
            pos = (offset + k * beta_f - arc_lo) % 1
            if 0 < pos < arc_width:
                return k
            start = k + 1
    return None


def rotation_hit(theta, phi, I: CircleInterval, T: int, t: int, n_min: int = 0,
                 max_index: int | None = None) -> int:
    """Smallest ``n >= n_min`` with ``n = t (mod T)`` and ``n*theta + phi`` in ``I``.

    Parameters
    ----------
    theta, phi : mpf or Ball
        Rotation angle and phase in radians.  Their precision must comfortably
        exceed ``log2(n / |I|)`` bits.
    I : CircleInterval
        Target arc, nonempty.
    T, t : int
        Residue class of the returned index.
    n_min : int
        Lower bound on the index.
    max_index : int, optional
        Give up beyond this index.

    Raises
    ------
    PrecisionExhausted
        The arc is too short for the current precision.
    LookupError
        No hit up to ``max_index``.
    """
    theta = theta.center if isinstance(theta, Ball) else theta
    phi = phi.center if isinstance(phi, Ball) else phi
    if I.is_empty:
        raise ValueError("target arc is empty")
    T, t = int(T), int(t) % int(T)
    two_pi = 2 * mp.pi
    beta = (T * theta) / two_pi
    off = (t * theta + phi) / two_pi
    lo = I.lo / two_pi
    width = I.length / two_pi
    k_min = max(0, -(-(int(n_min) - t) // T))
    k_cap = None if max_index is None else (int(max_index) - t) // T
    span = 1 << max(8, int(mpmath.ceil(mpmath.log(64 / width, 2))))
    while True:
        k_max = k_min + span
        if k_cap is not None:
            k_max = min(k_max, k_cap)
        k = orbit_first_hit(beta, off, lo, width, k_min, k_max)
        if k is not None:
            return t + T * k
        if k_cap is not None and k_max >= k_cap:
            raise LookupError("no hit below max_index")
        k_min = k_max + 1
        span *= 4
