"""Integer linear recurrences: evaluation, roots, classification, decomposition.

A recurrence ``u_{n+d} = c_1 u_{n+d-1} + ... + c_d u_n`` is stored as a
:class:`Recurrence` holding the coefficients and the initial terms.  The
functions here evaluate terms exactly, isolate the characteristic roots with
certified disks, decide whether the sequence has exactly two dominant complex
conjugate roots (the *admissible* case), and split the sequence into its
dominant part ``v_n = cos(n*theta + phi) |lambda|^n`` (after scaling) and a
remainder bounded by ``r * R**n``.

Examples
--------
>>> rec = Recurrence((6, -13, 10), (2, 4, 7))
>>> [eval_term(rec, n) for n in range(3, 8)]
[10, 9, -6, -53, -150]
>>> str(char_poly(rec))
'X^3 - 6*X^2 + 13*X - 10'
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath
import sympy
from mpmath import mp, mpc, mpf

from ._numeric import DEFAULT_PRECISION, Ball, PrecisionExhausted, frac_ceil

__all__ = [
    "Recurrence",
    "CharPoly",
    "RootEnclosure",
    "ClassificationReport",
    "DominantDecomposition",
    "ModularCycle",
    "NonMinimalRecurrence",
    "NotAdmissible",
    "InseparableModuli",
    "eval_term",
    "terms",
    "char_poly",
    "isolate_roots",
    "classify",
    "dominant_decomposition",
    "modular_sequence",
]

_X = sympy.Symbol("X")
_Y = sympy.Symbol("Y")
MAX_PRECISION = 1 << 14


class NonMinimalRecurrence(ValueError):
    """The initial terms satisfy a recurrence of smaller order."""


class NotAdmissible(ValueError):
    """The recurrence does not have exactly two simple conjugate dominant roots."""


class InseparableModuli(RuntimeError):
    """Root moduli could not be separated or proven equal."""


# --------------------------------------------------------------------------
# Recurrence data


def _hankel_rank_full(values: Sequence[int], d: int) -> bool:
    """True when the d x d Hankel matrix of ``values`` is nonsingular.

    Uses fraction-free (Bareiss) elimination so everything stays in integers.
    """
    a = [[values[i + j] for j in range(d)] for i in range(d)]
    prev = 1
    for k in range(d):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, d) if a[i][k] != 0), None)
            if swap is None:
                return False
            a[k], a[swap] = a[swap], a[k]
        for i in range(k + 1, d):
            for j in range(k + 1, d):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return a[d - 1][d - 1] != 0


@dataclass(frozen=True)
class Recurrence:
    """Integer linear recurrence with its initial terms.

    Parameters
    ----------
    coeffs : sequence of int
        ``c_1, ..., c_d`` with ``c_d != 0``.
    initials : sequence of int
        ``u_0, ..., u_{d-1}``.
    check_minimal : bool
        Reject input whose terms satisfy a shorter recurrence.
    """

    coeffs: tuple
    initials: tuple
    check_minimal: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        initials = tuple(int(u) for u in self.initials)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "initials", initials)
        if not coeffs:
            raise ValueError("a recurrence needs at least one coefficient")
        if len(initials) != len(coeffs):
            raise ValueError(
                f"expected {len(coeffs)} initial terms, got {len(initials)}"
            )
        if coeffs[-1] == 0:
            raise ValueError("the last coefficient c_d must be nonzero")
        if self.check_minimal:
            d = len(coeffs)
            if not _hankel_rank_full(self.prefix(2 * d - 1), d):
                raise NonMinimalRecurrence(
                    "initial terms satisfy a recurrence of order < "
                    f"{d}; supply the minimal relation"
                )

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def prefix(self, count: int) -> list[int]:
        """The first ``count`` terms as a list."""
        out = list(self.initials[:count])
        d = self.order
        c = self.coeffs
        while len(out) < count:
            out.append(sum(c[i] * out[-1 - i] for i in range(d)))
        return out

    @classmethod
    def from_json(cls, data) -> "Recurrence":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        try:
            coeffs = [int(c) for c in data["coeffs"]]
            initials = [int(u) for u in data["initials"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed recurrence: {exc}") from exc
        return cls(tuple(coeffs), tuple(initials))

    def to_json(self) -> dict:
        return {
            "coeffs": [str(c) for c in self.coeffs],
            "initials": [str(u) for u in self.initials],
        }


def terms(rec: Recurrence, start: int = 0) -> Iterator[int]:
    """Yield ``u_start, u_{start+1}, ...`` exactly."""
    d = rec.order
    c = rec.coeffs
    window = [eval_term(rec, start + i) for i in range(d)]
    while True:
        yield window[0]
        nxt = sum(c[i] * window[d - 1 - i] for i in range(d))
        window = window[1:] + [nxt]


def _polymulmod(a: list[int], b: list[int], coeffs: tuple) -> list[int]:
    """Product of two residues modulo ``X^d - c_1 X^{d-1} - ... - c_d``.

    Polynomials are coefficient lists, lowest degree first, of length d.
    """
    d = len(coeffs)
    prod = [0] * (2 * d - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    for k in range(2 * d - 2, d - 1, -1):
        t = prod[k]
        if t:
            prod[k] = 0
            for i in range(1, d + 1):
                prod[k - i] += t * coeffs[i - 1]
    return prod[:d]


def eval_term(rec: Recurrence, n: int) -> int:
    """Exact ``u_n``.

    Small indices are iterated directly; large ones use ``X^n mod F(X)`` by
    repeated squaring, so the cost grows like ``log n`` polynomial products.
    """
    n = int(n)
    if n < 0:
        raise ValueError("index must be nonnegative")
    d = rec.order
    if n < d:
        return rec.initials[n]
    if n < 512:
        return rec.prefix(n + 1)[n]
    if d == 1:
        return rec.initials[0] * rec.coeffs[0] ** n
    result = [1] + [0] * (d - 1)
    base = [0, 1] + [0] * (d - 2)
    e = n
    while e:
        if e & 1:
            result = _polymulmod(result, base, rec.coeffs)
        e >>= 1
        if e:
            base = _polymulmod(base, base, rec.coeffs)
    return sum(r * u for r, u in zip(result, rec.initials))


# --------------------------------------------------------------------------
# Characteristic polynomial and roots


@dataclass(frozen=True)
class CharPoly:
    """Monic integer polynomial, coefficients from the leading one down."""

    coeffs: tuple

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def as_sympy(self) -> sympy.Poly:
        return sympy.Poly(list(self.coeffs), _X, domain="ZZ")

    def __str__(self) -> str:
        return str(self.as_sympy().as_expr()).replace("**", "^")


def char_poly(rec: Recurrence) -> CharPoly:
    """``F(X) = X^d - c_1 X^{d-1} - ... - c_d``."""
    return CharPoly((1,) + tuple(-c for c in rec.coeffs))


@dataclass(frozen=True)
class RootEnclosure:
    """A certified disk holding exactly one root of the polynomial.

    ``exact`` holds the root as a :class:`fractions.Fraction` when it is
    rational; ``factor`` is the irreducible integer factor it belongs to.
    """

    ball: Ball
    multiplicity: int
    exact: Fraction | None
    factor: tuple

    @property
    def center(self):
        return self.ball.center

    @property
    def radius(self):
        return self.ball.radius

    @property
    def is_real(self) -> bool:
        """The root is real (certified: conjugation maps the disk to itself)."""
        if self.exact is not None:
            return True
        # An irreducible real polynomial has conjugate-symmetric roots; a disk
        # holding exactly one root that meets its mirror image holds a real one.
        return abs(self.center.imag) <= self.radius

    def to_json(self) -> dict:
        out = self.ball.to_json()
        out["multiplicity"] = self.multiplicity
        out["exact"] = None if self.exact is None else str(self.exact)
        return out


def _poly_coeffs(poly) -> list[int]:
    if isinstance(poly, CharPoly):
        return list(poly.coeffs)
    if isinstance(poly, sympy.Poly):
        return [int(c) for c in poly.all_coeffs()]
    return [int(c) for c in poly]


def _newton_disks(coeffs: list[int], prec: int) -> list[tuple]:
    """Approximate roots with inclusion radii ``m |g(z)/g'(z)|``.

    For a polynomial of degree m, the disk of that radius around any z holds a
    root.  Radii get a rounding allowance on top.
    """
    m = len(coeffs) - 1
    with mp.workprec(prec + 32):
        try:
            approx = mpmath.polyroots(coeffs, maxsteps=400, extraprec=prec)
        except mpmath.libmp.NoConvergence:
            return []
        deriv = [c * (m - i) for i, c in enumerate(coeffs[:-1])]
        out = []
        slack = mpf(2) ** (-prec + 8)
        for z in approx:
            z = mpc(z)
            gz = mpmath.polyval(coeffs, z)
            dz = mpmath.polyval(deriv, z)
            if dz == 0:
                return []
            rad = m * abs(gz / dz) + slack * (1 + abs(z))
            out.append((z, rad))
    return out


def _disjoint(disks: list[tuple]) -> bool:
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            zi, ri = disks[i]
            zj, rj = disks[j]
            if abs(zi - zj) <= ri + rj:
                return False
    return True


@functools.lru_cache(maxsize=256)
def _isolate_cached(coeffs: tuple, precision: int) -> tuple:
    poly = sympy.Poly(list(coeffs), _X, domain="ZZ")
    if poly.degree() < 1:
        raise ValueError("polynomial must be nonconstant")
    _, factors = poly.factor_list()
    prec = max(int(precision), 53)
    while prec <= MAX_PRECISION:
        found = []
        ok = True
        for fac, mult in factors:
            fc = [int(c) for c in fac.all_coeffs()]
            if len(fc) == 2:
                q = Fraction(-fc[1], fc[0])
                with mp.workprec(prec):
                    z = mpc(mpf(q.numerator) / q.denominator)
                    found.append(((z, mpf(2) ** (-prec + 4) * (1 + abs(z))), mult, q, tuple(fc)))
                continue
            disks = _newton_disks(fc, prec)
            if len(disks) != len(fc) - 1:
                ok = False
                break
            for zr in disks:
                found.append((zr, mult, None, tuple(fc)))
        if ok and _disjoint([f[0] for f in found]):
            with mp.workprec(prec):
                roots = [
                    RootEnclosure(Ball(z, r), mult, q, fc)
                    for (z, r), mult, q, fc in found
                ]
            roots.sort(key=lambda e: (-abs(e.center), -e.center.real, -e.center.imag))
            return tuple(roots)
        prec *= 2
    raise PrecisionExhausted("could not separate the roots")


def isolate_roots(poly, precision: int = DEFAULT_PRECISION) -> list[RootEnclosure]:
    """Certified, pairwise disjoint disks around every root.

    Rational roots are found exactly from linear factors.  Other roots come
    from each irreducible factor separately; a disk of radius
    ``m |g(z)/g'(z)|`` around an approximation ``z`` always holds a root of
    the degree-``m`` factor ``g``, and disjointness of the m disks then means
    each holds exactly one.  Precision doubles until the disks separate.

    Roots are ordered by decreasing modulus, then real part, then imaginary
    part.
    """
    return list(_isolate_cached(tuple(_poly_coeffs(poly)), int(precision)))


# --------------------------------------------------------------------------
# Classification


@dataclass(frozen=True)
class ClassificationReport:
    simple: bool
    degenerate: bool
    dominant_count: int
    admissible: bool
    roots: tuple = ()
    dominant: tuple = ()
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "simple": self.simple,
            "degenerate": self.degenerate,
            "dominant_count": self.dominant_count,
            "admissible": self.admissible,
            "reason": self.reason,
            "roots": [r.to_json() for r in self.roots],
            "dominant_roots": [r.to_json() for r in self.dominant],
        }


def _is_degenerate(F: sympy.Poly) -> bool:
    """Whether two distinct roots of ``F`` have a root-of-unity quotient.

    The quotients ``lambda_i / lambda_j`` are the roots of
    ``G(Y) = Res_X(F(X), F(XY))`` other than the ``m`` copies of ``Y = 1``
    coming from ``i = j``.  A quotient that is a primitive k-th root of unity
    lies in a field of degree at most ``deg G``, so only ``k`` with
    ``phi(k) <= deg G`` can occur; for each such ``k`` the cyclotomic
    polynomial is tested for a common factor.
    """
    Fs = F.sqf_part()
    m = Fs.degree()
    if m < 2:
        return False
    fx = Fs.as_expr()
    fxy = fx.subs(_X, _X * _Y)
    G = sympy.Poly(sympy.resultant(fx, fxy, _X), _Y)
    one = sympy.Poly(_Y - 1, _Y)
    for _ in range(m):
        G, rem = G.div(one)
        if not rem.is_zero:
            raise ArithmeticError("resultant lost the trivial quotients")
    # Any remaining root 1 means lambda_i = lambda_j for i != j: impossible
    # for a square-free polynomial, so it signals a genuine quotient of 1.
    if G.eval(1) == 0:
        return True
    bound = max(G.degree(), 1)
    k = 2
    # phi(k) >= sqrt(k/2), so k <= 2 * bound**2 covers every k with phi(k) <= bound
    while k <= 2 * bound * bound + 2:
        if sympy.totient(k) <= bound:
            cyc = sympy.Poly(sympy.cyclotomic_poly(k, _Y), _Y)
            if sympy.gcd(G, cyc).degree() > 0:
                return True
        k += 1
    return False


def _same_modulus_exact(a: RootEnclosure, b: RootEnclosure, F: sympy.Poly) -> bool:
    """Exact test that two roots have equal modulus, for the cases we can prove.

    Complex conjugates trivially share a modulus.  Otherwise ``|a| = |b|``
    with ``a != b`` means ``b = a * w`` for ``|w| = 1``; we only certify the
    real case ``b = -a``, where ``-a`` is a root of ``F``.
    """
    if a.factor == b.factor and not a.is_real:
        if abs(a.center - b.center.conjugate()) <= a.radius + b.radius:
            return True
    if a.is_real and b.is_real:
        if abs(a.center + b.center) <= a.radius + b.radius:
            # -a is a root of F, and b is the unique root in its disk
            g = sympy.gcd(F, sympy.Poly(F.as_expr().subs(_X, -_X), _X))
            return g.degree() > 0
    return False


def classify(rec: Recurrence, precision: int = DEFAULT_PRECISION) -> ClassificationReport:
    """Decide simplicity, degeneracy and the number of dominant roots.

    Parameters
    ----------
    rec : Recurrence
    precision : int
        Starting precision in bits for root isolation; raised automatically
        when moduli cannot be separated.

    Returns
    -------
    ClassificationReport
        ``admissible`` is true exactly for simple, non-degenerate sequences
        with two dominant roots; for those the dominant pair is certified to be
        complex conjugate with modulus above 1.
    """
    F = char_poly(rec).as_sympy()
    simple = sympy.gcd(F, F.diff(_X)).degree() == 0
    degenerate = _is_degenerate(F)

    prec = max(int(precision), 64)
    while True:
        roots = isolate_roots(char_poly(rec), prec)
        with mp.workprec(prec):
            mods = [(abs(r.center), r.radius) for r in roots]
            top = max(m for m, _ in mods)
            top_idx = max(range(len(roots)), key=lambda i: mods[i][0])
            cands = [
                i for i, (m, rad) in enumerate(mods)
                if m + rad >= top - mods[top_idx][1]
            ]
            lead = roots[top_idx]
            unresolved = False
            dominant = []
            for i in cands:
                if i == top_idx:
                    dominant.append(roots[i])
                elif _same_modulus_exact(lead, roots[i], F):
                    dominant.append(roots[i])
                else:
                    unresolved = True
        if not unresolved:
            break
        if prec >= MAX_PRECISION:
            raise InseparableModuli("moduli of the largest roots could not be separated")
        prec *= 4

    dominant_count = len(dominant)
    reasons = []
    if not simple:
        reasons.append("repeated characteristic root")
    if degenerate:
        reasons.append("quotient of two roots is a root of unity")
    if dominant_count != 2:
        reasons.append(f"{dominant_count} dominant root(s), need 2")
    admissible = simple and not degenerate and dominant_count == 2
    if admissible:
        lam = dominant[0]
        with mp.workprec(prec):
            if lam.is_real or abs(lam.center) - lam.radius <= 1:
                admissible = False
                reasons.append("dominant pair is not a conjugate pair outside the unit circle")
    dominant.sort(key=lambda r: -r.center.imag)
    return ClassificationReport(
        simple=simple,
        degenerate=degenerate,
        dominant_count=dominant_count,
        admissible=admissible,
        roots=tuple(roots),
        dominant=tuple(dominant),
        reason="; ".join(reasons) if reasons else "admissible",
    )


# --------------------------------------------------------------------------
# Dominant decomposition


@dataclass(frozen=True)
class DominantDecomposition:
    """Dominant part of an admissible recurrence.

    With ``u_n = a lambda^n + conj(a lambda^n) + r_n`` and ``scale = |2a|``,
    the dominant part is ``scale * cos(n theta + phi) |lambda|^n`` where
    ``alpha = a / scale`` has modulus exactly 1/2.  All real fields are
    :class:`Ball` enclosures; ``r`` and ``R`` are rationals with
    ``|r_n| <= r R^n``.
    """

    recurrence: Recurrence
    precision: int
    alpha: Ball
    lam: Ball
    theta: Ball
    phi: Ball
    log_abs_lambda: Ball
    log_scale: Ball
    nondominant_r: Fraction
    nondominant_R: Fraction
    components: tuple = field(repr=False, default=())

    @property
    def abs_lambda(self):
        return mpmath.exp(self.log_abs_lambda.center)

    def at_precision(self, bits: int) -> "DominantDecomposition":
        """The same decomposition recomputed at ``bits`` of precision."""
        if bits <= self.precision:
            return self
        return dominant_decomposition(self.recurrence, bits)

    def dominant_value(self, n: int):
        """``v_n`` in unscaled form, ``2 Re(a lambda^n)``, at working precision."""
        with mp.workprec(self.precision):
            x = self.theta.center * n + self.phi.center
            return mpmath.exp(self.log_scale.center + n * self.log_abs_lambda.center) * mpmath.cos(x)

    def reconstruct(self, n: int):
        """``sum_k a_k mu_k^n`` over every characteristic root ``mu_k``."""
        with mp.workprec(self.precision):
            return sum(c * mu ** n for c, mu in self.components)

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "alpha": self.alpha.to_json(),
            "lambda": self.lam.to_json(),
            "theta": self.theta.to_json(),
            "phi": self.phi.to_json(),
            "log_abs_lambda": self.log_abs_lambda.to_json(),
            "log_scale": self.log_scale.to_json(),
            "r": str(self.nondominant_r),
            "R": str(self.nondominant_R),
        }


def _solve_coefficients(rec: Recurrence, roots: list, prec: int) -> list:
    """Coefficients ``a_k`` with ``u_n = sum a_k mu_k^n`` for ``n < d``."""
    d = rec.order
    with mp.workprec(prec):
        V = mpmath.matrix(d, d)
        for i in range(d):
            for k, mu in enumerate(roots):
                V[i, k] = mu ** i
        rhs = mpmath.matrix([mpf(u) for u in rec.initials])
        sol = mpmath.lu_solve(V, rhs)
        return [mpc(sol[k]) for k in range(d)]


@functools.lru_cache(maxsize=64)
def dominant_decomposition(rec: Recurrence, precision: int = DEFAULT_PRECISION) -> DominantDecomposition:
    """Split ``u_n`` into its dominant oscillating part and a small remainder.

    Raises
    ------
    NotAdmissible
        When :func:`classify` does not report the recurrence as admissible.
    """
    report = classify(rec, precision)
    if not report.admissible:
        raise NotAdmissible(report.reason)
    prec = int(precision)
    work = prec + 64
    roots = isolate_roots(char_poly(rec), work)
    with mp.workprec(work):
        centers = [r.center for r in roots]
        coeffs = _solve_coefficients(rec, centers, work + 32)
        # Rounding allowance: solving a Vandermonde system loses bits roughly
        # in proportion to its conditioning; check the residual instead.
        resid = max(
            abs(sum(c * mu ** i for c, mu in zip(coeffs, centers)) - u)
            for i, u in enumerate(rec.initials)
        )
        err = (resid + mpf(2) ** (-prec)) * 16
        dom = max(range(len(roots)), key=lambda i: (abs(centers[i]), centers[i].imag))
        lam = centers[dom]
        a = coeffs[dom]
        if abs(a) <= err:
            raise NotAdmissible("dominant coefficient vanishes")
        scale = 2 * abs(a)
        alpha = a / scale
        lam_rad = roots[dom].radius
        theta = mpmath.arg(lam)
        phi = mpmath.arg(alpha)
        log_abs = mpmath.log(abs(lam))
        rel = lam_rad / abs(lam)
        others = [i for i in range(len(roots)) if i not in (dom,) and not (
            abs(centers[i] - lam.conjugate()) <= roots[i].radius + lam_rad
        )]
        if others:
            R0 = max(abs(centers[i]) + roots[i].radius for i in others)
            tight = [i for i in others if abs(abs(centers[i]) - R0) <= 2 * roots[i].radius]
            if all(roots[i].exact is not None for i in tight):
                R = max(abs(roots[i].exact) for i in tight)
            else:
                R = frac_ceil(R0 * (1 + mpf(2) ** -60))
            r = frac_ceil(sum(abs(coeffs[i]) for i in others) + err * len(others))
            if mpf(R.numerator) / R.denominator >= abs(lam) - lam_rad:
                raise NotAdmissible("remainder modulus not separated from |lambda|")
        else:
            r, R = Fraction(0), Fraction(1)
        rad = mpf(2) ** (-prec + 4)
        dec = DominantDecomposition(
            recurrence=rec,
            precision=prec,
            alpha=Ball(alpha, err / scale + rad),
            lam=Ball(lam, lam_rad + rad),
            theta=Ball(theta, rel * 2 + rad),
            phi=Ball(phi, err / abs(a) * 2 + rad),
            log_abs_lambda=Ball(log_abs, rel * 2 + rad),
            log_scale=Ball(mpmath.log(scale), err / abs(a) * 2 + rad),
            nondominant_r=r,
            nondominant_R=R,
            components=tuple(zip(coeffs, centers)),
        )
    return dec


# --------------------------------------------------------------------------
# Modular behaviour


@dataclass(frozen=True)
class ModularCycle:
    """Ultimately periodic residues ``u_n mod M``.

    ``u_n mod M == cycle[(n - preperiod) % period]`` for ``n >= preperiod`` and
    ``prefix[n]`` before that.
    """

    modulus: int
    preperiod: int
    period: int
    cycle: tuple
    prefix: tuple

    def residue(self, n: int) -> int:
        if n < self.preperiod:
            return self.prefix[n]
        return self.cycle[(n - self.preperiod) % self.period]

    def residues(self, n):
        """Vectorised :meth:`residue` over a numpy integer array."""
        import numpy as np

        n = np.asarray(n, dtype=np.int64)
        cyc = np.asarray(self.cycle, dtype=np.int64)
        out = cyc[(n - self.preperiod) % self.period]
        if self.preperiod:
            early = n < self.preperiod
            if early.any():
                pre = np.asarray(self.prefix, dtype=np.int64)
                out[early] = pre[n[early]]
        return out

    def to_json(self) -> dict:
        return {
            "M": self.modulus,
            "preperiod": self.preperiod,
            "period": self.period,
            "cycle": list(self.cycle),
            "prefix": list(self.prefix),
        }


def modular_sequence(rec: Recurrence, M: int) -> ModularCycle:
    """Minimal preperiod and period of ``u_n mod M``.

    The state vector ``(u_n, ..., u_{n+d-1}) mod M`` is iterated until it
    repeats; that gives a period of the state sequence, which is then reduced
    to the minimal period and preperiod of the residue sequence itself.
    """
    M = int(M)
    if M < 2:
        raise ValueError("modulus must be at least 2")
    d = rec.order
    c = [x % M for x in rec.coeffs]
    state = tuple(u % M for u in rec.initials)
    seen = {state: 0}
    res = [state[0]]
    idx = 0
    while True:
        nxt = sum(c[i] * state[d - 1 - i] for i in range(d)) % M
        state = state[1:] + (nxt,)
        idx += 1
        if state in seen:
            start = seen[state]
            span = idx - start
            break
        seen[state] = idx
        res.append(state[0])
    # res now covers indices 0 .. idx-1 = start + span - 1; extend one period
    # so shifted comparisons stay in range
    for j in range(span):
        res.append(res[start + j])
    period = span
    for T in sorted(sympy.divisors(span)):
        if all(res[start + i] == res[start + i + T] for i in range(span)):
            period = T
            break
    pre = start
    while pre > 0 and res[pre - 1] == res[pre - 1 + period]:
        pre -= 1
    return ModularCycle(
        modulus=M,
        preperiod=pre,
        period=period,
        cycle=tuple(res[pre:pre + period]),
        prefix=tuple(res[:pre]),
    )
