"""Arcs ``J_d(gamma, delta)``, pattern frames, and witnesses.

For an admissible recurrence with dominant root ``lambda = |lambda| e^{i theta}``
the set ``J_d(gamma, delta)`` consists of the angles ``x`` with

    0 < gamma cos(x) < cos(x + d theta) |lambda|^d < delta cos(x).

Dividing by ``cos x`` turns the middle quantity into
``Re(lambda^d) - Im(lambda^d) tan(x)``, which is monotone in ``x`` on
``(-pi/2, pi/2)``, so ``J_d`` is a single arc with endpoints
``arctan((Re lambda^d - eta) / Im lambda^d)`` for ``eta = gamma, delta``.

A *pattern frame* for index classes ``t_1..t_l`` modulo ``T`` is an arc ``I``
together with offsets ``b_j`` such that every angle ``n theta + phi`` in ``I``
makes ``u_n, u_{n+b_2}, ..., u_{n+b_l}`` increasing positive values with no
other value in between, apart from a small exceptional set of ``n``.  A
*witness* is a concrete such ``n``, checked directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp, mpf

from ._numeric import PrecisionExhausted
from .circle import CircleInterval
from .diophantine import (
    AlgebraicNumber,
    BoundConstants,
    MatveevInstance,
    matveev_constant,
    orbit_first_hit,
    rotation_hit,
    weil_height,
)
from .enumeration import Comparator, HorizonExhausted, PositiveStream, order_threshold
from .lrs_core import DominantDecomposition, Recurrence, char_poly, isolate_roots
from .modular_profile import locate_index_pattern

__all__ = [
    "CircleInterval",
    "JSpec",
    "PatternFrame",
    "StageRecord",
    "PatternWitness",
    "VerificationReport",
    "ConstructionStalled",
    "EpsilonTooLarge",
    "CounterexampleFound",
    "j_interval",
    "j_length_bounds",
    "j_anchor",
    "tail_bound",
    "stage_one_interval",
    "stage_candidates",
    "exclusion_blockers",
    "select_pattern_frame",
    "verify_frame",
    "shrink_subinterval",
    "find_witness",
    "verify_witness",
    "lrs_linear_form",
]

FRAME_PRECISION = 1024
TAIL_WINDOW = 64


class ConstructionStalled(RuntimeError):
    """Frame or witness construction could not finish; ``stage`` says where."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class EpsilonTooLarge(ValueError):
    """No sub-arc of the requested length avoids the blocking arcs."""


class CounterexampleFound(RuntimeError):
    """A witness failed verification at index ``m``."""

    def __init__(self, message, m):
        super().__init__(message)
        self.m = m


def _mp(x):
    """Exact-as-possible conversion; decimal strings avoid binary rounding."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, float):
        return mpf(repr(x))
    return mpf(x)


# --------------------------------------------------------------------------
# The arcs J_d


@dataclass(frozen=True)
class JSpec:
    """Parameters ``(d, gamma, delta)`` of ``J_d(gamma, delta)``.

    ``gamma`` and ``delta`` are stored as exact fractions; decimal strings
    and floats are read by their decimal representation.
    """

    d: int
    gamma: Fraction
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "d", int(self.d))
        g = Fraction(str(self.gamma)) if isinstance(self.gamma, float) else Fraction(self.gamma)
        dl = Fraction(str(self.delta)) if isinstance(self.delta, float) else Fraction(self.delta)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "delta", dl)
        if self.d == 0:
            raise ValueError("d must be nonzero")
        if g < 0 or dl < g:
            raise ValueError("need 0 <= gamma <= delta")


def _power(ctx: DominantDecomposition, d: int, prec: int):
    c = ctx.at_precision(prec)
    with mp.workprec(prec):
        w = c.lam.center ** d
        rel = abs(d) * c.lam.radius / abs(c.lam.center) * 2 + mpf(2) ** (-prec + 8) * (abs(d) + 1)
    return w, rel


def _prec_for(ctx, d: int, precision=None) -> int:
    base = int(precision or ctx.precision)
    return base + abs(int(d)).bit_length() + 32


def j_interval(ctx: DominantDecomposition, spec: JSpec, precision: int | None = None) -> CircleInterval:
    """The arc ``J_d(gamma, delta)`` with certified endpoint slack.

    Examples
    --------
    With ``lambda = 2 + i`` and ``d = 4``, ``lambda^4 = -7 + 24i`` and
    ``J_4(1, 3) = (-arctan(5/12), -arctan(1/3))``.
    """
    prec = _prec_for(ctx, spec.d, precision)
    if spec.gamma == spec.delta:
        return CircleInterval.empty()
    w, rel = _power(ctx, spec.d, prec)
    with mp.workprec(prec):
        a, b = w.real, w.imag
        g, dl = _mp(spec.gamma), _mp(spec.delta)
        if b > 0:
            lo, hi = mpmath.atan((a - dl) / b), mpmath.atan((a - g) / b)
        else:
            lo, hi = mpmath.atan((a - g) / b), mpmath.atan((a - dl) / b)
        # endpoints are later handled at the base precision, so keep the
        # slack above its rounding unit
        base = int(precision or ctx.precision)
        slack = 4 * rel * abs(w) / abs(b) + mpf(2) ** (-base + 16)
        return CircleInterval(lo, hi - lo, slack)


def j_length_bounds(ctx: DominantDecomposition, spec: JSpec, precision: int | None = None):
    """Lower and upper bounds on ``|J_d(gamma, delta)|``.

    With ``w = lambda^d``: the chord between the endpoints on the doubled
    circle gives ``sin|J| = (delta - gamma) |Im w| / (|w - delta| |w - gamma|)``,
    a lower bound, and integrating the endpoint derivative
    ``|Im w| / |w - eta|^2`` gives the upper bound
    ``(delta - gamma) |w| / (|w| - delta)^2`` when ``|w| > delta``.
    """
    prec = _prec_for(ctx, spec.d, precision)
    w, rel = _power(ctx, spec.d, prec)
    with mp.workprec(prec):
        g, dl = _mp(spec.gamma), _mp(spec.delta)
        span = dl - g
        lower = span * abs(w.imag) / (abs(w - dl) * abs(w - g))
        lower *= 1 - 8 * rel
        aw = abs(w)
        if aw > dl:
            upper = span * aw / (aw - dl) ** 2 * (1 + 8 * rel)
        else:
            upper = +mp.pi
        return lower, upper


def _anchor_radius(abs_lam, d: int, eta=None):
    s = mpmath.sqrt(abs_lam) if eta is None else max(_mp(eta), mpmath.sqrt(abs_lam))
    p = abs_lam ** d
    if p <= s:
        return +mp.pi
    return s * p / (p - s) ** 2


def j_anchor(ctx: DominantDecomposition, d: int, precision: int | None = None, eta=None):
    """Anchor ``pi/2 - d theta`` (reduced into ``(-pi/2, pi/2]``) and a radius.

    Every ``J_d(gamma, delta)`` with ``0 <= gamma < delta <= s`` lies within
    ``radius`` of the anchor, where ``s = max(eta, sqrt|lambda|)`` and the
    radius ``s |lambda|^d / (|lambda|^d - s)^2`` bounds the endpoint drift as
    the threshold runs from 0 to ``s``.
    """
    d = int(d)
    if d < 1:
        raise ValueError("d must be positive")
    prec = _prec_for(ctx, d, precision)
    c = ctx.at_precision(prec)
    with mp.workprec(prec):
        x = mp.pi / 2 - d * c.theta.center
        x = x - mp.pi * mpmath.floor(x / mp.pi + mpf(1) / 2)
        if x <= -mp.pi / 2:
            x += mp.pi
        r = _anchor_radius(c.abs_lambda, d, eta) * (1 + mpf(2) ** -40) + d * c.theta.radius
        return x, r


def tail_bound(ctx: DominantDecomposition, D: int, delta, window: int = TAIL_WINDOW,
               precision: int | None = None):
    """Upper bound on ``sum_{d >= D} |J_d(1, delta)|``.

    The first ``window`` arcs are measured directly; the rest are bounded by
    the geometric series of the per-arc upper bounds.
    """
    D = int(D)
    if D < 1:
        raise ValueError("D must be positive")
    delta = Fraction(str(delta)) if isinstance(delta, float) else Fraction(delta)
    if delta <= 1:
        return mpf(0)
    total = mpf(0)
    for d in range(D, D + window):
        J = j_interval(ctx, JSpec(d, 1, delta), precision)
        total += J.length + 2 * J.slack
    E = D + window
    prec = _prec_for(ctx, E, precision)
    c = ctx.at_precision(prec)
    with mp.workprec(prec):
        L = c.abs_lambda
        dl = _mp(delta)
        pE = L ** E
        if pE <= dl:
            return +mp.inf
        c1 = 1 - dl / pE
        geo = (dl - 1) / c1 ** 2 / pE / (1 - 1 / L)
        return (total + geo) * (1 + mpf(2) ** -60)


# --------------------------------------------------------------------------
# Pattern frames


def stage_one_interval(ctx: DominantDecomposition) -> CircleInterval:
    """Angles with ``cos x > 1/|lambda|``; there earlier terms stay smaller."""
    with mp.workprec(ctx.precision):
        a = mpmath.acos(1 / ctx.abs_lambda)
        return CircleInterval(-a, 2 * a, mpf(2) ** (-ctx.precision + 16))


@dataclass
class StageRecord:
    j: int
    b: int
    gamma: Fraction
    delta: Fraction
    interval: CircleInterval
    candidates: list | None = None

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "b": str(self.b),
            "gamma": str(self.gamma),
            "delta": str(self.delta),
            "interval": self.interval.to_json(),
            "candidates": None if self.candidates is None else [str(b) for b in self.candidates],
        }


@dataclass
class PatternFrame:
    """Offsets ``b_j``, thresholds ``delta_j`` and the arc ``I``.

    ``D`` is the exclusion depth: for ``1 <= d < D`` outside the offsets the
    arc misses ``J_d(1, delta_l)``, and ``tail`` bounds the total length of
    the arcs ``J_d(1, delta_l)`` with ``d >= D``, which is below ``|I|``.
    """

    ell: int
    T: int
    t: tuple
    b: tuple
    deltas: tuple
    I: CircleInterval
    D: int
    tail: mpf
    precision: int
    stages: list = field(default_factory=list)

    @property
    def delta_last(self) -> Fraction:
        return self.deltas[-1] if self.deltas else Fraction(1)

    def to_json(self) -> dict:
        with mp.workprec(self.precision):
            return {
                "schema": "prodisjunct.pattern_frame/1",
                "ell": self.ell,
                "T": self.T,
                "t": list(self.t),
                "b": [str(x) for x in self.b],
                "deltas": [str(x) for x in self.deltas],
                "I": self.I.to_json(),
                "D": str(self.D),
                "tail": mpmath.nstr(self.tail, 20),
                "precision": self.precision,
                "stages": [s.to_json() for s in self.stages],
            }

    @classmethod
    def from_json(cls, data: dict) -> "PatternFrame":
        prec = int(data["precision"])
        with mp.workprec(prec):
            return cls(
                ell=int(data["ell"]),
                T=int(data["T"]),
                t=tuple(int(x) for x in data["t"]),
                b=tuple(int(x) for x in data["b"]),
                deltas=tuple(Fraction(x) for x in data["deltas"]),
                I=CircleInterval.from_json(data["I"]),
                D=int(data["D"]),
                tail=mpf(data["tail"]),
                precision=prec,
            )


def default_deltas(ctx: DominantDecomposition, ell: int) -> tuple:
    """Geometric thresholds ``|lambda|^{(j-1)/(2 ell)}``, ``j = 2..ell``."""
    out = []
    with mp.workprec(64):
        for j in range(2, ell + 1):
            v = ctx.abs_lambda ** (mpf(j - 1) / (2 * ell))
            out.append(Fraction(int(mpmath.floor(v * 10 ** 6)), 10 ** 6))
    return tuple(out)


def _first_class_member(r: int, T: int) -> int:
    r %= T
    return r if r > 0 else T


def _anchor_hits(ctx, I: CircleInterval, b_start: int, step: int, b_max: int, prec: int, eta=None):
    """Indices ``b = b_start + k*step <= b_max`` whose anchor is near ``I``.

    Yields every ``b`` (in increasing order) for which ``J_b(eta1, eta2)`` can
    meet ``I`` for some ``0 <= eta1 < eta2 <= sqrt|lambda|``.  Small ``b`` are
    listed directly; once the anchor radius is small the search jumps from
    hit to hit with :func:`orbit_first_hit`.
    """
    c = ctx.at_precision(prec)
    b = b_start
    while b <= b_max:
        _, rad = j_anchor(c, b, prec, eta)
        width = I.length + 2 * rad + 2 * I.slack
        if width >= mp.pi / 4 or b < 64:
            yield b
            b += step
            continue
        with mp.workprec(prec + b_max.bit_length() + 64):
            two = mp.pi
            beta = -(step * c.theta.center) / two
            offset = mpf(1) / 2 - b * c.theta.center / two
            lo = (I.lo - rad - I.slack) / two
            k = orbit_first_hit(beta, offset, lo, width / two, 0, (b_max - b) // step)
        if k is None:
            return
        b += k * step
        yield b
        b += step


def stage_candidates(ctx: DominantDecomposition, I: CircleInterval, gamma, delta, b_limit: int,
                     used=(), precision: int = FRAME_PRECISION) -> list:
    """Offsets ``b`` in ``[1, b_limit]`` with ``J_b(gamma, delta)`` meeting ``I``.

    The result also lists 0 and the offsets already in ``used``, which are
    always admissible positions for later stages.
    """
    hits = set(int(u) for u in used) | {0}
    for b in _anchor_hits(ctx, I, 1, 1, int(b_limit), precision, delta):
        if b in hits:
            continue
        J = j_interval(ctx, JSpec(b, gamma, delta), precision)
        meet = I.meets(J)
        if meet is None:
            raise PrecisionExhausted(f"cannot decide whether J_{b} meets the arc")
        if meet:
            hits.add(b)
    return sorted(hits)


def exclusion_blockers(ctx: DominantDecomposition, I: CircleInterval, delta, d_from: int, d_to: int,
                       skip=(), precision: int = FRAME_PRECISION) -> list:
    """All ``d`` in ``[d_from, d_to)`` outside ``skip`` whose ``J_d(1, delta)`` meets ``I``."""
    skip = set(int(s) for s in skip)
    out = []
    if d_to <= d_from:
        return out
    for d in _anchor_hits(ctx, I, int(d_from), 1, int(d_to) - 1, precision, delta):
        if d in skip:
            continue
        J = j_interval(ctx, JSpec(d, 1, delta), precision)
        meet = I.meets(J)
        if meet is None or meet:
            out.append(d)
    return out


def _min_tail_depth(ctx, I_len, delta, start: int, precision) -> int:
    """Least ``D >= start`` with ``tail_bound(D) < I_len`` (bisection on a doubling bracket)."""
    if Fraction(delta) <= 1:
        return max(start, 1)
    lo = max(start, 1)
    if tail_bound(ctx, lo, delta, precision=precision) < I_len:
        return lo
    hi = lo * 2
    while not tail_bound(ctx, hi, delta, precision=precision) < I_len:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_bound(ctx, mid, delta, precision=precision) < I_len:
            hi = mid
        else:
            lo = mid
    return hi


def _largest_gap(I: CircleInterval, blocks: list, min_len=0):
    """Gaps of ``I`` left after removing ``blocks``, as (offset, length) pairs."""
    cuts = []
    for J in blocks:
        s = I.offset_of(J.lo) - J.slack
        if s > 2 * mp.pi - J.length - J.slack:
            s -= 2 * mp.pi
        e = s + J.length + 2 * J.slack
        cuts.append((max(s, mpf(0)), min(e, I.length)))
    cuts.sort()
    gaps = []
    pos = mpf(0)
    for s, e in cuts:
        if s > pos:
            gaps.append((pos, s - pos))
        pos = max(pos, e)
    if pos < I.length:
        gaps.append((pos, I.length - pos))
    return [g for g in gaps if g[1] > min_len]


def _settle_depth(ctx, I: CircleInterval, b, delta_last, d_start: int, prec: int):
    """Shrink ``I`` past blockers until the tail bound and exclusion agree.

    Returns ``(I, D, tail)``.
    """
    d_checked = 1
    while True:
        D = _min_tail_depth(ctx, I.length, delta_last, max(d_start, 1), prec)
        blockers = exclusion_blockers(ctx, I, delta_last, d_checked, D, skip=b, precision=prec)
        if not blockers:
            return I, D, tail_bound(ctx, D, delta_last, precision=prec)
        arcs = [j_interval(ctx, JSpec(d, 1, delta_last), prec) for d in blockers]
        gaps = _largest_gap(I, arcs, 4 * I.slack)
        if not gaps:
            raise ConstructionStalled("blocking arcs cover the whole interval", stage="exclusion")
        off, length = max(gaps, key=lambda g: g[1])
        I = I.subarc(off + I.slack, length - 2 * I.slack)
        d_checked = 1


def select_pattern_frame(ctx: DominantDecomposition, ell: int, T: int, t, *, deltas=None,
                         b_max: int | None = None, candidate_limit: int | None = None,
                         precision: int = FRAME_PRECISION) -> PatternFrame:
    """Build a frame for index classes ``t_1..t_ell`` modulo ``T``.

    Parameters
    ----------
    ctx : DominantDecomposition
    ell : int
    T : int
    t : sequence of int
        Residues ``t_1, ..., t_ell``.
    deltas : sequence, optional
        Thresholds ``delta_2 < ... < delta_ell``; a geometric schedule in
        ``(1, sqrt|lambda|)`` by default, shrunk until the base tail bound
        holds.
    b_max : int, optional
        Largest offset examined at each stage.
    candidate_limit : int, optional
        When given, each stage also records every offset up to this bound
        whose arc meets the previous interval.
    precision : int
        Working precision in bits.
    """
    ell, T = int(ell), int(T)
    t = tuple(int(x) % T for x in t)
    if len(t) != ell or ell < 1:
        raise ValueError("need ell residues")
    ctx = ctx.at_precision(precision)
    b_max = b_max or 1 << 256
    I = stage_one_interval(ctx)
    if deltas is None:
        deltas = default_deltas(ctx, ell)
        while ell > 1 and not tail_bound(ctx, 1, deltas[-1], precision=precision) < I.length:
            deltas = tuple(Fraction(1) + (x - 1) / 2 for x in deltas)
    else:
        deltas = tuple(Fraction(str(x)) if isinstance(x, float) else Fraction(x) for x in deltas)
        if len(deltas) != ell - 1:
            raise ValueError("need ell - 1 thresholds")
        if ell > 1 and not tail_bound(ctx, 1, deltas[-1], precision=precision) < I.length:
            raise ConstructionStalled("base tail bound fails for these thresholds", stage=1)
    if any(x <= 1 for x in deltas) or list(deltas) != sorted(set(deltas)):
        raise ValueError("thresholds must increase and exceed 1")

    stages = [StageRecord(1, 0, Fraction(0), Fraction(1), I)]
    b_used: list[int] = []
    prev_delta = Fraction(1)
    for j in range(2, ell + 1):
        dj = deltas[j - 2]
        cands = None
        if candidate_limit:
            cands = stage_candidates(ctx, I, prev_delta, dj, candidate_limit, b_used, precision)
        start = _first_class_member(t[j - 1] - t[0], T)
        chosen = None
        for b in _anchor_hits(ctx, I, start, T, b_max, precision, dj):
            if b in b_used:
                continue
            J = j_interval(ctx, JSpec(b, prev_delta, dj), precision)
            inside = I.contains_arc(J)
            if inside is None:
                raise ConstructionStalled(f"containment of J_{b} undecided", stage=j)
            if inside:
                chosen = (b, J)
                break
        if chosen is None:
            raise ConstructionStalled(f"no offset up to {b_max}", stage=j)
        b, I = chosen
        b_used.append(b)
        stages.append(StageRecord(j, b, prev_delta, dj, I, cands))
        prev_delta = dj

    delta_last = deltas[-1] if deltas else Fraction(1)
    I, D, tail = _settle_depth(ctx, I, b_used, delta_last, 1, precision)
    return PatternFrame(ell, T, t, tuple(b_used), tuple(deltas), I, D, tail, precision, stages)


def verify_frame(ctx: DominantDecomposition, frame: PatternFrame, samples: int = 64) -> dict:
    """Re-check the frame conditions from the frame data alone.

    Returns a dict of booleans: ``residues`` (offsets in the right classes),
    ``nested`` (``I`` inside every stage arc, checked at endpoints and
    sample points), ``exclusion`` (no blocking ``d < D``) and ``tail``.
    """
    prec = frame.precision
    c = ctx.at_precision(prec)
    T = frame.T
    res_ok = all((b - (frame.t[j + 1] - frame.t[0])) % T == 0 for j, b in enumerate(frame.b))
    nested = True
    prev = Fraction(1)
    with mp.workprec(prec):
        pts = [frame.I.lo + frame.I.length * (k + mpf(1) / 2) / samples for k in range(samples)]
        for x in pts:
            if not mpmath.cos(x) > 0:
                nested = False
        for b, dj in zip(frame.b, frame.deltas):
            J = j_interval(c, JSpec(b, prev, dj), prec)
            # the last stage arc may coincide with I, so only a certified
            # failure counts against nesting
            if J.contains_arc(frame.I) is False:
                nested = False
            prev = dj
        blockers = exclusion_blockers(c, frame.I, frame.delta_last, 1, frame.D, skip=frame.b, precision=prec)
        tail = tail_bound(c, frame.D, frame.delta_last, precision=prec) if frame.ell > 1 else mpf(0)
        tail_ok = tail < frame.I.length
    return {
        "residues": res_ok,
        "nested": nested,
        "exclusion": not blockers,
        "tail": bool(tail_ok),
        "ok": res_ok and nested and not blockers and bool(tail_ok),
    }


def shrink_subinterval(ctx: DominantDecomposition, frame: PatternFrame, eps) -> PatternFrame:
    """Sub-frame whose arc has length ``eps`` and exclusion depth ``> eps^{-1/2}``.

    The arcs ``J_d(1, delta_l)`` with ``D <= d < D'`` that meet ``I`` are
    removed and ``I'`` is placed in the first remaining gap of length at
    least ``eps``.

    Raises
    ------
    EpsilonTooLarge
        When ``eps >= |I|`` or no gap is long enough.
    """
    prec = frame.precision
    c = ctx.at_precision(prec)
    with mp.workprec(prec):
        eps = _mp(eps)
        if not eps < frame.I.length:
            raise EpsilonTooLarge("eps must be smaller than the frame interval")
        D_new = int(mpmath.floor(eps ** mpf(-0.5))) + 1
        D_new = max(D_new, frame.D)
        D_new = _min_tail_depth(c, eps, frame.delta_last, D_new, prec) if frame.ell > 1 else D_new
        blockers = exclusion_blockers(c, frame.I, frame.delta_last, 1, D_new, skip=frame.b, precision=prec)
        arcs = [j_interval(c, JSpec(d, 1, frame.delta_last), prec) for d in blockers]
        gaps = _largest_gap(frame.I, arcs, eps + 2 * frame.I.slack)
        if not gaps:
            raise EpsilonTooLarge("no gap of the requested length")
        off, _ = gaps[0]
        I_new = frame.I.subarc(off + 3 * frame.I.slack, eps)
        tail = tail_bound(c, D_new, frame.delta_last, precision=prec) if frame.ell > 1 else mpf(0)
    return PatternFrame(frame.ell, frame.T, frame.t, frame.b, frame.deltas, I_new, D_new, tail,
                        prec, list(frame.stages))


# --------------------------------------------------------------------------
# Witnesses


def _stringify(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify(v) for v in obj]
    return obj


@dataclass
class VerificationReport:
    ok: bool
    mode: str
    indices: tuple
    checked: dict
    horizon: str
    complete: bool
    precision: int
    ranks: tuple | None = None
    constants: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "mode": self.mode,
            "indices": [str(n) for n in self.indices],
            "checked": _stringify(self.checked),
            "horizon": self.horizon,
            "complete": self.complete,
            "precision": self.precision,
            "ranks": None if self.ranks is None else list(self.ranks),
            "constants": self.constants,
            "notes": self.notes,
        }


@dataclass
class PatternWitness:
    """Indices ``n, n + b_2, ..., n + b_l`` realising a pattern."""

    n: tuple
    b: tuple
    mode: str
    T: int
    t: tuple
    frame: PatternFrame | None = None
    record: VerificationReport | None = None

    def to_json(self) -> dict:
        return {
            "schema": "prodisjunct.pattern_witness/1",
            "n": [str(x) for x in self.n],
            "b": [str(x) for x in self.b],
            "mode": self.mode,
            "T": self.T,
            "t": list(self.t),
            "frame": None if self.frame is None else self.frame.to_json(),
            "verification": None if self.record is None else self.record.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PatternWitness":
        frame = data.get("frame")
        return cls(
            n=tuple(int(x) for x in data["n"]),
            b=tuple(int(x) for x in data["b"]),
            mode=data["mode"],
            T=int(data["T"]),
            t=tuple(int(x) for x in data["t"]),
            frame=None if frame is None else PatternFrame.from_json(frame),
        )


def _field_degree_bound(rec: Recurrence) -> int:
    """Degree bound for the splitting field: product of ``deg(f)!`` over irreducible factors."""
    _, factors = char_poly(rec).as_sympy().factor_list()
    D = 1
    for f, _ in factors:
        D *= math.factorial(f.degree())
    return D


def lrs_linear_form(ctx: DominantDecomposition) -> MatveevInstance:
    """Linear form whose smallness measures how close ``n theta + phi`` gets to ``pi/2``.

    ``e^{2i(n theta + phi)} = (lambda / conj lambda)^n (a / conj a)``, so
    ``2|cos(n theta + phi)| = |Lambda|`` with
    ``Lambda = -(lambda/conj lambda)^n (a / conj a) - 1``.  Heights are upper
    bounds from the minimal polynomial of ``lambda`` and the closed form
    ``a = N(lambda) / F'(lambda)``; all three multiplicands lie on the unit
    circle, so ``|log| <= pi``.  The exponent vector is filled in by callers.
    """
    rec = ctx.recurrence
    lam = ctx.lam.center
    F = char_poly(rec)
    fac = None
    for r in isolate_roots(F, 128):
        if abs(r.center - lam) <= r.radius + mpf(2) ** -100:
            fac = r.factor
    a_lam = AlgebraicNumber.from_minpoly(fac, complex(lam))
    h_lam = weil_height(a_lam).upper
    d = rec.order
    c = rec.coeffs
    p = [rec.initials[j] - sum(c[i - 1] * rec.initials[j - i] for i in range(1, j + 1)) for j in range(d)]

    def poly_height(coeffs_by_power):
        terms = [(k, v) for k, v in coeffs_by_power if v != 0]
        if not terms:
            return mpf(0)
        return mpmath.log(len(terms)) + sum(mpmath.log(abs(v)) + k * h_lam for k, v in terms)

    h_num = poly_height([(d - 1 - j, p[j]) for j in range(d)])
    Fc = F.coeffs
    deriv = [((d - i) - 1, Fc[i] * (d - i)) for i in range(d)]
    h_den = poly_height(deriv)
    h_a = h_num + h_den
    D = _field_degree_bound(rec)
    return MatveevInstance(
        D=D,
        heights=(2 * h_lam, 2 * h_a, mpf(0)),
        abs_logs=(+mp.pi, +mp.pi, +mp.pi),
    )


def _log_u_bounds(cmp: Comparator, n: int):
    k = cmp.key(n)
    if k.exact:
        with mp.workprec(160):
            v = abs(mpf(k.value)) if k.value else mpf(0)
            if v == 0:
                return k.sign, -mp.inf, -mp.inf
            lg = mpmath.log(v)
            return k.sign, lg - mpf(2) ** -100, lg + mpf(2) ** -100
    ball = k.log_magnitude
    bits = max(64, int(mpmath.mag(ball.center)) - int(mpmath.mag(ball.radius)) + 64)
    with mp.workprec(bits):
        return k.sign, ball.lower, ball.upper


def _window_log(ctx, n_last_log_upper, m: int):
    """``log`` of the largest ``|cos(x_m)|`` compatible with ``0 < u_m < u_last``."""
    r = ctx.nondominant_r
    R = ctx.nondominant_R
    with mp.workprec(ctx.precision):
        base = ctx.log_scale.lower + m * ctx.log_abs_lambda.lower
        a = n_last_log_upper - base
        if r == 0:
            return a + mpf(2) ** -60
        corr = mpmath.log(_mp(r)) + m * mpmath.log(_mp(R)) - base
        hi = max(a, corr) + mpmath.log(2)
        return hi


def _matveev_horizon(ctx, inst: MatveevInstance, log_u_last_upper, n: int):
    """Least ``d_H`` such that no ``m = n + d >= n + d_H`` can be a hit.

    A hit needs ``|cos x_m| <= exp(window)``; Matveev gives
    ``|cos x_m| = |Lambda| / 2 > exp(log_lower(m)) / 2``.
    """
    K = matveev_constant(inst)

    def ok(d):
        m = n + d
        w = _window_log(ctx, log_u_last_upper, m)
        low = -K * (1 + mpmath.log(inst.M * m)) - mpmath.log(2)
        return w < low

    lo_d, hi_d = 1, 2
    while not (ok(hi_d) and (n + hi_d) * ctx.log_abs_lambda.lower > 2 * K):
        hi_d *= 2
    while hi_d - lo_d > 1:
        mid = (lo_d + hi_d) // 2
        if ok(mid) and (n + mid) * ctx.log_abs_lambda.lower > 2 * K:
            hi_d = mid
        else:
            lo_d = mid
    return hi_d, K


def _tail_scan(ctx, cmp: Comparator, n: int, others: set, lo_n: int, hi_n: int, hi_log,
               d_from: int, d_to: int, prec: int, notes: list):
    """Exclude ``m = n + d`` for ``d_from <= d < d_to`` by hit jumping.

    Candidates are the ``m`` whose angle ``x_m`` comes within the window of a
    zero of cosine; each is then compared exactly.
    """
    d = d_from
    hits = 0
    work = prec + int(n + d_to).bit_length() + 64
    c = ctx.at_precision(work)
    while d < d_to:
        seg_end = min(d_to, max(2 * d, d + 1024))
        with mp.workprec(work):
            wl = _window_log(c, hi_log, n + d)
            # the window in radians, capped so that the grid stays manageable
            floor_log = -mpf(work - int(seg_end - d).bit_length() - 96) * mpmath.log(2)
            wl = max(wl, floor_log)
            w = mp.pi / 2 * mpmath.exp(wl) * (1 + mpf(2) ** -30)
            w += (n + seg_end) * c.theta.radius + c.phi.radius
            if w >= mp.pi / 4:
                for m in range(n + d, n + seg_end):
                    if m not in others:
                        _check_m(cmp, m, n, others, lo_n, hi_n)
                d = seg_end
                continue
            beta = c.theta.center / mp.pi
            off = ((n + d) * c.theta.center + c.phi.center) / mp.pi - mpf(1) / 2
            k = orbit_first_hit(beta, off, -w / mp.pi, 2 * w / mp.pi, 0, seg_end - d - 1)
        if k is None:
            d = seg_end
            continue
        m = n + d + k
        hits += 1
        if m not in others:
            _check_m(cmp, m, n, others, lo_n, hi_n)
        d = d + k + 1
    notes.append(f"near-zero candidates examined in d in [{d_from}, {d_to}): {hits}")


def _check_m(cmp: Comparator, m: int, n1: int, others: set, lo_n: int, hi_n: int):
    if m < 0 or m in others:
        return
    if cmp.compare(m, lo_n) > 0 and cmp.compare(m, hi_n) < 0:
        raise CounterexampleFound(f"u_{m} lies strictly between the pattern values", m)


def verify_witness(ctx: DominantDecomposition, rec: Recurrence, witness: PatternWitness,
                   horizon=None, *, stream_limit: int = 50_000_000, delta_direct: int = 256) -> VerificationReport:
    """Check that the witness values are increasing, positive and consecutive.

    Parameters
    ----------
    horizon : int or "matveev", optional
        How far beyond the witness indices to exclude intruders.  An integer
        bounds ``d = m - n``; ``"matveev"`` closes the search with the linear
        form lower bound.  Defaults to ``"matveev"`` in rigorous mode and
        ``10**12`` in empirical mode.
    stream_limit : int
        Witnesses with all indices below this are checked against the sorted
        stream, which also yields their ranks.

    Raises
    ------
    CounterexampleFound
        When some ``u_m`` lies strictly between ``u_{n_1}`` and ``u_{n_l}``
        or the pattern values are not increasing and positive.
    """
    mode = witness.mode
    if horizon is None:
        horizon = "matveev" if mode == "rigorous" else 10 ** 12
    idx = tuple(int(x) for x in witness.n)
    n = idx[0]
    n_last = idx[-1]
    others = set(idx)
    cmp = Comparator(ctx, rec)
    notes: list = []
    checked: dict = {}
    constants = BoundConstants()

    # increasing and positive
    if not cmp.value_is_positive(n) or cmp.key(n).sign <= 0:
        raise CounterexampleFound("first pattern value is not positive", n)
    for a, b in zip(idx, idx[1:]):
        if cmp.compare(a, b) >= 0:
            raise CounterexampleFound(f"u_{a} >= u_{b}", b)
    lo_n, hi_n = n, idx[-1]
    ranks = None
    if len(idx) > 1 and min(idx[1:]) < n:
        raise CounterexampleFound("offsets must be positive", min(idx[1:]))

    # intruders below n_last + delta_direct (or up to the stream horizon)
    if n_last + delta_direct <= stream_limit:
        stream = PositiveStream(ctx, rec, max_index=stream_limit)
        run = []
        kept = []
        for blk in stream.blocks():
            hits = [(blk.start_rank + i, v) for i, v in enumerate(blk.indices.tolist()) if v in others]
            if hits or (run and len(run) < len(idx)):
                kept.append(blk)
            run.extend(hits)
            if len(run) == len(idx) and stream.processed_index > n_last + delta_direct:
                break
        if len(run) != len(idx):
            raise CounterexampleFound("pattern values missing from the stream", n)
        rks = [r for r, _ in run]
        if [v for _, v in run] != list(idx):
            raise CounterexampleFound("pattern values are out of order in the sorted stream", run[0][1])
        if rks != list(range(rks[0], rks[0] + len(idx))):
            gap = next(r for r in range(rks[0], rks[-1]) if r not in rks)
            blk = next(b for b in kept if b.start_rank <= gap < b.start_rank + len(b.indices))
            m = int(blk.indices[gap - blk.start_rank])
            raise CounterexampleFound(f"u_{m} lies strictly between the pattern values", m)
        ranks = tuple(rks)
        covered = stream.processed_index
        checked["stream_indices"] = [0, covered - 1]
        d_tail_from = covered - n
        notes.append("all indices below the stream horizon compared by certified keys")
    else:
        # m < n: a term can only exceed u_n if |lambda|^m is large enough
        s1, lo1, _ = _log_u_bounds(cmp, n)
        with mp.workprec(ctx.precision):
            lmax = mpmath.log(mpmath.exp(ctx.log_scale.upper) + _mp(ctx.nondominant_r))
            m_star = int(mpmath.floor((lo1 - lmax) / ctx.log_abs_lambda.upper))
        m_star = max(-1, min(m_star, n - 1))
        for m in range(m_star + 1, n):
            _check_m(cmp, m, n, others, lo_n, hi_n)
        checked["below"] = {"excluded_by_growth": [0, m_star], "direct": [m_star + 1, n - 1]}
        for d in range(1, delta_direct + 1):
            _check_m(cmp, n + d, n, others, lo_n, hi_n)
        d_tail_from = delta_direct + 1
        checked["direct_after"] = [1, delta_direct]

    _, _, hi_log = _log_u_bounds(cmp, hi_n)
    if horizon == "matveev":
        inst = lrs_linear_form(ctx)
        d_to, K = _matveev_horizon(ctx, inst, hi_log, n)
        constants.add("matveev_K", mpmath.nstr(K, 12), "rigorous",
                      "3*30^(M+4)(M+1)^5.5 D^2 (1+log D) prod h'")
        constants.add("field_degree_bound", inst.D, "rigorous", "product of factorials of factor degrees")
        complete = True
        horizon_str = f"matveev:{d_to}"
    else:
        d_to = int(horizon)
        complete = False
        horizon_str = f"scan:{d_to}"
    if d_tail_from < d_to:
        _tail_scan(ctx, cmp, n, others, lo_n, hi_n, hi_log, max(1, d_tail_from), d_to,
                   ctx.precision, notes)
    checked["anchor_exclusion"] = [str(max(1, d_tail_from)), str(d_to)]
    constants.add("order_threshold", order_threshold(ctx), "surrogate",
                  "remainder below surrogate relative gap; used only for reporting")
    return VerificationReport(
        ok=True,
        mode=mode,
        indices=idx,
        checked=checked,
        horizon=horizon_str,
        complete=complete,
        precision=ctx.precision,
        ranks=ranks,
        constants=constants.to_json(),
        notes=notes,
    )


def find_witness(ctx: DominantDecomposition, rec: Recurrence, ell: int, T: int, t, N: int = 0,
                 mode: str = "empirical", *, deltas=None, horizon=None,
                 index_budget: int = 50_000_000, precision: int = FRAME_PRECISION) -> PatternWitness:
    """Indices ``n < n + b_2 < ... < n + b_l`` of consecutive sorted values.

    ``n = t_1 (mod T)`` and ``n + b_j = t_j (mod T)``.

    In ``empirical`` mode the sorted stream is scanned for the first run of
    consecutive ranks whose indices fall in the classes ``t`` and increase.
    In ``rigorous`` mode a pattern frame is built, shrunk to half its length,
    and ``n`` is the first index in the right class whose angle lands in it.
    Either way the result is then verified.
    """
    t = tuple(int(x) % int(T) for x in t)
    if mode == "empirical":
        stream = PositiveStream(ctx, rec, max_index=index_budget)
        rank = 0
        while True:
            try:
                hit = locate_index_pattern(stream, T, t, rank)
            except HorizonExhausted as exc:
                raise HorizonExhausted("no empirical witness within the index budget", exc.partial)
            idx = hit.indices
            if idx[0] >= N and all(a < b for a, b in zip(idx, idx[1:])):
                break
            rank = hit.rank + 1
            stream = PositiveStream(ctx, rec, max_index=index_budget)
        b = tuple(x - idx[0] for x in idx[1:])
        w = PatternWitness(idx, b, mode, int(T), t)
    elif mode == "rigorous":
        frame = select_pattern_frame(ctx, ell, T, t, deltas=deltas, precision=precision)
        small = shrink_subinterval(ctx, frame, frame.I.length / 2)
        c = ctx.at_precision(precision)
        with mp.workprec(precision):
            inner = CircleInterval(small.I.lo + small.I.slack, small.I.length - 2 * small.I.slack)
            n = rotation_hit(c.theta, c.phi, inner, T, t[0], max(int(N), order_threshold(ctx)))
        idx = (n,) + tuple(n + b for b in frame.b)
        w = PatternWitness(idx, frame.b, mode, int(T), t, frame=small)
    else:
        raise ValueError("mode must be 'rigorous' or 'empirical'")
    w.record = verify_witness(ctx.at_precision(max(ctx.precision, 256)), rec, w, horizon)
    return w
