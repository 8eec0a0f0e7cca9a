"""Certified signs, magnitudes and order of terms; the sorted positive stream.

Every term is keyed by an enclosure of ``log|u_n|``.  For large ``n`` the key
comes from the dominant part ``scale * cos(n theta + phi) |lambda|^n`` plus a
bound on the remainder; when that is not sharp enough (small ``n``, or a cosine
close to zero) the exact integer is used instead.

The sorted stream of positive values is produced chunk by chunk.  Keys for a
whole chunk of indices are computed with numpy: the rotation angle in 128-bit
fixed point held in four 32-bit limbs, the linear part ``n log|lambda|`` in
double-double arithmetic, the cosine through its distance to the nearest zero
so that its relative accuracy never degrades.  A value is emitted once its key
is below a frontier that lower-bounds every key of a not yet processed index;
ties closer than the error radii are settled by the exact comparator.
"""

from __future__ import annotations

import functools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import mpmath
import numpy as np
from mpmath import mp, mpf

from ._numeric import Ball, PrecisionExhausted
from .lrs_core import DominantDecomposition, Recurrence, eval_term

__all__ = [
    "TermKey",
    "Entry",
    "PositiveEnumeration",
    "PositiveStream",
    "OrderViolation",
    "HorizonExhausted",
    "term_key",
    "compare_terms",
    "Comparator",
    "order_threshold",
    "enumerate_positive",
    "sparsity_horizon",
    "GUARD_SLOPE",
    "GUARD_OFFSET",
]

log = logging.getLogger(__name__)

# Surrogate lower bound |cos(n theta + phi)| >= exp(-GUARD_OFFSET) (n+2)^-GUARD_SLOPE,
# used only to decide how far ahead to look; every use is followed by a
# check that fails loudly if a later key undercuts an emitted one.
GUARD_SLOPE = 2.0
GUARD_OFFSET = 20.0
# Surrogate for the relative gap between distinct terms near index n, used by
# order_threshold.
GAP_SLOPE = 2.0

COMPARISON_LADDER = (128, 256, 1024)
EXACT_INDEX_LIMIT = 1 << 24
MAX_KEY_PRECISION = 1 << 16
MAX_VECTOR_INDEX = (1 << 31) - 1


class OrderViolation(RuntimeError):
    """A key computed later undercut an already emitted value."""


class HorizonExhausted(RuntimeError):
    """A scan reached its budget; ``partial`` describes what was covered."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial or {}


# --------------------------------------------------------------------------
# Single-term keys and comparison


@dataclass(frozen=True)
class TermKey:
    """Sign of ``u_n`` and an enclosure of ``log|u_n|``.

    ``value`` holds the exact integer when ``exact`` is true.
    """

    index: int
    sign: int
    log_magnitude: Ball | None
    exact: bool
    value: int | None = None

    def to_json(self) -> dict:
        return {
            "n": str(self.index),
            "sign": self.sign,
            "log_magnitude": None if self.log_magnitude is None else self.log_magnitude.to_json(),
            "exactness": "exact-integer" if self.exact else "certified-float",
        }


def _exact_key(n: int, u: int) -> TermKey:
    if u == 0:
        return TermKey(n, 0, None, True, 0)
    with mp.workprec(160):
        lg = mpmath.log(abs(mpf(u)))
        return TermKey(n, 1 if u > 0 else -1, Ball(lg, mpf(2) ** -150 * (1 + abs(lg))), True, u)


def term_key(ctx: DominantDecomposition, rec: Recurrence, n: int, tol=None,
             precision: int | None = None) -> TermKey:
    """Sign and log-magnitude enclosure of ``u_n``.

    Parameters
    ----------
    ctx : DominantDecomposition
    rec : Recurrence
    n : int
    tol : float, optional
        Largest acceptable radius of the log-magnitude enclosure; wider
        results fall back to exact evaluation.  Defaults to ``2**-(p-40)``
        at working precision ``p``.
    precision : int, optional
        Working precision in bits; defaults to the context's.
    """
    n = int(n)
    prec = int(precision or ctx.precision)
    tol = mpf(2) ** (-(prec - 40)) if tol is None else mpf(tol)
    need = -(-(prec + n.bit_length() + 16) // 64) * 64
    while True:
        key = _float_key(ctx, n, need, tol)
        if key is not None:
            return key
        if n < EXACT_INDEX_LIMIT:
            return _exact_key(n, eval_term(rec, n))
        # a huge index: only more precision can help
        need *= 2
        if need > MAX_KEY_PRECISION:
            raise PrecisionExhausted(f"cannot enclose u_{n} within {MAX_KEY_PRECISION} bits")


def _float_key(ctx: DominantDecomposition, n: int, need: int, tol):
    c = ctx.at_precision(need)
    with mp.workprec(need):
        x = c.theta.center * n + c.phi.center
        x_err = n * c.theta.radius + c.phi.radius + mpf(2) ** (-need + 4) * (1 + abs(x))
        cs = mpmath.cos(x)
        if abs(cs) <= 2 * x_err:
            return None
        log_v = c.log_scale.center + n * c.log_abs_lambda.center + mpmath.log(abs(cs))
        num_err = (
            c.log_scale.radius + n * c.log_abs_lambda.radius + x_err / abs(cs)
            + mpf(2) ** (-need + 8) * (1 + abs(log_v))
        )
        r, R = c.nondominant_r, c.nondominant_R
        if r == 0:
            q = mpf(0)
        else:
            log_corr = mpmath.log(mpf(r.numerator) / r.denominator) + n * mpmath.log(
                mpf(R.numerator) / R.denominator)
            q = mpmath.exp(log_corr - log_v + num_err)
        if q >= mpf(1) / 2:
            return None
        rad = num_err + 2 * q
        if rad > tol:
            return None
        return TermKey(n, 1 if cs > 0 else -1, Ball(log_v, rad), False)


def compare_terms(k1: TermKey, k2: TermKey, ctx=None, rec=None) -> int:
    """Certified comparison of ``u_{k1.index}`` and ``u_{k2.index}``.

    Returns -1, 0 or 1.  Equality is only reported for equal indices or when
    exact evaluation confirms it.  Undecided float keys are refined along the
    precision ladder and finally compared exactly, which needs ``ctx`` and
    ``rec``.
    """
    if k1.index == k2.index:
        return 0
    res = _compare_keys(k1, k2)
    if res is not None:
        return res
    if ctx is None or rec is None:
        raise ValueError("keys too close to order; pass ctx and rec to refine")
    return Comparator(ctx, rec).compare(k1.index, k2.index)


def _compare_keys(k1: TermKey, k2: TermKey):
    if k1.exact and k2.exact:
        return (k1.value > k2.value) - (k1.value < k2.value)
    if k1.sign != k2.sign:
        return (k1.sign > k2.sign) - (k1.sign < k2.sign)
    if k1.sign == 0:
        return 0
    a, b = k1.log_magnitude, k2.log_magnitude
    # enough bits that center +- radius is not lost to rounding
    bits = 64
    for ball in (a, b):
        if ball.center and ball.radius:
            bits = max(bits, int(mpmath.mag(ball.center)) - int(mpmath.mag(ball.radius)) + 64)
    with mp.workprec(bits):
        if a.upper < b.lower:
            return -k1.sign
        if b.upper < a.lower:
            return k1.sign
    return None


class Comparator:
    """Total order on indices by value, escalating precision as needed."""

    def __init__(self, ctx: DominantDecomposition, rec: Recurrence, ladder=COMPARISON_LADDER):
        self.ctx = ctx
        self.rec = rec
        self.ladder = tuple(ladder)
        self._cache = {}

    def key(self, n: int, level: int = 0) -> TermKey:
        k = (n, level)
        if k not in self._cache:
            bits = self.ladder[level]
            self._cache[k] = term_key(self.ctx, self.rec, n, precision=bits)
        return self._cache[k]

    def compare(self, n1: int, n2: int) -> int:
        if n1 == n2:
            return 0
        for level in range(len(self.ladder)):
            res = _compare_keys(self.key(n1, level), self.key(n2, level))
            if res is not None:
                return res
        if max(n1, n2) < EXACT_INDEX_LIMIT:
            u1, u2 = eval_term(self.rec, n1), eval_term(self.rec, n2)
            return (u1 > u2) - (u1 < u2)
        bits = self.ladder[-1]
        while bits < MAX_KEY_PRECISION:
            bits *= 2
            k1 = term_key(self.ctx, self.rec, n1, precision=bits)
            k2 = term_key(self.ctx, self.rec, n2, precision=bits)
            res = _compare_keys(k1, k2)
            if res is not None:
                return res
        raise PrecisionExhausted(f"cannot order u_{n1} and u_{n2}")

    def value_is_positive(self, n: int) -> bool:
        k = self.key(n)
        return k.sign > 0 or (k.exact and k.value >= 0)


# --------------------------------------------------------------------------
# Order threshold


def _guard(n) -> float:
    return GUARD_SLOPE * math.log(n + 2) + GUARD_OFFSET


def order_threshold(ctx: DominantDecomposition, margin: float = math.log(2)) -> int:
    """Index beyond which the remainder cannot change the order of terms.

    Returns the least ``N`` with ``log(2r) + n log R`` below
    ``log(scale) + n log|lambda| - guard(n) - GAP_SLOPE log(n+2) - margin``
    for all ``n >= N``.  The guard and gap terms are per-instance surrogates
    for lower bounds on ``|cos|`` and on relative gaps; zero remainder gives
    ``N = 0``.
    """
    r, R = ctx.nondominant_r, ctx.nondominant_R
    if r == 0:
        return 0
    L = float(ctx.log_abs_lambda.upper)
    ls = float(ctx.log_scale.lower)
    lr = math.log(2 * float(r))
    lR = math.log(float(R))
    slope = L - lR

    def f(n):
        return n * slope + ls - lr - _guard(n) - GAP_SLOPE * math.log(n + 2) - margin

    def fprime(n):
        return slope - (GUARD_SLOPE + GAP_SLOPE) / (n + 2)

    # f is convex, so once f > 0 and f' > 0 it stays positive
    n = 0
    while not (f(n) > 0 and fprime(n) > 0):
        n += 1
    while n > 0 and f(n - 1) > 0 and fprime(n - 1) > 0:
        n -= 1
    return n


# --------------------------------------------------------------------------
# Vectorised keys for a chunk of indices


@dataclass(frozen=True)
class _ChunkParams:
    beta: tuple
    phase: tuple
    L_parts: tuple
    L_float: float
    log_scale: tuple
    log_r: float
    log_R: float
    coeffs: tuple
    initials: tuple


def _limbs(x) -> tuple:
    v = int(mpmath.floor((x % 1) * (mpf(2) ** 128)))
    return tuple((v >> s) & 0xFFFFFFFF for s in (96, 64, 32, 0))


def _split_float(x, parts: int = 4, bits: int = 21) -> tuple:
    """Split ``x`` into floats with at most ``bits`` significant bits each."""
    out = []
    rem = x
    for _ in range(parts - 1):
        if rem == 0:
            out.append(0.0)
            continue
        e = int(mpmath.floor(mpmath.log(abs(rem), 2)))
        scale = mpf(2) ** (bits - 1 - e)
        piece = mpmath.floor(rem * scale) / scale
        out.append(float(piece))
        rem -= piece
    out.append(float(rem))
    return tuple(out)


def _chunk_params(ctx: DominantDecomposition) -> _ChunkParams:
    c = ctx.at_precision(256)
    with mp.workprec(256):
        two_pi = 2 * mp.pi
        ls = c.log_scale.center
        r, R = c.nondominant_r, c.nondominant_R
        return _ChunkParams(
            beta=_limbs(c.theta.center / two_pi),
            phase=_limbs(c.phi.center / two_pi),
            L_parts=_split_float(c.log_abs_lambda.center),
            L_float=float(c.log_abs_lambda.center),
            log_scale=(float(ls), float(ls - mpf(float(ls)))),
            log_r=-math.inf if r == 0 else math.log(r.numerator) - math.log(r.denominator),
            log_R=math.log(R.numerator) - math.log(R.denominator),
            coeffs=ctx.recurrence.coeffs,
            initials=ctx.recurrence.initials,
        )


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@functools.lru_cache(maxsize=8)
def _prefix_cache(coeffs: tuple, initials: tuple, count: int) -> tuple:
    return tuple(Recurrence(coeffs, initials, check_minimal=False).prefix(count))


def _exact_values(p: _ChunkParams, idx) -> list[int]:
    rec = Recurrence(p.coeffs, p.initials, check_minimal=False)
    idx = [int(i) for i in idx]
    small = [i for i in idx if i < 4096]
    if small:
        top = 1 << max(9, (max(small) + 1).bit_length())
        pre = _prefix_cache(p.coeffs, p.initials, top)
    return [pre[i] if i < 4096 else eval_term(rec, i) for i in idx]


_Q_EXACT = 2.0 ** -30
_M32 = np.uint64(0xFFFFFFFF)


def _chunk_keys(p: _ChunkParams, start: int, stop: int):
    """Keys of the nonnegative terms with index in ``[start, stop)``.

    Returns ``(n, hi, lo, err, exact)`` where ``hi + lo`` approximates
    ``log u_n`` within ``err`` and ``exact`` maps indices evaluated exactly
    to their values.
    """
    n = np.arange(start, stop, dtype=np.uint64)
    b1, b2, b3, b4 = (np.uint64(v) for v in p.beta)
    f1, f2, f3, f4 = (np.uint64(v) for v in p.phase)
    s32 = np.uint64(32)
    acc = n * b4 + f4
    w4 = acc & _M32
    acc = n * b3 + f3 + (acc >> s32)
    w3 = acc & _M32
    acc = n * b2 + f2 + (acc >> s32)
    w2 = acc & _M32
    acc = n * b1 + f1 + (acc >> s32)
    w1 = acc & _M32
    top = (w1 << s32) | w2                      # first 64 fractional bits
    low = (w3.astype(np.float64) + w4.astype(np.float64) * 2.0 ** -32) * 2.0 ** -32
    half = (top >> np.uint64(63)).astype(bool)  # angle in the second half turn
    y = (top & np.uint64((1 << 63) - 1)).astype(np.int64)
    # e = 1/4 - (angle mod 1/2), in units of 2^-64, kept exact as an integer
    e_int = np.int64(1 << 62) - y
    e = (e_int.astype(np.float64) - low) * 2.0 ** -64
    sign = np.sign(e) * np.where(half, -1.0, 1.0)
    abs_e = np.abs(e)
    with np.errstate(divide="ignore"):
        lc = np.log(np.sin(2.0 * np.pi * abs_e))

    nf = n.astype(np.float64)
    a1, a2, a3, a4 = p.L_parts
    s, err_acc = _two_sum(nf * a1, nf * a2)
    err_acc = err_acc + (nf * a3 + nf * a4)
    s, e2 = _two_sum(s, p.log_scale[0])
    err_acc = err_acc + e2 + p.log_scale[1]
    # lc = -inf at exact zeros of the cosine; those entries are flagged below
    with np.errstate(invalid="ignore"):
        s, e3 = _two_sum(s, lc)
        err_acc = err_acc + e3
        hi = s + err_acc
        lo = err_acc - (hi - s)

    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        err = 1e-15 * (1.0 + np.abs(lc)) + 1e-17 * np.abs(hi) + 2.0 ** -95 / abs_e
        if p.log_r == -math.inf:
            q = np.zeros_like(hi)
        else:
            q = np.exp(p.log_r + nf * p.log_R - hi + 1e-9 * np.abs(hi) + err) * (1 + 1e-9)
    err = err + 2.0 * q
    flag = (q > _Q_EXACT) | ~np.isfinite(lc) | (abs_e == 0)
    keep = (sign > 0) & ~flag

    out_n = n[keep].astype(np.int64)
    out_hi, out_lo, out_err = hi[keep], lo[keep], err[keep]
    exact = {}
    if flag.any():
        fidx = n[flag].astype(np.int64)
        vals = _exact_values(p, fidx)
        ex_n, ex_hi, ex_lo = [], [], []
        for i, v in zip(fidx.tolist(), vals):
            if v < 0:
                continue
            exact[i] = v
            ex_n.append(i)
            if v == 0:
                ex_hi.append(-math.inf)
                ex_lo.append(0.0)
            else:
                with mp.workprec(128):
                    lg = mpmath.log(mpf(v))
                    h = float(lg)
                    ex_hi.append(h)
                    ex_lo.append(float(lg - mpf(h)))
        if ex_n:
            out_n = np.concatenate([out_n, np.asarray(ex_n, dtype=np.int64)])
            out_hi = np.concatenate([out_hi, np.asarray(ex_hi)])
            out_lo = np.concatenate([out_lo, np.asarray(ex_lo)])
            out_err = np.concatenate([out_err, np.full(len(ex_n), 1e-28)])
    return out_n, out_hi, out_lo, out_err, exact


# --------------------------------------------------------------------------
# The sorted positive stream


@dataclass
class Block:
    """Consecutive ranks ``start_rank ...`` of the sorted stream."""

    start_rank: int
    indices: np.ndarray
    log_values: np.ndarray


class PositiveStream:
    """Iterates the positive values of an admissible recurrence in order.

    Parameters
    ----------
    ctx : DominantDecomposition
    rec : Recurrence
    chunk_size : int
        Largest number of indices evaluated per chunk.
    workers : int
        Worker processes for chunk evaluation.  The output does not depend on
        this number.
    max_index : int
        Stop (raising :class:`HorizonExhausted`) before evaluating beyond it.
    """

    def __init__(self, ctx: DominantDecomposition, rec: Recurrence, *, chunk_size: int = 1 << 18,
                 first_chunk: int = 256, workers: int = 1, max_index: int = MAX_VECTOR_INDEX):
        self.ctx = ctx
        self.rec = rec
        self.chunk_size = int(chunk_size)
        self.first_chunk = int(first_chunk)
        self.workers = int(workers)
        self.max_index = min(int(max_index), MAX_VECTOR_INDEX)
        self.params = _chunk_params(ctx)
        self.comparator = Comparator(ctx, rec)
        self.collisions: list = []
        self.ties_resolved = 0
        self.exact_values: dict = {}
        self.processed_index = 0

    # chunk schedule depends only on chunk_size and first_chunk
    def _chunks(self) -> Iterator[tuple]:
        a, size = 0, self.first_chunk
        while a <= self.max_index:
            b = min(a + size, self.max_index + 1)
            yield a, b
            a = b
            size = min(size * 2, self.chunk_size)

    def _computed(self) -> Iterator[tuple]:
        if self.workers <= 1:
            for a, b in self._chunks():
                yield a, b, _chunk_keys(self.params, a, b)
            return
        with ProcessPoolExecutor(self.workers) as pool:
            pending = []
            chunks = self._chunks()
            for _ in range(2 * self.workers):
                nxt = next(chunks, None)
                if nxt is None:
                    break
                pending.append((nxt, pool.submit(_chunk_keys, self.params, *nxt)))
            while pending:
                (a, b), fut = pending.pop(0)
                nxt = next(chunks, None)
                if nxt is not None:
                    pending.append((nxt, pool.submit(_chunk_keys, self.params, *nxt)))
                yield a, b, fut.result()

    def frontier(self, b: int) -> float:
        """Lower bound (surrogate) for ``log u_m`` over all positive ``u_m``, ``m >= b``."""
        p = self.params
        return p.log_scale[0] + b * p.L_float - _guard(b) - 1e-9 * abs(b * p.L_float)

    def _cmp_n(self, i: int, j: int) -> int:
        vi, vj = self.exact_values.get(i), self.exact_values.get(j)
        if vi is not None and vj is not None:
            return (vi > vj) - (vi < vj)
        return self.comparator.compare(i, j)

    def _resolve(self, n, key, err, hi, lo):
        """Fix the order inside clusters of keys closer than their radii."""
        if len(n) < 2:
            return n, key
        with np.errstate(invalid="ignore"):
            d = np.diff(hi) + np.diff(lo)
        amb = ~(d > (err[:-1] + err[1:]))
        if not amb.any():
            return n, key
        n = n.copy()
        key = key.copy()
        drop = np.zeros(len(n), dtype=bool)
        idx = np.flatnonzero(amb)
        # walk clusters of consecutive ambiguous pairs
        pos = 0
        while pos < len(idx):
            s = idx[pos]
            e = s + 1
            while pos + 1 < len(idx) and idx[pos + 1] == e:
                pos += 1
                e += 1
            pos += 1
            members = list(range(s, e + 1))
            # equal values keep the smallest index first
            order = sorted(members, key=functools.cmp_to_key(
                lambda x, y: self._cmp_n(int(n[x]), int(n[y])) or (int(n[x]) > int(n[y])) - (int(n[x]) < int(n[y]))))
            new_n = [int(n[x]) for x in order]
            new_k = [key[x] for x in order]
            for k, x in enumerate(members):
                n[x] = new_n[k]
                key[x] = new_k[k]
            for k in range(1, len(members)):
                if self._cmp_n(new_n[k - 1], new_n[k]) == 0:
                    drop[members[k]] = True
                    self.collisions.append((new_n[k - 1], new_n[k]))
                    log.info("equal values at indices %d and %d", new_n[k - 1], new_n[k])
            self.ties_resolved += 1
        return n[~drop], key[~drop]

    def blocks(self) -> Iterator[Block]:
        """Yield the stream as blocks of consecutive ranks."""
        pend_n = np.empty(0, dtype=np.int64)
        pend_hi = np.empty(0)
        pend_lo = np.empty(0)
        pend_err = np.empty(0)
        last = None  # (n, key, err) of the last emitted entry
        rank = 0
        for a, b, (cn, chi, clo, cerr, exact) in self._computed():
            self.exact_values.update(exact)
            if last is not None and len(cn):
                ck = chi + clo
                low = ck + cerr < last[1] - last[2]
                if low.any():
                    bad = int(cn[np.flatnonzero(low)[0]])
                    raise OrderViolation(
                        f"index {bad} has a smaller value than the emitted index {last[0]}")
            pend_n = np.concatenate([pend_n, cn])
            pend_hi = np.concatenate([pend_hi, chi])
            pend_lo = np.concatenate([pend_lo, clo])
            pend_err = np.concatenate([pend_err, cerr])
            order = np.lexsort((pend_lo, pend_hi))
            pend_n, pend_hi, pend_lo, pend_err = (
                pend_n[order], pend_hi[order], pend_lo[order], pend_err[order])
            self.processed_index = b
            F = self.frontier(b)
            key = pend_hi + pend_lo
            k = int(np.searchsorted(key + pend_err, F, side="left"))
            # only cut where the gap to the next entry is certified
            while 0 < k < len(key) and not (
                (pend_hi[k] - pend_hi[k - 1]) + (pend_lo[k] - pend_lo[k - 1])
                > pend_err[k] + pend_err[k - 1]
            ):
                k -= 1
            if k == 0:
                continue
            out_n, out_key = pend_n[:k], key[:k]
            out_err = pend_err[:k]
            out_n, out_key = self._resolve(out_n, out_key, out_err, pend_hi[:k], pend_lo[:k])
            if last is not None and len(out_n):
                c = self._cmp_n(int(last[0]), int(out_n[0])) if out_key[0] - last[1] <= last[2] + out_err[0] else -1
                if c > 0:
                    raise OrderViolation("emitted order is not monotone")
                if c == 0:
                    self.collisions.append((int(last[0]), int(out_n[0])))
                    out_n, out_key = out_n[1:], out_key[1:]
            if len(out_n):
                last = (int(out_n[-1]), float(out_key[-1]), float(pend_err[k - 1]))
                yield Block(rank, out_n, out_key)
                rank += len(out_n)
            pend_n, pend_hi, pend_lo, pend_err = (
                pend_n[k:], pend_hi[k:], pend_lo[k:], pend_err[k:])
        raise HorizonExhausted(
            f"index horizon {self.max_index} reached",
            {"ranks_emitted": rank, "max_index": self.max_index},
        )

    def __iter__(self) -> Iterator[tuple]:
        """Yield ``(rank, index)`` pairs."""
        for blk in self.blocks():
            for i, n in enumerate(blk.indices.tolist()):
                yield blk.start_rank + i, n

    def indices(self, count: int) -> np.ndarray:
        """Source indices of the first ``count`` ranks."""
        parts, got = [], 0
        if count <= 0:
            return np.empty(0, dtype=np.int64)
        for blk in self.blocks():
            take = min(len(blk.indices), count - got)
            parts.append(blk.indices[:take])
            got += take
            if got >= count:
                break
        return np.concatenate(parts)

    def manifest(self) -> dict:
        return {
            "precision_ladder": list(self.comparator.ladder) + ["exact"],
            "chunk_size": self.chunk_size,
            "first_chunk": self.first_chunk,
            "guard": {
                "slope": GUARD_SLOPE,
                "offset": GUARD_OFFSET,
                "mode": "surrogate",
                "recipe": "log|cos| >= -offset - slope*log(n+2); checked against every later key",
            },
            "exact_fallback_below_relative_remainder": _Q_EXACT,
            "processed_index": self.processed_index,
            "collisions": [list(c) for c in self.collisions],
            "ties_resolved": self.ties_resolved,
        }


@dataclass(frozen=True)
class Entry:
    rank: int
    index: int
    key: TermKey


@dataclass
class PositiveEnumeration:
    """A prefix of the sorted positive stream with its provenance."""

    entries: list
    order_threshold: int
    manifest: dict = field(default_factory=dict)
    recurrence: Recurrence | None = None

    @property
    def indices(self) -> list[int]:
        return [e.index for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def enumerate_positive(ctx: DominantDecomposition, rec: Recurrence, count: int, *,
                       workers: int = 1, chunk_size: int = 1 << 18) -> PositiveEnumeration:
    """The ``count`` smallest elements of ``{u_n} ∩ N`` with their indices.

    Examples
    --------
    >>> from prodisjunct.lrs_core import Recurrence, dominant_decomposition
    >>> rec = Recurrence((6, -13, 10), (2, 4, 7))
    >>> enumerate_positive(dominant_decomposition(rec), rec, 6).indices
    [0, 1, 2, 4, 3, 10]
    """
    stream = PositiveStream(ctx, rec, workers=workers, chunk_size=chunk_size)
    idx = stream.indices(count).tolist()
    entries = []
    for m, n in enumerate(idx):
        if n in stream.exact_values:
            key = _exact_key(n, stream.exact_values[n])
        else:
            key = stream.comparator.key(n)
        entries.append(Entry(m, n, key))
    return PositiveEnumeration(entries, order_threshold(ctx), stream.manifest(), rec)


def sparsity_horizon(ctx: DominantDecomposition, rec: Recurrence, gap: int, *,
                     min_ranks: int = 10_000, max_ranks: int = 10_000_000) -> int:
    """A rank ``M`` with ``p_{m+1} - p_m >= gap`` for every ``m >= M``.

    Scans the stream, checking each gap certifiably (exactly where values
    are exact, from log keys otherwise), until at least ``min_ranks`` ranks
    are covered and the values are so large that the surrogate relative-gap
    bound ``GAP_SLOPE log(n+2) + guard(n)`` already forces absolute gaps
    beyond ``gap``.  Returns one more than the last rank with a short gap.
    """
    gap = int(gap)
    if gap <= 1:
        return 0
    stream = PositiveStream(ctx, rec)
    log_gap = math.log(gap)
    last_bad = -1
    prev_key = None
    prev_n = None
    for blk in stream.blocks():
        keys = blk.log_values
        idx = blk.indices
        for i in range(len(idx)):
            n = int(idx[i])
            k = float(keys[i])
            if prev_n is not None:
                if _short_gap(stream, prev_n, n, prev_key, k, gap):
                    last_bad = blk.start_rank + i - 1
            prev_n, prev_key = n, k
            rank = blk.start_rank + i
            tail = k - GAP_SLOPE * math.log(n + 2) - _guard(n)
            if rank >= min_ranks and tail > log_gap + 1:
                return last_bad + 1
            if rank >= max_ranks:
                raise HorizonExhausted("sparsity scan budget exhausted", {"ranks": rank})
    return last_bad + 1


def _short_gap(stream: PositiveStream, n1: int, n2: int, k1: float, k2: float, gap: int) -> bool:
    v1 = stream.exact_values.get(n1)
    v2 = stream.exact_values.get(n2)
    if v1 is not None and v2 is not None:
        return v2 - v1 < gap
    if k1 > 200 and k2 - k1 > 1e-12:
        # p2 - p1 = p1 (exp(k2 - k1) - 1); float error in the keys is ~1e-15
        return k1 + math.log(math.expm1(k2 - k1 - 1e-12)) < math.log(gap)
    u1 = v1 if v1 is not None else eval_term(stream.rec, n1)
    u2 = v2 if v2 is not None else eval_term(stream.rec, n2)
    return u2 - u1 < gap
