"""Residues of the sorted positive stream modulo M.

For ``M >= 2`` the residues ``u_n mod M`` are ultimately periodic with some
period ``T``.  Because ``theta / pi`` is irrational, every residue class of
indices modulo ``T`` contains infinitely many positive terms, so the residues
seen infinitely often in the sorted stream are exactly the residues of the
eventual cycle.  Terms before the preperiod may carry other residues; they are
located in the stream to obtain the rank threshold ``N_M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .enumeration import HorizonExhausted, PositiveEnumeration, PositiveStream
from .lrs_core import DominantDecomposition, ModularCycle, Recurrence, modular_sequence

__all__ = [
    "ResidueProfile",
    "FactorHit",
    "UnsatisfiablePattern",
    "residue_profile",
    "residue_word",
    "find_factor",
    "locate_factor",
    "locate_index_pattern",
]

DEFAULT_INDEX_BUDGET = 20_000_000


class UnsatisfiablePattern(ValueError):
    """The pattern uses a residue that occurs only finitely often."""


@dataclass(frozen=True)
class ResidueProfile:
    """Residues occurring infinitely often and where the stream settles.

    Attributes
    ----------
    M : int
    S : tuple
        Residues that occur infinitely often in the sorted stream.
    N : int
        Least rank from which every residue lies in ``S``.
    T : int
        Period of ``u_n mod M``.
    class_map : dict
        For each ``s`` in ``S`` the classes ``t`` modulo ``T`` with
        ``u_{kT+t} = s (mod M)`` for all large ``k``.
    index_threshold : int
        Preperiod of ``u_n mod M``, the index from which the cycle applies.
    """

    M: int
    S: tuple
    N: int
    T: int
    class_map: dict
    index_threshold: int
    cycle: ModularCycle

    def to_json(self) -> dict:
        return {
            "schema": "prodisjunct.residue_profile/1",
            "M": self.M,
            "S_M": list(self.S),
            "N_M": self.N,
            "T": self.T,
            "class_map": {str(s): list(ts) for s, ts in self.class_map.items()},
            "index_threshold": self.index_threshold,
            "cycle": self.cycle.to_json(),
        }


def residue_profile(rec: Recurrence, enumeration, M: int,
                    ctx: DominantDecomposition | None = None) -> ResidueProfile:
    """Compute ``S_M``, ``N_M``, the period and the class map.

    Parameters
    ----------
    rec : Recurrence
    enumeration : PositiveStream or None
        Stream used to rank the early terms whose residue is outside the
        cycle.  Built from ``ctx`` when omitted and needed.
    M : int
    ctx : DominantDecomposition, optional
    """
    cyc = modular_sequence(rec, M)
    S = tuple(sorted(set(cyc.cycle)))
    T = cyc.period
    class_map = {s: [] for s in S}
    for t in range(T):
        class_map[cyc.cycle[(t - cyc.preperiod) % T]].append(t)
    class_map = {s: tuple(ts) for s, ts in class_map.items()}

    early = rec.prefix(cyc.preperiod)
    stray = {n: u for n, u in enumerate(early) if u >= 0 and u % M not in S}
    N = 0
    if stray:
        stream = enumeration
        if stream is None:
            if ctx is None:
                from .lrs_core import dominant_decomposition

                ctx = dominant_decomposition(rec)
            stream = PositiveStream(ctx, rec)
        stray_values = set(stray.values())
        ceiling = math.log(max(stray_values)) if max(stray_values) > 0 else -math.inf
        last_rank = -1
        for blk in stream.blocks():
            for i, n in enumerate(blk.indices.tolist()):
                value = stream.exact_values.get(n)
                if value is not None and value in stray_values:
                    last_rank = blk.start_rank + i
            if len(blk.log_values) and blk.log_values[-1] > ceiling + 1e-9:
                break
        N = last_rank + 1
    return ResidueProfile(M, S, N, T, class_map, cyc.preperiod, cyc)


def residue_word(stream, M: int, ranks: range) -> list[int]:
    """Residues modulo ``M`` of the stream entries with rank in ``ranks``."""
    ranks = range(ranks.start, ranks.stop) if isinstance(ranks, range) else range(*ranks)
    if len(ranks) == 0:
        return []
    if isinstance(stream, PositiveEnumeration):
        cyc = modular_sequence(stream.recurrence, M)
        idx = stream.indices[ranks.start:ranks.stop]
        return cyc.residues(np.asarray(idx, dtype=np.int64)).tolist()
    cyc = modular_sequence(stream.rec, M)
    idx = stream.indices(ranks.stop)[ranks.start:]
    return cyc.residues(idx).tolist()


@dataclass(frozen=True)
class FactorHit:
    """First occurrence of a factor: its rank, source indices and letters."""

    rank: int
    indices: tuple
    letters: tuple
    scanned_index: int

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "indices": [str(n) for n in self.indices],
            "letters": list(self.letters),
            "scanned_index": self.scanned_index,
        }


def _scan(stream: PositiveStream, letters_of, pattern, from_rank: int) -> FactorHit:
    pat = np.asarray(pattern, dtype=np.int64)
    k = len(pat)
    if k == 0:
        raise ValueError("empty pattern")
    carry_idx = np.empty(0, dtype=np.int64)
    carry_start = 0
    try:
        for blk in stream.blocks():
            idx = np.concatenate([carry_idx, blk.indices])
            base = blk.start_rank - len(carry_idx)
            let = letters_of(idx)
            if len(idx) >= k:
                width = len(idx) - k + 1
                mask = np.ones(width, dtype=bool)
                for j in range(k):
                    mask &= let[j:j + width] == pat[j]
                if from_rank > base:
                    mask[: max(0, min(width, from_rank - base))] = False
                hits = np.flatnonzero(mask)
                if len(hits):
                    p = int(hits[0])
                    return FactorHit(
                        base + p,
                        tuple(int(x) for x in idx[p:p + k]),
                        tuple(int(x) for x in let[p:p + k]),
                        stream.processed_index,
                    )
            carry_idx = idx[max(0, len(idx) - (k - 1)):] if k > 1 else idx[:0]
            carry_start = base + len(idx) - len(carry_idx)
    except HorizonExhausted as exc:
        partial = dict(exc.partial)
        partial["scanned_through_rank"] = carry_start + len(carry_idx) - 1
        raise HorizonExhausted(
            f"no occurrence within the index budget {stream.max_index}", partial
        ) from None
    raise AssertionError("stream ended without exhausting its horizon")


def locate_factor(stream: PositiveStream, M: int, factor, from_rank: int = 0,
                  profile: ResidueProfile | None = None) -> FactorHit:
    """First occurrence of ``factor`` in the residue word, with its indices."""
    factor = [int(x) for x in factor]
    profile = profile or residue_profile(stream.rec, stream, M, stream.ctx)
    bad = [x for x in factor if x not in profile.S]
    if bad:
        raise UnsatisfiablePattern(
            f"residues {bad} occur only finitely often modulo {M} (S_M = {list(profile.S)})"
        )
    cyc = profile.cycle
    return _scan(stream, cyc.residues, factor, from_rank)


def find_factor(stream: PositiveStream, M: int, factor, from_rank: int = 0,
                index_budget: int = DEFAULT_INDEX_BUDGET) -> int:
    """Least rank ``>= from_rank`` where ``factor`` occurs in ``<p_m mod M>``.

    Raises
    ------
    HorizonExhausted
        When no occurrence is found before source index ``index_budget``.
    """
    if stream.max_index > index_budget:
        stream.max_index = int(index_budget)
    return locate_factor(stream, M, factor, from_rank).rank


def locate_index_pattern(stream: PositiveStream, T: int, classes, from_rank: int = 0) -> FactorHit:
    """First run of consecutive ranks whose source indices lie in ``classes`` mod ``T``."""
    return _scan(stream, lambda idx: idx % int(T), [int(c) % int(T) for c in classes], from_rank)
