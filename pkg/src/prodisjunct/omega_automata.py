"""Deterministic Muller automata, transducers and acceptance of infinite words.

Three kinds of infinite input are handled exactly:

* ultimately periodic words ``u v^omega`` (:class:`UPWord`), by simulating
  until a (state, position in ``v``) pair repeats;
* disjunctive streams, in which every finite word over a letter set ``S``
  occurs beyond some rank ``N``.  Once the run sits in a bottom strongly
  connected component of the automaton restricted to ``S``, it never leaves
  it and visits every state in it infinitely often, so that component is the
  infinity set;
* characteristic words of sparse predicates, via the contraction of long
  0-blocks and a transducer from residues of consecutive positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Iterable, Iterator

import numpy as np

__all__ = [
    "MullerAutomaton",
    "Transducer",
    "UPWord",
    "DisjunctiveStream",
    "ContractionParams",
    "PredicateDecision",
    "AutomatonFormatError",
    "StabilizationBudgetExhausted",
    "run_finite",
    "inf_set_up",
    "accepts_up",
    "inf_set_disjunctive",
    "accepts_disjunctive",
    "transduce",
    "zero_graph_params",
    "zero_block",
    "contraction_params",
    "gap_block_length",
    "gap_transducer",
    "SparsePredicate",
    "PeriodicPredicate",
    "LRSPredicate",
    "decide_predicate_acceptance",
]

DEFAULT_BUDGET = 10_000_000


class AutomatonFormatError(ValueError):
    """Malformed or nondeterministic automaton or transducer description."""


class StabilizationBudgetExhausted(RuntimeError):
    """The run did not reach a bottom component within the letter budget."""


def _lookup(keys: Iterable, key):
    """Match ``key`` against ``keys`` directly or by string form (JSON keys are strings)."""
    table = {str(k): k for k in keys}
    if key in table.values():
        return key
    if str(key) in table:
        return table[str(key)]
    raise KeyError(key)


# --------------------------------------------------------------------------
# Automata and words


@dataclass(frozen=True, eq=False)
class MullerAutomaton:
    """Deterministic Muller automaton ``(alphabet, states, initial, delta, family)``.

    ``delta[q][a]`` is the successor of ``q`` on letter ``a`` and must be
    defined for every pair.  The run on an infinite word is accepting when
    its infinity set belongs to ``accepting_family``.
    """

    alphabet: tuple
    states: tuple
    initial: object
    delta: dict
    accepting_family: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "states", tuple(self.states))
        if len(set(self.states)) != len(self.states) or not self.states:
            raise AutomatonFormatError("states must be distinct and nonempty")
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise AutomatonFormatError("alphabet must be distinct and nonempty")
        if self.initial not in self.states:
            raise AutomatonFormatError(f"initial state {self.initial!r} is not a state")
        table = {}
        for q in self.states:
            row = self.delta.get(q)
            if row is None:
                raise AutomatonFormatError(f"no transitions for state {q!r}")
            out = {}
            for a in self.alphabet:
                if a not in row:
                    raise AutomatonFormatError(f"missing transition ({q!r}, {a!r})")
                t = row[a]
                if isinstance(t, (list, tuple, set, frozenset)):
                    raise AutomatonFormatError("nondeterministic transition; expected a single state")
                if t not in self.states:
                    raise AutomatonFormatError(f"transition ({q!r}, {a!r}) leads to unknown state {t!r}")
                out[a] = t
            table[q] = out
        object.__setattr__(self, "delta", table)
        fam = frozenset(frozenset(F) for F in self.accepting_family)
        for F in fam:
            if not F <= set(self.states):
                raise AutomatonFormatError("accepting sets must consist of states")
        object.__setattr__(self, "accepting_family", fam)

    def step(self, q, a):
        return self.delta[q][a]

    def accepts_inf(self, inf) -> bool:
        return frozenset(inf) in self.accepting_family

    @classmethod
    def from_json(cls, data: dict) -> "MullerAutomaton":
        """Read ``{"alphabet", "states", "initial", "delta", "accepting_family"}``."""
        try:
            alphabet = list(data["alphabet"])
            states = list(data["states"])
            initial = _lookup(states, data["initial"])
            delta = {}
            for qk, row in data["delta"].items():
                q = _lookup(states, qk)
                if not isinstance(row, dict):
                    raise AutomatonFormatError(f"row for {qk!r} must be an object")
                delta[q] = {}
                for ak, t in row.items():
                    if isinstance(t, (list, dict)):
                        raise AutomatonFormatError("nondeterministic transition; expected a single state")
                    delta[q][_lookup(alphabet, ak)] = _lookup(states, t)
            family = [frozenset(_lookup(states, s) for s in F) for F in data.get("accepting_family", [])]
        except KeyError as exc:
            raise AutomatonFormatError(f"unknown or missing entry {exc}") from None
        return cls(tuple(alphabet), tuple(states), initial, delta, frozenset(family))

    def to_json(self) -> dict:
        return {
            "schema": "prodisjunct.muller_automaton/1",
            "alphabet": list(self.alphabet),
            "states": list(self.states),
            "initial": self.initial,
            "delta": {str(q): {str(a): t for a, t in row.items()} for q, row in self.delta.items()},
            "accepting_family": sorted(sorted(F, key=str) for F in self.accepting_family),
        }


@dataclass(frozen=True, eq=False)
class Transducer:
    """Deterministic transducer; ``delta[q][a] = (next_state, output_word)``."""

    in_alphabet: tuple
    out_alphabet: tuple
    states: tuple
    initial: object
    delta: dict

    def __post_init__(self):
        object.__setattr__(self, "in_alphabet", tuple(self.in_alphabet))
        object.__setattr__(self, "out_alphabet", tuple(self.out_alphabet))
        object.__setattr__(self, "states", tuple(self.states))
        if self.initial not in self.states:
            raise AutomatonFormatError("initial state is not a state")
        outs = set(self.out_alphabet)
        table = {}
        for q in self.states:
            row = self.delta.get(q)
            if row is None:
                raise AutomatonFormatError(f"no transitions for state {q!r}")
            table[q] = {}
            for a in self.in_alphabet:
                if a not in row:
                    raise AutomatonFormatError(f"missing transition ({q!r}, {a!r})")
                t, w = row[a]
                if t not in self.states or not set(w) <= outs:
                    raise AutomatonFormatError(f"bad transition ({q!r}, {a!r})")
                table[q][a] = (t, tuple(w))
        object.__setattr__(self, "delta", table)

    def step(self, q, a):
        return self.delta[q][a]

    @classmethod
    def from_json(cls, data: dict) -> "Transducer":
        try:
            ins, outs, states = list(data["in_alphabet"]), list(data["out_alphabet"]), list(data["states"])
            delta = {}
            for qk, row in data["delta"].items():
                q = _lookup(states, qk)
                delta[q] = {
                    _lookup(ins, ak): (_lookup(states, t), tuple(_lookup(outs, x) for x in w))
                    for ak, (t, w) in row.items()
                }
            return cls(ins, outs, states, _lookup(states, data["initial"]), delta)
        except (KeyError, ValueError, TypeError) as exc:
            raise AutomatonFormatError(f"malformed transducer: {exc}") from None

    def to_json(self) -> dict:
        return {
            "schema": "prodisjunct.transducer/1",
            "in_alphabet": list(self.in_alphabet),
            "out_alphabet": list(self.out_alphabet),
            "states": list(self.states),
            "initial": self.initial,
            "delta": {str(q): {str(a): [t, list(w)] for a, (t, w) in row.items()}
                      for q, row in self.delta.items()},
        }


def _primitive_root(v: tuple) -> tuple:
    n = len(v)
    for p in range(1, n + 1):
        if n % p == 0 and v[:p] * (n // p) == v:
            return v[:p]
    return v


@dataclass(frozen=True)
class UPWord:
    """The infinite word ``prefix cycle cycle cycle ...``."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise ValueError("cycle must be nonempty")

    def normalized(self) -> "UPWord":
        """Shortest prefix and cycle describing the same word."""
        u, v = list(self.prefix), _primitive_root(self.cycle)
        while u and u[-1] == v[-1]:
            u.pop()
            v = (v[-1],) + v[:-1]
        return UPWord(tuple(u), v)

    def letter(self, i: int):
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def take(self, n: int) -> list:
        return [self.letter(i) for i in range(n)]

    def __iter__(self):
        yield from self.prefix
        while True:
            yield from self.cycle


@dataclass
class DisjunctiveStream:
    """A computable word that is disjunctive relative to ``S`` beyond rank ``N``.

    ``letters(rank)`` returns an iterator over the letters from ``rank`` on.
    Disjunctivity is the caller's promise; :func:`accepts_disjunctive` relies
    on it.
    """

    letters: Callable[[int], Iterator]
    S: frozenset
    N: int = 0
    occurrence: Callable | None = None

    def __post_init__(self):
        self.S = frozenset(self.S)
        self.N = int(self.N)

    def take(self, n: int) -> list:
        it = self.letters(0)
        return [next(it) for _ in range(n)]


# --------------------------------------------------------------------------
# Runs


def run_finite(A: MullerAutomaton, w) -> list:
    """States visited while reading ``w``, starting with the initial state."""
    q = A.initial
    out = [q]
    for a in w:
        row = A.delta[q]
        if a not in row:
            raise KeyError(f"letter {a!r} is not in the alphabet")
        q = row[a]
        out.append(q)
    return out


def _inf_up(step, q0, w: UPWord, label=None) -> frozenset:
    """Infinity set of a deterministic run on ``w``.

    ``label(q)`` maps a state to the set it contributes (``{q}`` by
    default), which lets product constructions report the visited states of
    the inner machine.
    """
    q = q0
    for a in w.prefix:
        q = step(q, a)
    v = w.cycle
    seen = {}
    trace = []
    i = 0
    while (q, i) not in seen:
        seen[(q, i)] = len(trace)
        q = step(q, v[i])
        trace.append(q)
        i = (i + 1) % len(v)
    start = seen[(q, i)]
    loop = trace[start:]
    if label is None:
        return frozenset(loop)
    return frozenset().union(*(label(s) for s in loop))


def inf_set_up(A: MullerAutomaton, w: UPWord) -> frozenset:
    """Exact set of states visited infinitely often on ``w``."""
    return _inf_up(A.step, A.initial, w)


def accepts_up(A: MullerAutomaton, w: UPWord) -> bool:
    return A.accepts_inf(inf_set_up(A, w))


class _BottomTest:
    """Memoised test "q lies in a bottom component of the S-restricted graph"."""

    def __init__(self, step, letters):
        self.step = step
        self.letters = tuple(letters)
        self.memo = {}

    def reach(self, q) -> set:
        seen = {q}
        todo = [q]
        while todo:
            s = todo.pop()
            for a in self.letters:
                t = self.step(s, a)
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen

    def component(self, q):
        """The bottom component containing ``q``, or ``None``."""
        if q in self.memo:
            return self.memo[q]
        R = self.reach(q)
        preds = {s: [] for s in R}
        for s in R:
            for a in self.letters:
                preds[self.step(s, a)].append(s)
        # q lies in a bottom component iff every state reachable from q reaches q back
        back = {q}
        todo = [q]
        while todo:
            for p in preds[todo.pop()]:
                if p not in back:
                    back.add(p)
                    todo.append(p)
        if len(back) == len(R):
            result = frozenset(R)
            for s in R:
                self.memo[s] = result
            return result
        self.memo[q] = None
        return None


def _inf_disjunctive(step, q0, stream: DisjunctiveStream, budget: int, label=None):
    test = _BottomTest(step, sorted(stream.S, key=str))
    q = q0
    rank = 0
    for a in stream.letters(0):
        if rank >= stream.N:
            comp = test.component(q)
            if comp is not None:
                if label is None:
                    return comp, rank
                return frozenset().union(*(label(s) for s in comp)), rank
        if rank >= budget:
            break
        q = step(q, a)
        rank += 1
    raise StabilizationBudgetExhausted(
        f"no bottom component reached within {budget} letters beyond rank {stream.N}"
    )


def inf_set_disjunctive(A: MullerAutomaton, stream: DisjunctiveStream,
                        budget: int = DEFAULT_BUDGET) -> tuple[frozenset, int]:
    """Infinity set of the run on a disjunctive stream and the rank where it settled."""
    if isinstance(stream, UPWord):
        raise TypeError("ultimately periodic words are not disjunctive; use inf_set_up")
    if not set(stream.S) <= set(A.alphabet):
        raise ValueError("letters of S must belong to the alphabet")
    return _inf_disjunctive(A.step, A.initial, stream, budget)


def accepts_disjunctive(A: MullerAutomaton, stream: DisjunctiveStream,
                        budget: int = DEFAULT_BUDGET) -> bool:
    """Muller acceptance of a disjunctive stream.

    Raises
    ------
    TypeError
        For :class:`UPWord` input, which is never disjunctive.
    StabilizationBudgetExhausted
        When the run has not settled after ``budget`` letters.
    """
    inf, _ = inf_set_disjunctive(A, stream, budget)
    return A.accepts_inf(inf)


def transduce(B: Transducer, letters: Iterable) -> Iterator:
    """Lazily emit the output of ``B`` on ``letters``."""
    q = B.initial
    for a in letters:
        q, out = B.delta[q][a]
        yield from out


# --------------------------------------------------------------------------
# Contraction of 0-blocks


@dataclass(frozen=True)
class ContractionParams:
    """``M``: lcm of 0-cycle lengths; ``N``: longest 0-path into a cycle; ``K``: sparsity rank."""

    M: int
    N: int
    K: int

    def to_json(self) -> dict:
        return {"M": self.M, "N": self.N, "K": self.K}


def _zero_letter(A: MullerAutomaton):
    zeros = [a for a in A.alphabet if str(a) == "0"]
    ones = [a for a in A.alphabet if str(a) == "1"]
    if len(A.alphabet) != 2 or not zeros or not ones:
        raise ValueError("automaton must read the alphabet {0, 1}")
    return zeros[0], ones[0]


def zero_graph_params(A: MullerAutomaton) -> tuple[int, int]:
    """``(M, N)`` for the functional graph of 0-transitions."""
    zero, _ = _zero_letter(A)
    f = {q: A.delta[q][zero] for q in A.states}
    cycle_lengths = set()
    on_cycle = set()
    for q in A.states:
        path = {}
        s = q
        while s not in path:
            path[s] = len(path)
            s = f[s]
        if s not in on_cycle:
            c = [s]
            t = f[s]
            while t != s:
                c.append(t)
                t = f[t]
            on_cycle.update(c)
            cycle_lengths.add(len(c))
    tail = 0
    for q in A.states:
        k, s = 0, q
        while s not in on_cycle:
            s = f[s]
            k += 1
        tail = max(tail, k)
    M = reduce(lambda a, b: a * b // math.gcd(a, b), cycle_lengths, 1)
    return M, tail


def zero_block(A: MullerAutomaton, q, g: int):
    """End state and set of states entered while reading ``0^g`` from ``q``.

    Exact for arbitrarily large ``g``: the path enters a cycle after at most
    ``|Q|`` steps and then repeats.
    """
    zero, _ = _zero_letter(A)
    g = int(g)
    path = [q]
    index = {q: 0}
    s = q
    while True:
        s = A.delta[s][zero]
        if s in index:
            break
        index[s] = len(path)
        path.append(s)
    mu = index[s]
    lam = len(path) - mu
    if g < len(path):
        return path[g], frozenset(path[1:g + 1])
    end = path[mu + (g - mu) % lam]
    return end, frozenset(path[1:]) | frozenset(path[mu:])


def contraction_params(A: MullerAutomaton, predicate: "SparsePredicate | None" = None) -> ContractionParams:
    """``(M, N)`` from the 0-graph and ``K`` with gaps ``>= M + N + 1`` from rank ``K`` on.

    ``K`` is 0 when no predicate is given.
    """
    M, N = zero_graph_params(A)
    K = 0 if predicate is None else predicate.sparsity_rank(M + N + 1)
    return ContractionParams(M, N, K)


def gap_block_length(M: int, N: int, zeros: int) -> int:
    """The unique ``k`` in ``(M+N, 2M+N]`` with ``k = zeros (mod M)``."""
    lo = M + N + 1
    return lo + (int(zeros) - lo) % M


def gap_transducer(params: ContractionParams | tuple, M_cycles: int | None = None) -> Transducer:
    """Transducer from residues ``p_m mod M`` to padded blocks ``0^{k_m} 1``.

    The first residue read only sets the state.  Reading ``p_{m+1} mod M`` in
    state ``p_m mod M`` outputs ``0^{k_m} 1`` with ``k_m`` the representative
    of ``p_{m+1} - p_m - 1`` in ``(M+N, 2M+N]``.
    """
    if isinstance(params, ContractionParams):
        M, N = params.M, params.N
    else:
        M, N = params
    if M_cycles is not None:
        M = int(M_cycles)
    residues = tuple(range(M))
    delta = {"init": {r: (r, ()) for r in residues}}
    for r in residues:
        delta[r] = {}
        for s in residues:
            k = gap_block_length(M, N, (s - r - 1) % M)
            delta[r][s] = (s, (0,) * k + (1,))
    return Transducer(residues, (0, 1), ("init",) + residues, "init", delta)


# --------------------------------------------------------------------------
# Sparse predicates


class SparsePredicate:
    """A set ``P`` of naturals, listed increasingly as ``p_0 < p_1 < ...``.

    Subclasses supply exact initial positions, a rank beyond which gaps are
    at least a given size, and the residues ``p_m mod M`` as an ultimately
    periodic word or a disjunctive stream.
    """

    def positions(self, count: int) -> list[int]:
        raise NotImplementedError

    def sparsity_rank(self, gap: int) -> int:
        raise NotImplementedError

    def residue_source(self, M: int, from_rank: int):
        raise NotImplementedError


@dataclass
class PeriodicPredicate(SparsePredicate):
    """``P = initial`` together with ``start + k*period + o`` for ``o`` in ``offsets``, ``k >= 0``.

    ``initial`` must lie below ``start`` and offsets in ``[0, period)``.
    """

    initial: tuple
    start: int
    period: int
    offsets: tuple

    def __post_init__(self):
        self.initial = tuple(sorted(set(int(x) for x in self.initial)))
        self.offsets = tuple(sorted(set(int(o) for o in self.offsets)))
        if not self.offsets or self.offsets[0] < 0 or self.offsets[-1] >= self.period:
            raise ValueError("offsets must be nonempty and lie in [0, period)")
        if self.initial and self.initial[-1] >= self.start:
            raise ValueError("initial positions must precede start")

    def position(self, m: int) -> int:
        if m < len(self.initial):
            return self.initial[m]
        k, j = divmod(m - len(self.initial), len(self.offsets))
        return self.start + k * self.period + self.offsets[j]

    def positions(self, count: int) -> list[int]:
        return [self.position(m) for m in range(count)]

    def sparsity_rank(self, gap: int) -> int:
        h = len(self.offsets)
        cyc = [self.offsets[(j + 1) % h] - self.offsets[j] + (self.period if j == h - 1 else 0)
               for j in range(h)]
        if min(cyc) < gap:
            raise ValueError(f"gaps of this predicate drop below {gap} infinitely often")
        last = -1
        for m in range(len(self.initial) + h):
            if self.position(m + 1) - self.position(m) < gap:
                last = m
        return last + 1

    def residue_source(self, M: int, from_rank: int) -> UPWord:
        h = len(self.offsets)
        first_periodic = max(len(self.initial), from_rank)
        # residues repeat after M full periods of the offsets
        prefix = tuple(self.position(m) % M for m in range(from_rank, first_periodic))
        cycle = tuple(self.position(m) % M for m in range(first_periodic, first_periodic + h * M))
        return UPWord(prefix, cycle)

    def characteristic_word(self) -> UPWord:
        """The 0/1 word with 1s exactly at the positions in ``P``."""
        pre = [0] * self.start
        for p in self.initial:
            pre[p] = 1
        cyc = [0] * self.period
        for o in self.offsets:
            cyc[o] = 1
        return UPWord(tuple(pre), tuple(cyc))


class LRSPredicate(SparsePredicate):
    """Nonnegative values of an admissible recurrence."""

    def __init__(self, ctx, rec, *, index_budget: int | None = None):
        from .enumeration import PositiveStream

        self.ctx = ctx
        self.rec = rec
        self._stream_cls = PositiveStream
        self.index_budget = index_budget
        self._profiles = {}

    def _stream(self):
        kw = {} if self.index_budget is None else {"max_index": self.index_budget}
        return self._stream_cls(self.ctx, self.rec, **kw)

    def positions(self, count: int) -> list[int]:
        from .lrs_core import eval_term

        if count <= 0:
            return []
        s = self._stream()
        idx = s.indices(count)
        out = []
        for n in idx.tolist():
            v = s.exact_values.get(n)
            out.append(v if v is not None else eval_term(self.rec, n))
        return out

    def sparsity_rank(self, gap: int) -> int:
        from .enumeration import sparsity_horizon

        return sparsity_horizon(self.ctx, self.rec, gap)

    def profile(self, M: int):
        from .modular_profile import residue_profile

        if M not in self._profiles:
            self._profiles[M] = residue_profile(self.rec, None, M, self.ctx)
        return self._profiles[M]

    def residue_source(self, M: int, from_rank: int) -> DisjunctiveStream:
        M = int(M)
        if M == 1:
            S, N, residues = frozenset({0}), 0, None
        else:
            prof = self.profile(M)
            S, N, residues = frozenset(prof.S), prof.N, prof.cycle.residues

        def letters(rank):
            skip = from_rank + rank
            for blk in self._stream().blocks():
                n = len(blk.indices)
                if skip >= n:
                    skip -= n
                    continue
                chunk = blk.indices[skip:]
                skip = 0
                vals = np.zeros(len(chunk), dtype=np.int64) if M == 1 else residues(chunk)
                yield from (int(v) for v in vals)

        return DisjunctiveStream(letters, S, max(0, N - from_rank))


@dataclass
class PredicateDecision:
    accepted: bool
    inf_set: frozenset
    params: ContractionParams
    settled_rank: int | None
    prefix_state: object
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema": "prodisjunct.predicate_decision/1",
            "accepted": self.accepted,
            "inf_set": sorted(self.inf_set, key=str),
            "params": self.params.to_json(),
            "settled_rank": self.settled_rank,
            "prefix_state": self.prefix_state,
            "notes": self.notes,
        }


def run_positions(A: MullerAutomaton, q, positions, previous: int = -1):
    """Run ``A`` from ``q`` over ``0^{p_0 - previous - 1} 1 0^{...} 1 ...``.

    Returns the final state; long 0-blocks are jumped exactly.
    """
    _, one = _zero_letter(A)
    for p in positions:
        q, _ = zero_block(A, q, p - previous - 1)
        q = A.delta[q][one]
        previous = p
    return q


def decide_predicate_acceptance(A: MullerAutomaton, predicate: SparsePredicate, *,
                                budget: int = DEFAULT_BUDGET) -> PredicateDecision:
    """Does ``A`` accept the characteristic word of ``predicate``?

    The word is ``w_init`` (exact up to the ``K``-th position, with 0-blocks
    jumped exactly) followed by the contracted blocks ``0^{k_m} 1`` produced
    by :func:`gap_transducer` from the residues ``p_m mod M``.  The
    transducer and ``A`` run as one product machine over residues whose
    states remember the ``A``-states entered on the last block; the
    infinity set of ``A`` is the union of those memories over the product's
    infinity set.  Residues come as an ultimately periodic word or a
    disjunctive stream, decided exactly by the matching routine.
    """
    params = contraction_params(A, predicate)
    M, K = params.M, params.K
    _, one = _zero_letter(A)
    # the first residue read only primes the transducer, so the block ending at p_K runs here
    q = run_positions(A, A.initial, predicate.positions(K + 1))
    B = gap_transducer(params)

    def step(state, r):
        qa, t, _ = state
        t2, out = B.delta[t][r]
        if not out:
            return (qa, t2, frozenset())
        qa2, seen = zero_block(A, qa, len(out) - 1)
        qa3 = A.delta[qa2][one]
        return (qa3, t2, seen | {qa3})

    def label(state):
        return state[2]

    start = (q, "init", frozenset())
    source = predicate.residue_source(M, K)
    notes = [f"initial segment through rank {K} run exactly"]
    if isinstance(source, UPWord):
        inf = _inf_up(step, start, source, label)
        settled = None
        notes.append("residues ultimately periodic")
    else:
        inf, settled = _inf_disjunctive(step, start, source, budget, label)
        notes.append(f"bottom component reached at residue rank {settled} past K")
    return PredicateDecision(A.accepts_inf(inf), inf, params, settled, q, notes)
