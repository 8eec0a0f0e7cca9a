"""One test per acceptance criterion, each printing a single pass/fail line."""

import random
import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import islice

import numpy as np
import pytest
from mpmath import mp, mpf, nint

from prodisjunct.enumeration import Comparator, PositiveStream, enumerate_positive
from prodisjunct.interval_engine import (
    JSpec,
    PatternWitness,
    exclusion_blockers,
    j_anchor,
    j_interval,
    select_pattern_frame,
    stage_candidates,
    verify_frame,
    verify_witness,
)
from prodisjunct.lrs_core import (
    Recurrence,
    classify,
    dominant_decomposition,
    eval_term,
    modular_sequence,
    terms,
)
from prodisjunct.modular_profile import locate_factor, residue_profile
from prodisjunct.omega_automata import (
    MullerAutomaton,
    PeriodicPredicate,
    UPWord,
    decide_predicate_acceptance,
    inf_set_up,
    zero_graph_params,
)

RIGOROUS_N = 218085867698737188268427463501308698889728969450963229999559
EMPIRICAL = (16958443, 16958451, 16958471)
FIRST_RANK = 8479226


@contextmanager
def criterion(k, title, limit=None, spent=0.0):
    """Print one PASS/FAIL line for criterion ``k`` and enforce its time limit.

    ``spent`` counts work already done in a shared fixture.
    """
    t0 = time.perf_counter() - spent
    try:
        yield
        dt = time.perf_counter() - t0
        if limit is not None:
            assert dt < limit, f"took {dt:.1f}s, limit {limit}s"
    except BaseException:
        print(f"\ncriterion {k} FAIL: {title} ({time.perf_counter() - t0:.1f}s)")
        raise
    print(f"\ncriterion {k} PASS: {title} ({dt:.1f}s)")


@pytest.fixture(scope="module")
def factor_scan(ctx, rec):
    """First occurrence of 0,0,0 modulo 5 and the first 10^6 residues."""
    t0 = time.perf_counter()
    stream = PositiveStream(ctx, rec)
    prof = residue_profile(rec, stream, 5, ctx)
    head = prof.cycle.residues(stream.indices(1_000_000))
    hit = locate_factor(stream, 5, [0, 0, 0], 0, prof)
    return hit, head, time.perf_counter() - t0


def _mod_term(rec, n, M):
    """``u_n mod M`` by repeated squaring of the companion matrix."""
    d = len(rec.coeffs)
    C = [[rec.coeffs[j] % M if i == 0 else int(j == i - 1) for j in range(d)] for i in range(d)]

    def mul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(d)) % M for j in range(d)] for i in range(d)]

    P = [[int(i == j) for j in range(d)] for i in range(d)]
    e = n
    while e:
        if e & 1:
            P = mul(P, C)
        C = mul(C, C)
        e >>= 1
    # state (u_{k+d-1}, ..., u_k); row d-1 of C^n maps the initial state to u_n
    init = list(reversed(rec.initials))
    return sum(P[d - 1][j] * init[j] for j in range(d)) % M


def test_criterion_1_term_values(rec):
    want = [10, 9, -6, -53, -150, -271, -206, 787, 4690, 15849, 41994, 92827, 169530, 230369, 106594]
    with criterion(1, "u_3..u_17 exact", limit=1.0):
        assert [eval_term(rec, n) for n in range(3, 18)] == want


def test_criterion_2_classification(rec):
    with criterion(2, "classification of example, Fibonacci and u_{n+2} = -u_n", limit=1.0):
        rep = classify(rec)
        assert rep.simple and not rep.degenerate and rep.dominant_count == 2 and rep.admissible
        with mp.workprec(256):
            lam = dominant_decomposition(rec).lam.center
            assert abs(lam - mp.mpc(2, 1)) < mpf(2) ** -200
        fib = classify(Recurrence((1, 1), (0, 1)))
        assert fib.dominant_count == 1 and not fib.admissible
        rot = classify(Recurrence((0, -1), (1, 1)))
        assert rot.degenerate and not rot.admissible


def test_criterion_3_ordering_prefix(ctx, rec):
    want = [0, 1, 2, 4, 3, 10, 11, 12, 13, 14, 17, 15, 16, 24, 25, 26, 27, 28, 30]
    with criterion(3, "first 19 sorted indices", limit=10.0):
        assert enumerate_positive(ctx, rec, 19).indices == want


def test_criterion_4_modular_profile(ctx, rec):
    want = [2, 4, 2, 4, 0, 2, 0, 4, 4, 2, 4, 0, 4, 4, 4, 2, 0, 4, 2, 4, 2, 0, 4, 4, 4, 2, 0, 0, 4, 4, 2]
    with criterion(4, "profile modulo 5 and first 31 residues", limit=10.0):
        prof = residue_profile(rec, None, 5, ctx)
        assert prof.S == (0, 2, 4) and prof.N == 0 and prof.T == 4
        assert prof.class_map[0] == (3,)
        idx = PositiveStream(ctx, rec).indices(31)
        assert prof.cycle.residues(idx).tolist() == want


def test_criterion_5_factor_search(factor_scan):
    hit, head, elapsed = factor_scan
    with criterion(5, "0,0,0 absent from first 10^6 residues, first at rank 8479226", 3600.0, elapsed):
        h = np.asarray(head)
        assert len(h) == 1_000_000
        assert not np.any((h[:-2] == 0) & (h[1:-1] == 0) & (h[2:] == 0))
        assert hit.rank == FIRST_RANK


def test_criterion_6_interval_calculus(ctx):
    with criterion(6, "J_d(1,3) lengths, anchors, J_4(1,1.95) endpoints", limit=1.0):
        lengths = [float(j_interval(ctx, JSpec(d, 1, 3)).length) for d in range(1, 5)]
        assert lengths == pytest.approx([float(mp.pi / 2), 0.4636, 0.1813, 0.0730], abs=5e-4)
        anchors = [float(j_anchor(ctx, d)[0]) for d in range(1, 5)]
        assert anchors == pytest.approx([1.10714871779409, 0.643501108793284, 0.179853499792478,
                                         -0.283794109208328], abs=5e-4)
        J = j_interval(ctx, JSpec(4, 1, "1.95"))
        with mp.workprec(128):
            lo = mp.atan((-7 - mpf("1.95")) / 24)
            hi = mp.atan(mpf(-8) / 24)
        assert float(J.lo) == pytest.approx(float(lo), abs=1e-3)
        assert float(J.lo + J.length) == pytest.approx(float(hi), abs=1e-3)


def test_criterion_7_frame(ctx):
    with criterion(7, "frame for delta = (1.95, 2), T = 4, t = (3,3,3)", limit=300.0):
        frame = select_pattern_frame(ctx, 3, 4, (3, 3, 3), deltas=("1.95", "2"))
        assert frame.b == (4, 160)
        I2 = frame.stages[1].interval
        assert exclusion_blockers(ctx, I2, 2, 1, 21, skip=(4,)) == []
        assert stage_candidates(ctx, I2, "1.95", 2, 400, used=(4,)) == [0, 4, 38, 99, 160, 309, 370]
        assert 5.0e-58 <= float(frame.I.length) <= 6.5e-58
        assert frame.precision >= 731
        assert verify_frame(ctx, frame)["ok"]


def test_criterion_8_rigorous_vector(ctx):
    with criterion(8, "60-digit n is 3 mod 4 and n theta lies in J_160(1.95, 2)", limit=60.0):
        assert len(str(RIGOROUS_N)) == 60
        assert RIGOROUS_N % 4 == 3
        prec = 1000  # about 300 decimal digits
        c = ctx.at_precision(prec)
        with mp.workprec(prec):
            J = j_interval(c, JSpec(160, "1.95", "2"), prec)
            assert J.contains(RIGOROUS_N * c.theta.center + c.phi.center) is True
            # independent: the defining inequalities at n
            th = mp.atan(mpf(1) / 2)
            x = RIGOROUS_N * th
            mid = mp.cos(x + 160 * th) * mpf(5) ** 80
            assert 0 < mpf("1.95") * mp.cos(x) < mid < 2 * mp.cos(x)


def test_criterion_9_empirical_witness(ctx, rec, factor_scan):
    hit, _, _ = factor_scan
    with criterion(9, "empirical witness (8, 28, 16958443)", limit=300.0):
        assert hit.rank == FIRST_RANK and tuple(hit.indices) == EMPIRICAL
        n = EMPIRICAL[0]
        assert all(_mod_term(rec, k, 5) == 0 for k in EMPIRICAL)
        w = PatternWitness(EMPIRICAL, (8, 28), "empirical", 4, (3, 3, 3))
        rep = verify_witness(ctx, rec, w)
        assert rep.ok
        assert list(rep.ranks) == [FIRST_RANK, FIRST_RANK + 1, FIRST_RANK + 2]
        with mp.workprec(256):
            th = mp.atan(mpf(1) / 2)
            assert abs(mp.cos(n * th) - mpf("0.404")) <= mpf("0.01")
            assert abs(mp.cos((n + 8) * th) * mpf(5) ** 4 - mpf("94.5")) <= 1
            assert abs(mp.cos((n + 28) * th) * mpf(5) ** 14 - 751) <= 8


def _random_muller(rng, n):
    delta = {q: {0: rng.randrange(n), 1: rng.randrange(n)} for q in range(n)}
    family = {frozenset(rng.sample(range(n), rng.randint(1, n))) for _ in range(rng.randint(0, 3))}
    return MullerAutomaton((0, 1), tuple(range(n)), 0, delta, family)


def _walk(A, q, word):
    seen = set()
    for a in word:
        q = A.delta[q][a]
        seen.add(q)
    return q, seen


def test_criterion_10_property_suites(ctx, rec):
    with criterion(10, "property suites", limit=600.0):
        prefix = list(islice(terms(rec), 10001))
        # exponential-polynomial identity
        c = dominant_decomposition(rec, 4096)
        with mp.workprec(4096):
            assert all(int(nint(c.reconstruct(n).real)) == prefix[n] for n in range(2001))
        # modular cycles
        n = np.arange(10001)
        for M in range(2, 51):
            assert modular_sequence(rec, M).residues(n).tolist() == [u % M for u in prefix]
        # certified comparator on all pairs n <= 2000
        cmp = Comparator(ctx, rec)
        for a in range(2001):
            for b in range(a + 1, 2001):
                want = (prefix[a] > prefix[b]) - (prefix[a] < prefix[b])
                assert cmp.compare(a, b) == want
        # J membership, boundary and monotonicity sampling
        rng = random.Random(10)
        with mp.workprec(256):
            th = mp.atan(mpf(1) / 2)
            for _ in range(200):
                d = rng.randint(1, 30)
                g = Fraction(rng.randint(1, 20), 10)
                dl = g + Fraction(rng.randint(1, 20), 10)
                J = j_interval(ctx, JSpec(d, g, dl))
                gm, dm = mpf(g.numerator) / g.denominator, mpf(dl.numerator) / dl.denominator
                x = J.lo + J.length * mpf(rng.random())
                if min(x - J.lo, J.lo + J.length - x) > J.slack + mpf(2) ** -120:
                    mid = mp.cos(x + d * th) * mpf(5) ** (mpf(d) / 2)
                    assert 0 < gm * mp.cos(x) < mid < dm * mp.cos(x)
                for end in (J.lo, J.lo + J.length):
                    v = mp.cos(end + d * th) * mpf(5) ** (mpf(d) / 2)
                    if J.length:
                        assert min(abs(v - gm * mp.cos(end)), abs(v - dm * mp.cos(end))) < mpf(2) ** -100
                wider = j_interval(ctx, JSpec(d, g / 2, dl + 1))
                assert wider.contains_arc(J) is not False
        # contraction pipeline against direct acceptance of UP predicates
        for _ in range(50):
            A = _random_muller(rng, rng.randint(1, 6))
            M, N = zero_graph_params(A)
            gaps = [M + N + 1 + rng.randrange(M + 3) for _ in range(rng.randint(1, 4))]
            offsets = [sum(gaps[:j]) for j in range(len(gaps))]
            P = PeriodicPredicate(tuple(sorted(rng.sample(range(12), 3))), 12, sum(gaps), tuple(offsets))
            assert decide_predicate_acceptance(A, P).inf_set == inf_set_up(A, P.characteristic_word())
        # inf_set_up against a long simulation
        for _ in range(100):
            A = _random_muller(rng, rng.randint(1, 5))
            w = UPWord(tuple(rng.randrange(2) for _ in range(rng.randrange(8))),
                       tuple(rng.randrange(2) for _ in range(rng.randint(1, 6))))
            _, seen = _walk(A, _walk(A, A.initial, islice(iter(w), 5000))[0], islice(iter(w), 5000, 10000))
            assert inf_set_up(A, w) == seen
        # 0-graph pumping: same end state and visited set for 0^n and 0^(n + dM)
        for _ in range(100):
            A = _random_muller(rng, rng.randint(1, 7))
            M, N = zero_graph_params(A)
            for q in A.states:
                for n0 in range(N + M, N + 3 * M):
                    base = _walk(A, q, [0] * n0)
                    for d in (1, 2, 3):
                        assert _walk(A, q, [0] * (n0 + d * M)) == base
