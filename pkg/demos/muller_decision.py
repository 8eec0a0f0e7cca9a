"""Deciding whether Muller automata accept the characteristic word of the value set.

Run with ``python3 demos/muller_decision.py``.
"""

from prodisjunct.lrs_core import Recurrence, dominant_decomposition
from prodisjunct.omega_automata import LRSPredicate, MullerAutomaton, decide_predicate_acceptance


def main():
    rec = Recurrence((6, -13, 10), (2, 4, 7))
    P = LRSPredicate(dominant_decomposition(rec, 256), rec)
    print("first positions:", P.positions(10))

    # parity of the number of 0s read since the last 1; accepts if both parities recur
    parity = MullerAutomaton((0, 1), ("even", "odd"), "even",
                             {"even": {0: "odd", 1: "even"}, "odd": {0: "even", 1: "even"}},
                             [{"even", "odd"}])
    dec = decide_predicate_acceptance(parity, P)
    print("parity automaton:", "accept" if dec.accepted else "reject", sorted(dec.inf_set), dec.params)

    # remembers the gap length mod 3 between consecutive values; accepts iff every residue recurs
    states = ("r0", "r1", "r2", "hit0", "hit1", "hit2")
    delta = {f"r{k}": {0: f"r{(k + 1) % 3}", 1: f"hit{k}"} for k in range(3)}
    delta.update({f"hit{k}": {0: "r1", 1: "hit0"} for k in range(3)})
    gaps = MullerAutomaton((0, 1), states, "r0", delta, [set(states)])
    dec = decide_predicate_acceptance(gaps, P)
    print("gap automaton:", "accept" if dec.accepted else "reject", sorted(dec.inf_set))
    print("notes:", "; ".join(dec.notes))


if __name__ == "__main__":
    main()
