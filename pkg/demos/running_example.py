"""Walk through the running example u_{n+3} = 6 u_{n+2} - 13 u_{n+1} + 10 u_n.

Run with ``python3 demos/running_example.py``.
"""

from mpmath import mp, nstr

from prodisjunct.enumeration import PositiveStream, enumerate_positive
from prodisjunct.lrs_core import Recurrence, char_poly, classify, dominant_decomposition, eval_term
from prodisjunct.modular_profile import residue_profile, residue_word


def main():
    rec = Recurrence((6, -13, 10), (2, 4, 7))
    print("characteristic polynomial:", char_poly(rec))
    print("first terms:", [eval_term(rec, n) for n in range(18)])

    # two complex dominant roots 2 +- i, one smaller real root 2
    rep = classify(rec)
    print("admissible:", rep.admissible, "| dominant roots:", rep.dominant_count)
    ctx = dominant_decomposition(rec, 256)
    with mp.workprec(256):
        print("lambda =", nstr(ctx.lam.center, 10), " theta =", nstr(ctx.theta.center, 15))

    # the nonnegative values in increasing order, reported by source index
    print("sorted indices:", enumerate_positive(ctx, rec, 19).indices)

    prof = residue_profile(rec, None, 5, ctx)
    print(f"mod 5: S = {list(prof.S)}, N = {prof.N}, T = {prof.T}, class map = {prof.class_map}")
    print("residues:", residue_word(PositiveStream(ctx, rec), 5, range(31)))


if __name__ == "__main__":
    main()
