"""Arcs J_d(gamma, delta) of angles x with gamma cos x < |lambda|^d cos(x + d theta) < delta cos x.

Prints the data behind the interval plots for lambda = 2 + i.
Run with ``python3 demos/interval_tables.py``.
"""

from mpmath import mp, nstr

from prodisjunct.interval_engine import JSpec, j_anchor, j_interval, select_pattern_frame
from prodisjunct.lrs_core import Recurrence, dominant_decomposition


def main():
    ctx = dominant_decomposition(Recurrence((6, -13, 10), (2, 4, 7)), 256)
    with mp.workprec(256):
        print(" d        lo            hi        length     anchor")
        for d in range(1, 5):
            J = j_interval(ctx, JSpec(d, 1, 3))
            a, _ = j_anchor(ctx, d)
            print(f"{d:2d} {nstr(J.lo, 8):>12} {nstr(J.lo + J.length, 8):>12} "
                  f"{nstr(J.length, 6):>10} {nstr(a, 8):>10}")
        J = j_interval(ctx, JSpec(4, 1, "1.95"))
        print("J_4(1, 1.95) =", (nstr(J.lo, 6), nstr(J.lo + J.length, 6)))

    # the frame nests J_4 and J_160 so that n, n + 4, n + 160 are consecutive
    frame = select_pattern_frame(ctx, 3, 4, (3, 3, 3), deltas=("1.95", "2"))
    print("frame offsets:", frame.b, "| final arc length:", nstr(frame.I.length, 4), "| D =", frame.D)


if __name__ == "__main__":
    main()
