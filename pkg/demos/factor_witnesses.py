"""Three consecutive sorted values divisible by 5: scan, empirical and rigorous witnesses.

The scan takes a few seconds; the rigorous witness needs no scan at all.
Run with ``python3 demos/factor_witnesses.py``.
"""

import time

from prodisjunct.enumeration import PositiveStream
from prodisjunct.interval_engine import find_witness, verify_witness
from prodisjunct.lrs_core import Recurrence, dominant_decomposition
from prodisjunct.modular_profile import locate_factor, residue_profile


def main():
    rec = Recurrence((6, -13, 10), (2, 4, 7))
    ctx = dominant_decomposition(rec, 256)
    prof = residue_profile(rec, None, 5, ctx)
    # residue 0 mod 5 means index 3 mod 4
    t = [min(prof.class_map[0])] * 3

    t0 = time.perf_counter()
    hit = locate_factor(PositiveStream(ctx, rec), 5, [0, 0, 0], 0, prof)
    print(f"0,0,0 first at rank {hit.rank}, indices {hit.indices} ({time.perf_counter() - t0:.1f}s)")

    w = find_witness(ctx, rec, 3, prof.T, t, prof.index_threshold, "empirical")
    print("empirical witness:", w.n, "offsets", w.b, "ranks", w.record.ranks)

    t0 = time.perf_counter()
    r = find_witness(ctx, rec, 3, prof.T, t, prof.index_threshold, "rigorous",
                     deltas=("1.95", "2"), precision=1024)
    print(f"rigorous witness n = {r.n[0]} with offsets {r.b} ({time.perf_counter() - t0:.1f}s)")
    rep = verify_witness(ctx.at_precision(1024), rec, r, "matveev")
    print("re-verified:", rep.ok, "| horizon:", rep.horizon)


if __name__ == "__main__":
    main()
