"""Command-line interface.

Exit codes: 0 success, 1 input error (including a witness that fails
verification), 2 recurrence not admissible, 3 budget or precision exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import mpmath
from mpmath import mp

from . import __version__
from ._numeric import PrecisionExhausted
from .enumeration import HorizonExhausted, PositiveStream
from .interval_engine import (
    ConstructionStalled,
    CounterexampleFound,
    JSpec,
    PatternWitness,
    find_witness,
    j_anchor,
    j_interval,
    j_length_bounds,
    verify_witness,
)
from .lrs_core import (
    NotAdmissible,
    Recurrence,
    char_poly,
    classify,
    dominant_decomposition,
    modular_sequence,
)
from .modular_profile import UnsatisfiablePattern, locate_factor, residue_profile
from .omega_automata import (
    AutomatonFormatError,
    LRSPredicate,
    MullerAutomaton,
    StabilizationBudgetExhausted,
    decide_predicate_acceptance,
)

EXIT_OK, EXIT_INPUT, EXIT_INADMISSIBLE, EXIT_BUDGET = 0, 1, 2, 3
PRECISION_ENV = "PRODISJUNCT_PRECISION"


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    precision: int = 256
    mode: str = "empirical"
    horizon_index: int = 50_000_000
    horizon_rank: int | None = None
    format: str = "json"
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.precision < 64:
            raise InputError("precision must be at least 64 bits")
        if self.horizon_index <= 0 or (self.horizon_rank is not None and self.horizon_rank <= 0):
            raise InputError("budgets must be positive")


def _load_json(source: str):
    try:
        if source == "-":
            return json.load(sys.stdin)
        if source.lstrip().startswith("{"):
            return json.loads(source)
        return json.loads(Path(source).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {source!r}: {exc}") from None


def _load_recurrence(source: str) -> Recurrence:
    data = _load_json(source)
    if isinstance(data, dict) and "recurrence" in data:
        data = data["recurrence"]
    try:
        return Recurrence.from_json(data)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _admissible_ctx(rec: Recurrence, cfg: RunConfig):
    report = classify(rec, cfg.precision)
    if not report.admissible:
        raise NotAdmissible(report.reason)
    return dominant_decomposition(rec, cfg.precision)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def _emit(cfg: RunConfig, payload, *, rows=None, header=None, text=None):
    """Write ``payload`` as JSON, ``rows`` as CSV, or ``text`` as plain lines."""
    buf = io.StringIO()
    if cfg.format == "csv" and rows is not None:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    elif cfg.format == "text" and text is not None:
        buf.write(text.rstrip("\n") + "\n")
    else:
        json.dump(payload, buf, indent=2, default=str)
        buf.write("\n")
    if cfg.out:
        Path(cfg.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


# --------------------------------------------------------------------------
# Commands


def cmd_analyze(args, cfg: RunConfig) -> int:
    rec = _load_recurrence(args.recurrence)
    report = classify(rec, cfg.precision)
    payload = {
        "schema": "prodisjunct.analysis/1",
        "recurrence": rec.to_json(),
        "char_poly": str(char_poly(rec)),
        "classification": report.to_json(),
    }
    lines = [f"characteristic polynomial: {char_poly(rec)}",
             f"admissible: {report.admissible}"]
    if report.admissible:
        ctx = dominant_decomposition(rec, cfg.precision)
        payload["decomposition"] = ctx.to_json()
        with mp.workprec(cfg.precision):
            lam = ctx.lam.center
            lines.append(f"dominant root: {mpmath.nstr(lam.real, 15)} + {mpmath.nstr(lam.imag, 15)}i")
            lines.append(f"theta: {mpmath.nstr(ctx.theta.center, 15)}")
            lines.append(f"phi: {mpmath.nstr(ctx.phi.center, 15)}")
    else:
        lines.append(f"reason: {report.reason}")
    _emit(cfg, payload, text="\n".join(lines))
    return EXIT_OK if report.admissible else EXIT_INADMISSIBLE


def cmd_enumerate(args, cfg: RunConfig) -> int:
    rec = _load_recurrence(args.recurrence)
    ctx = _admissible_ctx(rec, cfg)
    moduli = _int_list(args.modulus) if args.modulus else []
    if any(M < 1 for M in moduli):
        raise InputError("moduli must be positive")
    count = int(args.count)
    if count < 0:
        raise InputError("count must be nonnegative")
    stream = PositiveStream(ctx, rec, max_index=cfg.horizon_index, workers=args.workers)
    idx = stream.indices(count) if count else []
    cols = [modular_sequence(rec, M).residues(idx).tolist() if count else [] for M in moduli]
    header = ["rank", "index"] + [f"mod_{M}" for M in moduli]
    rows = [[m, int(n)] + [c[m] for c in cols] for m, n in enumerate(list(idx))]
    payload = {
        "schema": "prodisjunct.enumeration/1",
        "count": count,
        "indices": [str(int(n)) for n in idx],
        "residues": {str(M): c for M, c in zip(moduli, cols)},
        "manifest": stream.manifest(),
    }
    text = "\n".join(" ".join(str(x) for x in r) for r in rows)
    _emit(cfg, payload, rows=rows, header=header, text=text or " ".join(header))
    return EXIT_OK


def cmd_profile(args, cfg: RunConfig) -> int:
    rec = _load_recurrence(args.recurrence)
    ctx = _admissible_ctx(rec, cfg)
    prof = residue_profile(rec, None, int(args.modulus), ctx)
    text = (f"S_M = {list(prof.S)}\nN_M = {prof.N}\nT = {prof.T}\n"
            + "\n".join(f"class_map[{s}] = {list(ts)}" for s, ts in prof.class_map.items()))
    _emit(cfg, prof.to_json(), text=text)
    return EXIT_OK


def cmd_find_pattern(args, cfg: RunConfig) -> int:
    rec = _load_recurrence(args.recurrence)
    ctx = _admissible_ctx(rec, cfg)
    M = int(args.modulus)
    pattern = _int_list(args.pattern)
    if not pattern:
        raise InputError("empty pattern")
    stream = PositiveStream(ctx, rec, max_index=cfg.horizon_index, workers=args.workers)
    prof = residue_profile(rec, stream, M, ctx)
    bad = [x for x in pattern if x not in prof.S]
    if bad:
        raise UnsatisfiablePattern(f"residues {bad} occur only finitely often modulo {M}; S_M = {list(prof.S)}")
    cert = {
        "schema": "prodisjunct.pattern_certificate/1",
        "recurrence": rec.to_json(),
        "modulus": M,
        "pattern": pattern,
        "mode": args.mode,
        "profile": prof.to_json(),
        "precision": cfg.precision,
    }
    if args.mode == "scan":
        hit = locate_factor(stream, M, pattern, int(args.from_rank), prof)
        cert["occurrence"] = hit.to_json()
        text = f"first occurrence at rank {hit.rank} (indices {', '.join(map(str, hit.indices))})"
    else:
        t = [min(prof.class_map[x]) for x in pattern]
        deltas = [x for x in args.deltas.split(",")] if args.deltas else None
        horizon = None
        if args.horizon:
            horizon = args.horizon if args.horizon == "matveev" else int(args.horizon)
        w = find_witness(ctx, rec, len(pattern), prof.T, t, prof.index_threshold, args.mode,
                         deltas=deltas, horizon=horizon, index_budget=cfg.horizon_index,
                         precision=max(cfg.precision, 1024) if args.mode == "rigorous" else cfg.precision)
        cert["witness"] = w.to_json()
        text = (f"witness indices: {', '.join(map(str, w.n))}\n"
                f"offsets: {', '.join(map(str, w.b))}\n"
                f"verification: {w.record.horizon} ({'complete' if w.record.complete else 'partial'})")
        if w.record.ranks:
            text += f"\nranks: {', '.join(map(str, w.record.ranks))}"
    _emit(cfg, cert, text=text)
    return EXIT_OK


def cmd_intervals(args, cfg: RunConfig) -> int:
    rec = _load_recurrence(args.recurrence)
    ctx = _admissible_ctx(rec, cfg)
    header = ["d", "gamma", "delta", "lo", "hi", "length", "anchor", "anchor_radius",
              "length_lower", "length_upper"]
    rows = []
    with mp.workprec(cfg.precision):
        for d in range(int(args.d_from), int(args.d_to) + 1):
            if d == 0:
                continue
            spec = JSpec(d, args.gamma, args.delta)
            J = j_interval(ctx, spec)
            lo_b, up_b = j_length_bounds(ctx, spec)
            anchor, radius = j_anchor(ctx, d, eta=spec.delta) if d > 0 else (None, None)
            fmt = lambda x: "" if x is None else mpmath.nstr(x, 12)  # noqa: E731
            rows.append([d, str(spec.gamma), str(spec.delta), fmt(J.lo), fmt(J.lo + J.length),
                         fmt(J.length), fmt(anchor), fmt(radius), fmt(lo_b), fmt(up_b)])
    payload = {"schema": "prodisjunct.intervals/1", "columns": header, "rows": rows}
    text = "\n".join(" ".join(str(x) for x in r) for r in rows)
    _emit(cfg, payload, rows=rows, header=header, text=text or " ".join(header))
    return EXIT_OK


def cmd_decide(args, cfg: RunConfig) -> int:
    A = MullerAutomaton.from_json(_load_json(args.automaton))
    rec = _load_recurrence(args.recurrence)
    ctx = _admissible_ctx(rec, cfg)
    decision = decide_predicate_acceptance(A, LRSPredicate(ctx, rec))
    _emit(cfg, decision.to_json(), text="accept" if decision.accepted else "reject")
    return EXIT_OK


def cmd_verify_witness(args, cfg: RunConfig) -> int:
    cert = _load_json(args.certificate)
    if "witness" not in cert:
        raise InputError("certificate carries no witness")
    rec = Recurrence.from_json(cert["recurrence"])
    ctx = _admissible_ctx(rec, RunConfig(max(cfg.precision, int(cert.get("precision", 0)))))
    w = PatternWitness.from_json(cert["witness"])
    horizon = None
    if args.horizon:
        horizon = args.horizon if args.horizon == "matveev" else int(args.horizon)
    report = verify_witness(ctx, rec, w, horizon)
    _emit(cfg, {"schema": "prodisjunct.verification/1", **report.to_json()},
          text=f"verified: {', '.join(map(str, w.n))} ({report.horizon})")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    env_prec = os.environ.get(PRECISION_ENV)
    common.add_argument("--precision", type=int, default=int(env_prec) if env_prec else 256,
                        help=f"working precision in bits (default from ${PRECISION_ENV} or 256)")
    common.add_argument("--horizon-index", type=int, default=50_000_000,
                        help="largest source index scanned")
    common.add_argument("--horizon-rank", type=int, default=None, help="largest rank scanned")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", default=None, help="write output to this file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1, help="processes for chunk evaluation")

    p = argparse.ArgumentParser(prog="prodisjunct", description="Positive-value streams of linear recurrences.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", parents=[common], help="classify and decompose a recurrence")
    s.add_argument("recurrence")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("enumerate", parents=[common], help="sorted nonnegative values with residues")
    s.add_argument("recurrence")
    s.add_argument("--count", type=int, default=31)
    s.add_argument("--modulus", default="", help="comma-separated moduli")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("profile", parents=[common], help="residue profile modulo M")
    s.add_argument("recurrence")
    s.add_argument("--modulus", type=int, required=True)
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("find-pattern", parents=[common], help="locate a residue factor or build a witness")
    s.add_argument("recurrence")
    s.add_argument("--modulus", type=int, required=True)
    s.add_argument("--pattern", required=True, help="comma-separated residues")
    s.add_argument("--mode", choices=("scan", "empirical", "rigorous"), default="scan")
    s.add_argument("--from-rank", type=int, default=0)
    s.add_argument("--deltas", default=None, help="thresholds delta_2,...,delta_l for rigorous mode")
    s.add_argument("--horizon", default=None, help='"matveev" or a bound on m - n')
    s.set_defaults(func=cmd_find_pattern)

    s = sub.add_parser("intervals", parents=[common], help="table of arcs J_d(gamma, delta)")
    s.add_argument("recurrence")
    s.add_argument("--d-from", type=int, default=1)
    s.add_argument("--d-to", type=int, default=4)
    s.add_argument("--gamma", default="1")
    s.add_argument("--delta", default="3")
    s.set_defaults(func=cmd_intervals, format_default="csv")

    s = sub.add_parser("decide", parents=[common], help="Muller acceptance of the value predicate")
    s.add_argument("automaton")
    s.add_argument("recurrence")
    s.set_defaults(func=cmd_decide)

    s = sub.add_parser("verify-witness", parents=[common], help="re-check a witness certificate")
    s.add_argument("certificate")
    s.add_argument("--horizon", default=None, help='"matveev" or a bound on m - n')
    s.set_defaults(func=cmd_verify_witness)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            precision=args.precision,
            mode=getattr(args, "mode", "empirical"),
            horizon_index=args.horizon_index,
            horizon_rank=args.horizon_rank,
            format=args.format,
            out=args.out,
            seed=args.seed,
        )
        return args.func(args, cfg)
    except NotAdmissible as exc:
        print(f"error: recurrence not admissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (HorizonExhausted, StabilizationBudgetExhausted, ConstructionStalled, PrecisionExhausted) as exc:
        print(f"error: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except CounterexampleFound as exc:
        print(f"error: witness rejected at m = {exc.m}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, UnsatisfiablePattern, AutomatonFormatError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
