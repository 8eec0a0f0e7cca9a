import csv
import io
import json
import random

import pytest
from mpmath import mp

from prodisjunct.cli import EXIT_BUDGET, EXIT_INADMISSIBLE, EXIT_INPUT, EXIT_OK, main
from prodisjunct.enumeration import PositiveStream

EXAMPLE = {"coeffs": [6, -13, 10], "initials": [2, 4, 7]}
FIB = {"coeffs": [1, 1], "initials": [0, 1]}
ORDERED_19 = [0, 1, 2, 4, 3, 10, 11, 12, 13, 14, 17, 15, 16, 24, 25, 26, 27, 28, 30]
FIRST_31 = [2, 4, 2, 4, 0, 2, 0, 4, 4, 2, 4, 0, 4, 4, 4, 2, 0, 4, 2, 4, 2, 0, 4, 4, 4, 2, 0, 0, 4, 4, 2]


@pytest.fixture
def example_file(tmp_path):
    p = tmp_path / "example.json"
    p.write_text(json.dumps(EXAMPLE))
    return str(p)


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def _csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_analyze_exit_codes(capsys, example_file, tmp_path):
    code, out, _ = _run(capsys, "analyze", example_file)
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["schema"] == "prodisjunct.analysis/1"
    assert data["classification"]["admissible"]
    code, out, _ = _run(capsys, "analyze", example_file, "--format", "text")
    assert "dominant root: 2.0 + 1.0i" in out
    assert _run(capsys, "analyze", json.dumps(FIB))[0] == EXIT_INADMISSIBLE
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(capsys, "analyze", str(bad))[0] == EXIT_INPUT


def test_precision_floor(capsys, example_file):
    assert _run(capsys, "analyze", example_file, "--precision", "32")[0] == EXIT_INPUT


def test_precision_env_var(capsys, example_file, monkeypatch):
    monkeypatch.setenv("PRODISJUNCT_PRECISION", "32")
    assert _run(capsys, "analyze", example_file)[0] == EXIT_INPUT
    monkeypatch.setenv("PRODISJUNCT_PRECISION", "512")
    code, out, _ = _run(capsys, "analyze", example_file)
    assert code == EXIT_OK and json.loads(out)["decomposition"]["precision"] == 512


def test_enumerate_csv(capsys, example_file):
    code, out, _ = _run(capsys, "enumerate", example_file, "--count", 19, "--format", "csv")
    rows = _csv(out)
    assert code == EXIT_OK and rows[0] == ["rank", "index"]
    assert [int(r[1]) for r in rows[1:]] == ORDERED_19
    code, out, _ = _run(capsys, "enumerate", example_file, "--count", 31, "--modulus", 5, "--format", "csv")
    rows = _csv(out)
    assert rows[0] == ["rank", "index", "mod_5"]
    assert [int(r[2]) for r in rows[1:]] == FIRST_31
    code, out, _ = _run(capsys, "enumerate", example_file, "--count", 0, "--format", "csv")
    assert _csv(out) == [["rank", "index"]]


def test_enumerate_json_and_out(capsys, example_file, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = _run(capsys, "enumerate", example_file, "--count", 6, "--modulus", "5,3", "--out", target)
    assert code == EXIT_OK and out == ""
    data = json.loads(target.read_text())
    assert data["indices"] == ["0", "1", "2", "4", "3", "10"]
    assert data["residues"]["5"] == FIRST_31[:6]


def test_enumerate_deterministic_across_workers(capsys, example_file):
    outs = [_run(capsys, "enumerate", example_file, "--count", 2000, "--workers", w)[1] for w in (1, 2)]
    assert json.loads(outs[0])["indices"] == json.loads(outs[1])["indices"]


def test_profile(capsys, example_file):
    code, out, _ = _run(capsys, "profile", example_file, "--modulus", 5)
    data = json.loads(out)
    assert code == EXIT_OK and data["S_M"] == [0, 2, 4] and data["N_M"] == 0 and data["T"] == 4


def test_find_pattern_scan(capsys, example_file):
    code, out, _ = _run(capsys, "find-pattern", example_file, "--modulus", 5, "--pattern", "4,4")
    assert code == EXIT_OK
    assert json.loads(out)["occurrence"]["rank"] == 7


def test_find_pattern_errors(capsys, example_file):
    code, _, err = _run(capsys, "find-pattern", example_file, "--modulus", 5, "--pattern", "0,3")
    assert code == EXIT_INPUT and "S_M" in err
    code, _, _ = _run(capsys, "find-pattern", example_file, "--modulus", 5, "--pattern", "0,0,0",
                      "--horizon-index", 100000)
    assert code == EXIT_BUDGET
    assert _run(capsys, "find-pattern", example_file, "--modulus", 5, "--pattern", "")[0] == EXIT_INPUT


def test_find_pattern_rigorous_round_trip(capsys, example_file, tmp_path):
    cert = tmp_path / "cert.json"
    code, _, _ = _run(capsys, "find-pattern", example_file, "--modulus", 5, "--pattern", "0,0,0",
                      "--mode", "rigorous", "--deltas", "1.95,2", "--out", cert)
    assert code == EXIT_OK
    data = json.loads(cert.read_text())
    assert data["witness"]["n"][0] == "218085867698737188268427463501308698889728969450963229999559"
    code, out, _ = _run(capsys, "verify-witness", cert)
    assert code == EXIT_OK and json.loads(out)["ok"]
    data["witness"]["n"] = [str(int(x) + 4) for x in data["witness"]["n"]]
    cert.write_text(json.dumps(data))
    assert _run(capsys, "verify-witness", cert, "--horizon", 10000)[0] == EXIT_INPUT


def test_intervals_csv(capsys, example_file):
    code, out, _ = _run(capsys, "intervals", example_file, "--format", "csv")
    rows = _csv(out)
    assert code == EXIT_OK and rows[0][:6] == ["d", "gamma", "delta", "lo", "hi", "length"]
    lengths = [float(r[5]) for r in rows[1:]]
    assert lengths == pytest.approx([1.5708, 0.4636, 0.1813, 0.0730], abs=5e-4)
    anchors = [float(r[6]) for r in rows[1:]]
    assert anchors == pytest.approx([1.10715, 0.643501, 0.179853, -0.283794], abs=5e-4)
    code, out, _ = _run(capsys, "intervals", example_file, "--d-from", 5, "--d-to", 4, "--format", "csv")
    assert len(_csv(out)) == 1


def test_intervals_spot_check(capsys, example_file):
    rng = random.Random(9)
    for _ in range(10):
        d = rng.randint(1, 30)
        g = rng.randint(1, 20) / 10
        dl = g + rng.randint(1, 20) / 10
        code, out, _ = _run(capsys, "intervals", example_file, "--d-from", d, "--d-to", d,
                            "--gamma", g, "--delta", dl, "--format", "csv")
        row = _csv(out)[1]
        with mp.workprec(128):
            z = mp.mpc(2, 1) ** d
            xs = sorted(mp.atan((z.real - mp.mpf(str(eta))) / z.imag) for eta in (g, dl))
        assert float(row[3]) == pytest.approx(float(xs[0]), abs=1e-10)
        assert float(row[4]) == pytest.approx(float(xs[1]), abs=1e-10)


def _automaton(rng, n, family=None):
    delta = {str(q): {"0": rng.randrange(n), "1": rng.randrange(n)} for q in range(n)}
    if family is None:
        family = [sorted(rng.sample(range(n), rng.randint(1, n))) for _ in range(rng.randint(0, 3))]
    return {"alphabet": [0, 1], "states": list(range(n)), "initial": 0, "delta": delta,
            "accepting_family": family}


def _simulated_inf(aut, values):
    """States entered on the second half of the characteristic word up to ``values[-1]``."""
    d = {int(q): {int(a): t for a, t in row.items()} for q, row in aut["delta"].items()}
    q, prev, seen = 0, -1, set()
    half = len(values) // 2
    for m, p in enumerate(values):
        g = p - prev - 1
        visited = []
        # walk at most |Q| + cycle steps, then the remaining zeros only loop
        path = [q]
        while len(path) <= g and path[-1] not in path[:-1]:
            path.append(d[path[-1]][0])
        if len(path) > g:
            q = path[g]
            visited = path[1:g + 1]
        else:
            mu = path.index(path[-1])
            cyc = len(path) - 1 - mu
            q = path[mu + (g - mu) % cyc]
            visited = path[1:]
        q = d[q][1]
        if m > half:
            seen |= set(visited) | {q}
        prev = p
    return sorted(seen)


def test_decide(capsys, example_file, tmp_path, ctx, rec):
    rng = random.Random(10)
    base = _automaton(rng, 3)
    subsets = [[q for q in range(3) if mask >> q & 1] for mask in range(1, 8)]
    for family, want in ((subsets, "accept"), ([], "reject")):
        p = tmp_path / "aut.json"
        p.write_text(json.dumps(dict(base, accepting_family=family)))
        code, out, _ = _run(capsys, "decide", p, example_file, "--format", "text")
        assert code == EXIT_OK and out.strip() == want
    idx = PositiveStream(ctx, rec).indices(3000).tolist()
    pre = rec.prefix(max(idx) + 1)
    values = [pre[n] for n in idx]
    for k in range(10):
        aut = _automaton(rng, rng.randint(1, 5))
        p = tmp_path / f"aut{k}.json"
        p.write_text(json.dumps(aut))
        code, out, _ = _run(capsys, "decide", p, example_file)
        assert code == EXIT_OK
        data = json.loads(out)
        assert data["inf_set"] == _simulated_inf(aut, values)
        assert data["accepted"] == (data["inf_set"] in [sorted(F) for F in aut["accepting_family"]])


def test_decide_malformed_automaton(capsys, example_file, tmp_path):
    aut = _automaton(random.Random(1), 2)
    aut["delta"]["0"]["1"] = [0, 1]
    p = tmp_path / "nd.json"
    p.write_text(json.dumps(aut))
    assert _run(capsys, "decide", p, example_file)[0] == EXIT_INPUT


def test_find_pattern_example_scan_and_empirical(capsys, example_file, tmp_path):
    code, out, _ = _run(capsys, "find-pattern", example_file, "--modulus", 5, "--pattern", "0,0,0",
                        "--format", "text")
    assert code == EXIT_OK and "rank 8479226" in out
    cert = tmp_path / "empirical.json"
    code, _, _ = _run(capsys, "find-pattern", example_file, "--modulus", 5, "--pattern", "0,0,0",
                      "--mode", "empirical", "--out", cert)
    assert code == EXIT_OK
    w = json.loads(cert.read_text())["witness"]
    assert w["n"] == ["16958443", "16958451", "16958471"] and w["b"] == ["8", "28"]
    code, out, _ = _run(capsys, "verify-witness", cert)
    report = json.loads(out)
    assert code == EXIT_OK and report["ok"] and report["schema"] == "prodisjunct.verification/1"
