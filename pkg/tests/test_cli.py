import json
import subprocess
import sys
from pathlib import Path

import pytest

from tthammer import cli, corpus, fol

CORPUS = str(corpus.DATA)
NAT = str(corpus.DATA / "nat.sx")

TOY = """
(typing A (sort prop))
(typing B (sort prop))
(typing C (sort prop))
(typing ab (pi (h (const A)) (const B)))
(typing a (const A))
(definition goal_b (app (const ab) (const a)) (const B))
(definition goal_imp (lambda (h (const A)) (app (const ab) (var h))) (pi (h (const A)) (const B)))
(typing goal_c (const C))
(definition goal_or (lambda (h (const C)) (var h)) (pi (h (const C)) (const C)))
"""


@pytest.fixture
def toy(tmp_path):
    d = tmp_path / "toy"
    d.mkdir()
    (d / "toy.sx").write_text(TOY)
    return d


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_translate_smoke(tmp_path, capsys):
    out = tmp_path / "out.p"
    rc, _, _ = run(capsys, "translate", NAT, "--conjecture", "plus_O_n", "-o", str(out))
    assert rc == 0
    p = fol.read_tptp(out.read_text())
    assert p.conjecture.label == "plus_O_n"


def test_translate_unknown_conjecture(capsys):
    rc, _, err = run(capsys, "translate", NAT, "--conjecture", "nope")
    assert rc == 2 and "nope" in err


def test_translate_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.sx"
    bad.write_text("(typing x (sort prop)")
    rc, _, _ = run(capsys, "translate", str(bad), "--conjecture", "x")
    assert rc == 1


def test_translate_depth_monotone(tmp_path, capsys):
    counts = []
    for depth in ("0", "2"):
        out = tmp_path / f"d{depth}.p"
        assert run(capsys, "translate", CORPUS, "--conjecture", "le_n_Sn", "--depth", depth, "-o", str(out))[0] == 0
        counts.append(len(fol.read_tptp(out.read_text()).axioms))
    assert counts[0] <= counts[1]


def test_translate_flags(tmp_path, capsys):
    diag = tmp_path / "diag.txt"
    prem = tmp_path / "prem.txt"
    prem.write_text("le_n\nle_S\n")
    rc, out, _ = run(capsys, "translate", CORPUS, "--conjecture", "le_n_Sn", "--arity-opt",
                     "--premises", str(prem), "--diag", str(diag))
    assert rc == 0 and "le_p2" in out
    assert diag.exists()
    rc, out, _ = run(capsys, "translate", CORPUS, "--conjecture", "le_n_Sn", "--premises", "ALL")
    assert rc == 0 and out.count("fof(") > 40
    prem.write_text("no_such_premise\n")
    assert run(capsys, "translate", CORPUS, "--conjecture", "le_n_Sn", "--premises", str(prem))[0] == 2


def _problem(tmp_path, capsys, name, directory=CORPUS):
    path = tmp_path / f"{name}.p"
    assert run(capsys, "translate", str(directory), "--conjecture", name, "-o", str(path))[0] == 0
    return path


def test_prove_builtin(tmp_path, capsys):
    path = _problem(tmp_path, capsys, "plus_O_n")
    hints = tmp_path / "h.json"
    rc, out, _ = run(capsys, "prove", str(path), "--prover", "builtin", "--hints-out", str(hints))
    assert rc == 0
    assert out.splitlines()[0] == "% SZS status Theorem for plus_O_n"
    report = json.loads(out.splitlines()[1])
    assert report["status"] == "Theorem" and "plus_eq_O" in report["used"]
    assert json.loads(hints.read_text()) == report


def test_prove_timeout_and_countersatisfiable(tmp_path, capsys, toy):
    path = _problem(tmp_path, capsys, "plus_O_n")
    rc, out, _ = run(capsys, "prove", str(path), "--timeout", "0")
    assert rc == 0 and "SZS status Timeout" in out
    path = _problem(tmp_path, capsys, "goal_c", toy)
    rc, out, _ = run(capsys, "prove", str(path))
    assert rc == 0 and "SZS status CounterSatisfiable" in out


def test_prove_spawn_failure(tmp_path, capsys, monkeypatch):
    path = _problem(tmp_path, capsys, "and_comm")
    assert run(capsys, "prove", str(path), "--prover", "no-such-prover {file}")[0] == 3
    monkeypatch.setenv(cli.PROVER_ENV, "no-such-prover {file}")
    assert run(capsys, "prove", str(path))[0] == 3


def test_prove_external_template(tmp_path, capsys):
    path = _problem(tmp_path, capsys, "plus_O_n")
    shim = Path(__file__).parent / "szs_shim.py"
    rc, out, _ = run(capsys, "prove", str(path), "--prover", f"{sys.executable} {shim} {{file}} {{t}}")
    assert rc == 0 and "SZS status Theorem" in out
    assert "plus_eq_O" in json.loads(out.splitlines()[1])["lemmas"]


def test_reconstruct_pipeline(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    path = _problem(tmp_path, capsys, "le_n_Sn")
    hints = tmp_path / "h.json"
    assert run(capsys, "prove", str(path), "--hints-out", str(hints))[0] == 0
    rc, out, _ = run(capsys, "reconstruct", CORPUS, "--conjecture", "le_n_Sn", "--hints", str(hints))
    assert rc == 0 and out.startswith("Success")
    trace = tmp_path / "le_n_Sn.trace.json"
    from tthammer import reconstruct as rec
    assert rec.check_trace(rec.trace_from_text(trace.read_text()))
    rc, out, _ = run(capsys, "reconstruct", CORPUS, "--conjecture", "le_n_Sn", "--depth", "4", "--seconds", "2")
    assert rc == 4 and out.startswith("Fail")


def test_reconstruct_classical_goal_fails(tmp_path, capsys):
    rc, out, _ = run(capsys, "reconstruct", CORPUS, "--conjecture", "peirce", "--seconds", "5",
                     "-o", str(tmp_path / "t.json"))
    assert rc == 4
    assert out.strip() in ("Fail: NoRule", "Fail: DepthExhausted")


def test_reconstruct_errors(tmp_path, capsys):
    assert run(capsys, "reconstruct", CORPUS, "--conjecture", "nope")[0] == 2
    h = tmp_path / "h.json"
    h.write_text(json.dumps({"lemmas": ["nope"], "unfolds": []}))
    assert run(capsys, "reconstruct", CORPUS, "--conjecture", "and_comm", "--hints", str(h))[0] == 2
    h.write_text("not json")
    assert run(capsys, "reconstruct", CORPUS, "--conjecture", "and_comm", "--hints", str(h))[0] == 1


def _strip_time(csv_text):
    return [line.rsplit(",", 1)[0] for line in csv_text.splitlines()]


def test_bench_toy_and_workers(tmp_path, capsys, toy):
    one, many = tmp_path / "one.csv", tmp_path / "many.csv"
    rc, out, _ = run(capsys, "bench", str(toy), "--reconstruct", "--csv", str(one), "--timeout", "10")
    assert rc == 0 and "Sum" in out and "with hints" in out
    assert run(capsys, "bench", str(toy), "--reconstruct", "--csv", str(many), "--workers", "8",
               "--timeout", "10")[0] == 0
    assert _strip_time(one.read_text()) == _strip_time(many.read_text())
    rows = one.read_text().splitlines()
    assert rows[0] == ",".join(cli.CSV_FIELDS)
    by_name = {r.split(",")[0]: r.split(",")[2] for r in rows[1:]}
    assert by_name["goal_b"] == "Theorem" and by_name["goal_c"] == "CounterSatisfiable"


def test_bench_empty_dir(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    rc, out, _ = run(capsys, "bench", str(empty))
    assert rc == 0 and "Sum" in out


def test_bench_bundled_one_row_per_conjecture(tmp_path, capsys):
    csv_path = tmp_path / "b.csv"
    rc, _, _ = run(capsys, "bench", CORPUS, "--timeout", "2", "--workers", "4", "--csv", str(csv_path))
    assert rc == 0
    names = [r.split(",")[0] for r in csv_path.read_text().splitlines()[1:]]
    assert names == sorted(corpus.conjectures(corpus.load_bundled()))


def test_bench_tables():
    rows = [
        {"conjecture": "x", "prover": "p1", "status": "Theorem", "recon_hints": "ok", "recon_none": "NoRule"},
        {"conjecture": "x", "prover": "p2", "status": "Timeout", "recon_hints": "", "recon_none": ""},
        {"conjecture": "y", "prover": "p1", "status": "Theorem", "recon_hints": "ok", "recon_none": "ok"},
        {"conjecture": "y", "prover": "p2", "status": "Theorem", "recon_hints": "ok", "recon_none": "ok"},
    ]
    lines = cli.summary_tables(rows).splitlines()
    assert lines[1].split() == ["p1", "100.0", "2", "1"]
    assert lines[2].split() == ["p2", "50.0", "1", "0"]
    assert lines[3].split() == ["Sum", "100.0", "2"]
    assert lines[-2].split()[-1] == "3" and lines[-1].split()[-1] == "2"


def test_self_check_quick(capsys):
    rc, out, _ = run(capsys, "self-check")
    assert rc == 0
    assert out.count("PASS") == 3


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tthammer.cli", "translate", NAT, "--conjecture", "plus_O_n"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "fof(plus_O_n, conjecture" in proc.stdout
