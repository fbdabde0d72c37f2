"""Command-line front end: translate, prove, reconstruct, bench, self-check.

Exit codes: 0 success, 1 parse or translation error, 2 unknown name,
3 prover could not be started, 4 reconstruction failed.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

from . import atp, fol, reconstruct as rec
from .corpus import conjectures, load, manifest
from .encoder import EncoderState
from .kernel import KernelError
from .translate import ALL, UnknownName, build_problem

EXIT_OK, EXIT_PARSE, EXIT_UNKNOWN, EXIT_SPAWN, EXIT_RECON = 0, 1, 2, 3, 4

# default external prover command template, e.g. "eprover --auto --cpu-limit={t} {file}"
PROVER_ENV = "TTHAMMER_PROVER"


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _load(path: str):
    try:
        return load(path), None
    except (KernelError, OSError, ValueError) as e:
        return None, e


# --------------------------------------------------------------------------
# translate


def cmd_translate(args) -> int:
    env, e = _load(args.input)
    if env is None:
        _err(f"cannot load {args.input}: {e}")
        return EXIT_PARSE
    premises = None
    if args.premises == ALL:
        premises = ALL
    elif args.premises:
        premises = [l.strip() for l in Path(args.premises).read_text().splitlines() if l.strip()]
        missing = [n for n in premises if n not in env]
        if missing:
            _err(f"unknown premise names: {', '.join(missing)}")
            return EXIT_UNKNOWN
    if args.conjecture not in env:
        _err(f"unknown conjecture {args.conjecture}")
        return EXIT_UNKNOWN
    st = EncoderState(env)
    try:
        p = build_problem(env, args.conjecture, premises, depth=args.depth,
                          arity_opt=args.arity_opt, state=st)
    except UnknownName as e:
        _err(f"unknown name {e}")
        return EXIT_UNKNOWN
    except (KernelError, ValueError) as e:
        _err(str(e))
        return EXIT_PARSE
    text = fol.to_tptp(p)
    if args.output and args.output != "-":
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if args.diag:
        Path(args.diag).write_text("".join(d + "\n" for d in st.diagnostics))
    return EXIT_OK


# --------------------------------------------------------------------------
# prove


def run_prover(p: fol.Problem, prover: str, timeout: float) -> fol.AtpResult:
    if prover == "builtin":
        return atp.prove_builtin(p, timeout)
    return atp.run_external(p, prover, timeout)


def prove_report(p: fol.Problem, r: fol.AtpResult, env=None) -> dict:
    """The JSON report of ``prove``; it doubles as a hints file."""
    hints = rec.hints_from_used(p, r.used_axioms, env)
    return {
        "status": r.status.value,
        "conjecture": p.conjecture.label,
        "used": list(r.used_axioms),
        "lemmas": list(hints.lemmas),
        "unfolds": list(hints.unfolds),
    }


def cmd_prove(args) -> int:
    try:
        p = fol.read_tptp(Path(args.problem).read_text())
    except (OSError, ValueError) as e:
        _err(f"cannot read {args.problem}: {e}")
        return EXIT_PARSE
    prover = args.prover or os.environ.get(PROVER_ENV) or "builtin"
    r = run_prover(p, prover, args.timeout)
    if r.status is fol.Status.ERROR and r.error == "SpawnFailed":
        _err(f"cannot start prover: {prover}")
        print(f"% SZS status Error for {p.conjecture.label}")
        return EXIT_SPAWN
    report = prove_report(p, r)
    print(f"% SZS status {r.status.value} for {p.conjecture.label}")
    text = json.dumps(report, sort_keys=True)
    print(text)
    if args.hints_out:
        Path(args.hints_out).write_text(text + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# reconstruct


def cmd_reconstruct(args) -> int:
    env, e = _load(args.input)
    if env is None:
        _err(f"cannot load {args.input}: {e}")
        return EXIT_PARSE
    if args.conjecture not in env:
        _err(f"unknown conjecture {args.conjecture}")
        return EXIT_UNKNOWN
    hints = rec.Hints()
    if args.hints:
        try:
            hints = rec.Hints.from_json(json.loads(Path(args.hints).read_text()))
        except (OSError, ValueError) as e:
            _err(f"cannot read hints {args.hints}: {e}")
            return EXIT_PARSE
    budget = rec.Budget(depth=args.depth, seconds=args.seconds)
    try:
        s = rec.flatten_goal(env, rec.statement_of(env, args.conjecture), hints)
    except rec.UnknownLemma as e:
        _err(f"unknown lemma {e}")
        return EXIT_UNKNOWN
    except rec.NotAProp as e:
        _err(f"{args.conjecture}: {e}")
        return EXIT_PARSE
    out = rec.prove_seq(s, budget)
    if isinstance(out, rec.Fail):
        print(f"Fail: {out.reason}")
        return EXIT_RECON
    text = rec.trace_to_text(out)
    path = args.output or f"{args.conjecture}.trace.json"
    Path(path).write_text(text)
    try:
        rec.check_trace(rec.trace_from_text(Path(path).read_text()))
    except rec.TraceError as e:
        print(f"Fail: trace does not replay ({e})")
        return EXIT_RECON
    print(f"Success: {args.conjecture} depth {out.depth} steps {out.root.size()} trace {path}")
    return EXIT_OK


# --------------------------------------------------------------------------
# bench

CSV_FIELDS = ["conjecture", "prover", "status", "used", "lemmas", "unfolds",
              "recon_hints", "recon_none", "time"]

_ENV_CACHE: dict = {}


def _bench_one(job: tuple) -> list[dict]:
    corpus_dir, name, provers, timeout, do_recon, recon_seconds = job
    env = _ENV_CACHE.get(corpus_dir)
    if env is None:
        env = _ENV_CACHE[corpus_dir] = load(corpus_dir)
    rows = []
    try:
        p = build_problem(env, name)
    except Exception as e:  # recorded per problem, the run goes on
        return [{"conjecture": name, "prover": pr, "status": f"TranslateError: {e}", "used": "",
                 "lemmas": "", "unfolds": "", "recon_hints": "", "recon_none": "", "time": "0.00"}
                for pr in provers]
    for pr in provers:
        start = time.monotonic()
        try:
            r = run_prover(p, pr, timeout)
            status = r.status.value
        except Exception as e:
            r, status = None, f"Error: {type(e).__name__}"
        row = {"conjecture": name, "prover": pr, "status": status, "used": "", "lemmas": "",
               "unfolds": "", "recon_hints": "", "recon_none": ""}
        if r is not None and r.status is fol.Status.THEOREM:
            hints = rec.hints_from_used(p, r.used_axioms, env)
            row["used"] = " ".join(r.used_axioms)
            row["lemmas"] = " ".join(hints.lemmas)
            row["unfolds"] = " ".join(hints.unfolds)
            if do_recon:
                budget = rec.Budget(depth=8, seconds=recon_seconds)
                for key, h in (("recon_hints", hints), ("recon_none", rec.Hints())):
                    try:
                        out = rec.reconstruct(env, name, h, budget)
                        row[key] = "ok" if isinstance(out, rec.ProofTrace) else out.reason
                    except Exception as e:
                        row[key] = f"Error: {type(e).__name__}"
        row["time"] = f"{time.monotonic() - start:.2f}"
        rows.append(row)
    return rows


def bench(corpus_dir: str, provers: list[str], workers: int = 1, timeout: float = 30.0,
          do_recon: bool = False, recon_seconds: float = 10.0, names: list[str] | None = None) -> list[dict]:
    """One row per (conjecture, prover), sorted by conjecture then prover."""
    m = manifest(corpus_dir)
    if not m["files"]:
        return []
    env = load(corpus_dir)
    names = conjectures(env) if names is None else names
    jobs = [(str(corpus_dir), n, tuple(provers), timeout, do_recon, recon_seconds) for n in names]
    rows: list[dict] = []
    if workers <= 1:
        for j in jobs:
            rows += _bench_one(j)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
            for r in ex.map(_bench_one, jobs):
                rows += r
    rows.sort(key=lambda r: (r["conjecture"], r["prover"]))
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def summary_tables(rows: list[dict]) -> str:
    """Prover table (solved share, count, unique solves) and reconstruction table."""
    names = sorted({r["conjecture"] for r in rows})
    provers = sorted({r["prover"] for r in rows})
    solved = {p: {r["conjecture"] for r in rows if r["prover"] == p and r["status"] == "Theorem"}
              for p in provers}
    total = len(names)
    lines = [f"{'Prover':<24}{'Solved%':>9}{'Solved':>8}{'Unique':>8}"]
    union: set = set()
    for p in provers:
        others = set().union(*(solved[q] for q in provers if q != p)) if len(provers) > 1 else set()
        unique = len(solved[p] - others)
        pct = 100.0 * len(solved[p]) / total if total else 0.0
        lines.append(f"{p:<24}{pct:>9.1f}{len(solved[p]):>8}{unique:>8}")
        union |= solved[p]
    pct = 100.0 * len(union) / total if total else 0.0
    lines.append(f"{'Sum':<24}{pct:>9.1f}{len(union):>8}{'':>8}")
    recon = [r for r in rows if r["recon_hints"]]
    if recon:
        lines.append("")
        lines.append(f"{'Reconstruction':<24}{'Success%':>9}{'Success':>8}")
        for key, label in (("recon_hints", "with hints"), ("recon_none", "without hints")):
            ok = sum(1 for r in recon if r[key] == "ok")
            lines.append(f"{label:<24}{100.0 * ok / len(recon):>9.1f}{ok:>8}")
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    corpus_dir = args.corpus
    if not Path(corpus_dir).is_dir():
        _err(f"not a directory: {corpus_dir}")
        return EXIT_PARSE
    provers = args.prover or ["builtin"]
    try:
        rows = bench(corpus_dir, provers, args.workers, args.timeout, args.reconstruct,
                     args.recon_seconds)
    except KernelError as e:
        _err(str(e))
        return EXIT_PARSE
    sys.stdout.write(summary_tables(rows))
    text = rows_to_csv(rows)
    if args.csv:
        Path(args.csv).write_text(text)
    return EXIT_OK


# --------------------------------------------------------------------------
# self-check


def self_check(quick: bool = True) -> list[tuple[str, bool, str]]:
    """Compare each procedure against its brute-force oracle on small inputs."""
    import random

    from . import oracle

    results = []
    depth = 2 if quick else 3
    bad = 0
    n = 0
    for f in oracle.enumerate_formulas(2, depth):
        n += 1
        out = rec.prove_seq(rec.Sequent(frozenset(), f), rec.Budget(depth=None, seconds=1e9))
        if isinstance(out, rec.ProofTrace) != oracle.ipc_decide(f):
            bad += 1
    results.append(("reconstruction agrees with the IPC oracle", bad == 0, f"{n} formulas, {bad} disagreements"))

    rng = random.Random(0)
    bad = 0
    trials = 200 if quick else 1000
    for _ in range(trials):
        eqs, (a, b) = oracle.random_ground_instance(rng)
        if rec.congruence_close(eqs, (a, b)) != oracle.ground_congruent(eqs, a, b):
            bad += 1
    results.append(("congruence closure agrees with ground completion", bad == 0,
                    f"{trials} instances, {bad} disagreements"))

    bad = 0
    n = 0
    for f in oracle.enumerate_closed_formulas(max_connectives=1 if quick else 2, max_quantifiers=1 if quick else 2):
        n += 1
        clauses = [atp.clause_formula(c) for c in atp.clausify_formula(f)]
        for size in (1, 2):
            if oracle.satisfiable([f], size) != oracle.satisfiable(clauses, size):
                bad += 1
    results.append(("clausification preserves satisfiability", bad == 0, f"{n} formulas, {bad} violations"))
    return results


def cmd_self_check(args) -> int:
    ok = True
    for name, passed, detail in self_check(quick=not args.full):
        print(f"{'PASS' if passed else 'FAIL'}  {name} ({detail})")
        ok &= passed
    return EXIT_OK if ok else 1


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tthammer", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("translate", help="write the TPTP problem for a conjecture")
    t.add_argument("input", help="declaration file, corpus directory or manifest")
    t.add_argument("--conjecture", required=True)
    t.add_argument("--premises", help="file with one name per line, or ALL")
    t.add_argument("--depth", type=int, default=2, help="dependency closure depth")
    t.add_argument("-o", "--output")
    t.add_argument("--arity-opt", action="store_true", help="first-order arity optimization")
    t.add_argument("--diag", help="write encoder diagnostics to this file")
    t.set_defaults(func=cmd_translate)

    p = sub.add_parser("prove", help="run a prover on a TPTP problem")
    p.add_argument("problem")
    p.add_argument("--prover", help=f"'builtin' or a command template with {{file}} and {{t}}; "
                                    f"defaults to ${PROVER_ENV} or builtin")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--hints-out", help="also write the JSON report here")
    p.set_defaults(func=cmd_prove)

    r = sub.add_parser("reconstruct", help="rebuild an intuitionistic proof from hints")
    r.add_argument("input")
    r.add_argument("--conjecture", required=True)
    r.add_argument("--hints", help="JSON with 'lemmas' and 'unfolds' (the output of prove)")
    r.add_argument("--depth", type=int, default=8)
    r.add_argument("--seconds", type=float, default=10.0)
    r.add_argument("-o", "--output", help="trace file (default NAME.trace.json)")
    r.set_defaults(func=cmd_reconstruct)

    b = sub.add_parser("bench", help="translate and prove every conjecture of a corpus")
    b.add_argument("corpus")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--timeout", type=float, default=30.0)
    b.add_argument("--prover", action="append", help="repeatable; default builtin")
    b.add_argument("--reconstruct", action="store_true")
    b.add_argument("--recon-seconds", type=float, default=10.0)
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("self-check", help="compare procedures with their oracles")
    s.add_argument("--full", action="store_true")
    s.set_defaults(func=cmd_self_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
