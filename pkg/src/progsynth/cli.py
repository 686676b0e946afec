"""Command-line front end: ``synth``, ``run`` and ``corpus``.

Exit codes: 0 success, 2 parse error, 3 search exhausted or unsupported spec,
4 verification disagreement, 5 interpreter error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path

from . import calculus as cal
from . import programs as pg
from . import runtime as rt
from . import search as se
from . import specs as sp
from .corpus import CORPUS, CorpusSpec

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SEARCH = 3
EXIT_VERIFY = 4
EXIT_RUN = 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="progsynth", description="Synthesize programs from predicate-calculus specs.")
    sub = parser.add_subparsers(dest="command", required=True)

    search_opts = argparse.ArgumentParser(add_help=False)
    search_opts.add_argument("--depth", type=_positive, default=24, help="max nested inverse rules (default 24)")
    search_opts.add_argument("--def-chain", type=_positive, default=6, help="max consecutive DEF steps (default 6)")
    search_opts.add_argument("--def-eq", choices=("off", "restricted", "full"), default="restricted")
    search_opts.add_argument("--max-nodes", type=_positive, default=200_000, help="search node budget")
    search_opts.add_argument("--steps", type=_positive, default=rt.DEFAULT_STEP_LIMIT, help="interpreter step limit")
    search_opts.add_argument("--format", choices=("text", "json"), default="text")
    search_opts.add_argument("--store", type=Path, help="theorem store JSON file, loaded and updated")
    search_opts.add_argument("--fresh", action="store_true", help="ignore an existing theorem store")

    p = sub.add_parser("synth", parents=[search_opts], help="synthesize a program for a spec")
    p.add_argument("spec")
    p.add_argument("--trace", action="store_true", help="print the backward proof and forward evaluation")
    p.add_argument("--verify", type=_positive, metavar="N", help="check against the oracle on [1..N] per input")
    p.add_argument("--simplify", action="store_true", help="apply the flag-elimination rewrite CR1")
    p.add_argument("--name", help="store the result under this theorem name")

    p = sub.add_parser("run", help="run a program file (use - for stdin)")
    p.add_argument("program")
    p.add_argument("--inputs", default="", help="comma separated, e.g. i=3,j=4")
    p.add_argument("--steps", type=_positive, default=rt.DEFAULT_STEP_LIMIT)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("corpus", parents=[search_opts], help="bootstrap the theorems and run the extra specs")
    p.add_argument("--verify", type=_positive, metavar="N", help="override each row's verification grid")
    p.add_argument("--stretch", action="store_true", help="also attempt the forall specs")
    p.add_argument("--timing", action="store_true", help="add a wall-time column")
    return parser


def _config(args) -> se.SearchConfig:
    return se.SearchConfig(max_depth=args.depth, max_def_chain=args.def_chain, def_eq=args.def_eq, max_nodes=args.max_nodes)


def _load_store(args, cfg: se.SearchConfig) -> se.TheoremStore:
    if args.store is not None and args.store.exists() and not args.fresh:
        return se.TheoremStore.load(args.store)
    store = se.TheoremStore()
    try:
        se.bootstrap_theorems(store, cfg)
    except se.SearchExhausted as exc:
        raise CliError(f"search failed: {exc}", EXIT_SEARCH) from None
    return store


def _parse_spec(text: str) -> sp.Wff:
    try:
        w = sp.parse_spec(text)
        sp.check_closed(w)
        return w
    except sp.SpecError as exc:
        raise CliError(f"parse error: {exc}", EXIT_PARSE) from None


def _verify(j: cal.Judgment, n: int, steps: int) -> rt.Report:
    return rt.check_judgment(j, range(1, n + 1), step_limit=steps)


# --- synth ----------------------------------------------------------------------------


def cmd_synth(args, out) -> int:
    goal = _parse_spec(args.spec)
    cfg = _config(args)
    store = _load_store(args, cfg)
    # a goal that is itself a stored theorem is re-derived from the ones before it
    own = store.find(goal)
    pool = store.before(own.name) if own is not None else store
    try:
        result = se.synthesize(goal, cfg, pool)
    except se.SearchExhausted as exc:
        raise CliError(f"search failed: {exc}", EXIT_SEARCH) from None
    program = result.judgment.program
    if args.simplify:
        program = pg.simplify_cr1(program)
    if args.name:
        se.store_result(store, args.name, result, simplify=True)
    if args.store is not None:
        store.save(args.store)

    report = None
    if args.verify:
        report = _verify(cal.Judgment(program, result.judgment.spec), args.verify, args.steps)

    theorems = pool.judgments()
    if args.format == "json":
        doc = {
            "spec": sp.render_spec(goal),
            "program": pg.render(program),
            "derivation": [cal.entry_to_json(e) for e in result.derivation.entries],
        }
        if args.trace:
            doc["backward"] = [
                {"step": label, "entries": [{"text": t, "new": new} for t, new in lines]}
                for label, lines in se.backward_trace(result.proof)
            ]
            doc["forward"] = [
                {"entry": e.label(), "judgment": str(stack[-1])}
                for e, stack in zip(result.derivation.entries, cal.eval_steps(result.derivation.entries, theorems))
            ]
        if report is not None:
            doc["verify"] = report.to_json()
        print(json.dumps(doc, indent=1, sort_keys=True), file=out)
    else:
        if args.trace:
            print("backward proof:", file=out)
            print(se.format_backward_trace(result.proof), file=out)
            print("forward evaluation:", file=out)
            print(cal.format_trace(result.derivation.entries, theorems), file=out)
            print("program:", file=out)
        print(pg.render(program), file=out)
        if report is not None:
            print(_verdict(report), file=out)
    if report is not None and not report.ok:
        return EXIT_VERIFY
    return EXIT_OK


def _verdict(report: rt.Report) -> str:
    if report.ok:
        return f"verified: {report.envs} inputs agree with the oracle"
    first = report.disagreements[0].to_json()
    return f"MISMATCH on {len(report.disagreements)} of {report.envs} inputs, first {json.dumps(first, sort_keys=True)}"


# --- run ------------------------------------------------------------------------------


_INPUT_NAME = re.compile(r"\$?([ijk])(\d*)$")


def parse_inputs(text: str) -> dict[int, int]:
    """``"i=3,j=4"`` -> ``{1: 3, 2: 4}``; names follow i, j, k, i4, i5, ..."""
    env: dict[int, int] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, sep, value = item.partition("=")
        m = _INPUT_NAME.match(name.strip())
        if not sep or not m:
            raise CliError(f"bad input binding {item!r}", EXIT_PARSE)
        letter, digits = m.groups()
        if digits:
            if letter != "i" or int(digits) < 4:
                raise CliError(f"bad input name {name!r}", EXIT_PARSE)
            rank = int(digits)
        else:
            rank = "ijk".index(letter) + 1
        try:
            env[rank] = int(value)
        except ValueError:
            raise CliError(f"input {name} is not an integer: {value!r}", EXIT_PARSE) from None
    return env


def cmd_run(args, out) -> int:
    text = sys.stdin.read() if args.program == "-" else Path(args.program).read_text(encoding="utf-8")
    try:
        program = pg.parse_program(text)
    except pg.ProgramError as exc:
        raise CliError(f"parse error: {exc}", EXIT_PARSE) from None
    env = parse_inputs(args.inputs)
    try:
        result = rt.run(program, env, args.steps)
    except (rt.RuntimeFault, rt.InputError) as exc:
        raise CliError(f"run error: {exc}", EXIT_RUN) from None
    if args.format == "json":
        print(json.dumps({"outputs": [rt.format_value(v) for v in result.outputs], "steps": result.steps}), file=out)
    else:
        for v in result.outputs:
            print(rt.format_value(v), file=out)
    return EXIT_OK


# --- corpus ---------------------------------------------------------------------------


def _corpus_rows(stretch: bool) -> list[CorpusSpec]:
    return [c for c in CORPUS if c.status != "stretch" or stretch]


def run_corpus_row(c: CorpusSpec, store: se.TheoremStore, cfg: se.SearchConfig, grid: int, steps: int) -> dict:
    row = {"name": c.name, "spec": c.text, "status": c.status}
    goal = sp.parse_spec(c.text)
    if c.name.startswith("thm") and c.name[3:] in store:
        thm = store.get(c.name[3:])
        judgment, derivation, theorems = thm.judgment, thm.derivation, store.before(thm.name).judgments()
    else:
        try:
            result = se.synthesize(goal, cfg, store)
        except se.SearchExhausted as exc:
            row.update(result="unsupported", reason=str(exc), ok=c.status != "required")
            return row
        judgment = cal.Judgment(pg.simplify_cr1(result.judgment.program), result.judgment.spec)
        derivation, theorems = result.derivation, store.judgments()
    replay = cal.replay_check(derivation, theorems)
    report = rt.check_judgment(judgment, range(1, grid + 1), step_limit=steps)
    row.update(
        result="synthesized",
        program=pg.render(judgment.program),
        length=len(pg.render(judgment.program)),
        entries=len(derivation.entries),
        derivation=cal.derivation_to_json(derivation),
        replay=bool(replay),
        verify=report.to_json(),
        ok=bool(replay) and report.ok,
    )
    return row


def cmd_corpus(args, out) -> int:
    cfg = _config(args)
    started = time.perf_counter()
    if args.store is not None and args.store.exists() and not args.fresh:
        store = se.TheoremStore.load(args.store)
    else:
        store = se.TheoremStore()
    try:
        se.bootstrap_theorems(store, cfg)
    except se.SearchExhausted as exc:
        raise CliError(f"search failed: {exc}", EXIT_SEARCH) from None
    if args.store is not None:
        store.save(args.store)

    rows = []
    for c in _corpus_rows(args.stretch):
        t0 = time.perf_counter()
        row = run_corpus_row(c, store, cfg, args.verify or c.grid, args.steps)
        row["seconds"] = round(time.perf_counter() - t0, 3)
        rows.append(row)

    failed = [r for r in rows if not r["ok"]]
    if args.format == "json":
        if not args.timing:
            for r in rows:
                r.pop("seconds")
        print(json.dumps({"rows": rows, "ok": not failed}, indent=1, sort_keys=True), file=out)
    else:
        for r in rows:
            print(_corpus_line(r, args.timing), file=out)
        total = f" in {time.perf_counter() - started:.2f}s" if args.timing else ""
        print(f"{len(rows) - len(failed)}/{len(rows)} rows as expected{total}", file=out)
    if not failed:
        return EXIT_OK
    return EXIT_VERIFY if all(r["result"] == "synthesized" for r in failed) else EXIT_SEARCH


def _corpus_line(r: dict, timing: bool) -> str:
    if r["result"] == "synthesized":
        v = r["verify"]
        verdict = f"verified {v['envs']}" if v["ok"] else f"MISMATCH {v['disagreements']}/{v['envs']}"
        replay = "replay ok" if r["replay"] else "REPLAY FAILED"
        detail = f"synthesized  len={r['length']:<5} entries={r['entries']:<3} {replay}  {verdict}"
    else:
        detail = f"unsupported  ({_short_reason(r['reason'])})"
    mark = "ok  " if r["ok"] else "FAIL"
    line = f"{mark} {r['name']:<8} {r['status']:<11} {detail}  {r['spec']}"
    if timing:
        line += f"  [{r['seconds']:.2f}s]"
    return line


def _short_reason(reason: str) -> str:
    if "repeated output variable" in reason:
        return "repeated output variable"
    return reason


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    handler = {"synth": cmd_synth, "run": cmd_run, "corpus": cmd_corpus}[args.command]
    try:
        return handler(args, out)
    except CliError as exc:
        print(f"progsynth: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
