"""Command-line entry points: classify, flatten, decide, generate, check-witness."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import generators as gen
from .config import DecideConfig, run_decide
from .explore import DEFAULT_BUDGET, OVERFLOW
from .marking import NotFound, extract_pumping
from .modulo import ClassBudgetExceeded
from .problem import ParseError, ProblemFile, format_problem, make_problem, parse_problem, parse_term
from .report import ReportError, check_report, emit_report
from .transform import FLAT, INNERMOST_MODE, PLAIN_MODE, RIGHT_FLAT, map_start, preprocess
from .trs import NotPermutative, classify

EXIT = {"terminating": 0, "nonterminating": 1, "unknown": 2}
INPUT_ERROR = 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: str, text: str):
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _load(path: str) -> ProblemFile:
    return parse_problem(_read(path))


def _budget(args) -> tuple[int, str]:
    if args.budget is not None:
        return args.budget, "flag"
    env = os.environ.get("TERMITE_BUDGET")
    if env:
        try:
            return int(env), "env"
        except ValueError:
            raise InputError(f"TERMITE_BUDGET is not an integer: {env!r}")
    return DEFAULT_BUDGET, "default"


# ---- subcommands --------------------------------------------------------------


def cmd_classify(args, out) -> int:
    pf = _load(args.file)
    rep = classify(pf.trs)
    if args.json:
        out.write(json.dumps(rep.as_dict(), indent=2) + "\n")
    else:
        for k, v in rep.as_dict().items():
            out.write(f"{k}: {'yes' if v else 'no'}\n")
        out.write(f"equations: {len(pf.equations.rules)}\n")
    return 0


def cmd_flatten(args, out) -> int:
    pf = _load(args.file)
    R, E, trace = preprocess(pf.trs, pf.equations, args.mode, args.target, args.collapse)
    start = map_start(pf.start, trace) if pf.start is not None else None
    text = format_problem(make_problem(R, E, start))
    _write(args.output, text)
    _write(args.output + ".trace.json", json.dumps(trace.as_dict(), indent=2) + "\n")
    out.write(f"wrote {args.output} ({len(R.rules)} rules, {len(trace.ledger)} fresh constants)\n")
    return 0


def cmd_decide(args, out) -> int:
    text = _read(args.file)
    pf = parse_problem(text)
    budget, source = _budget(args)
    cfg = DecideConfig(
        mode=args.mode,
        budget=budget,
        engine=args.engine,
        collapse=args.collapse,
        prune=not args.no_prune,
        auto_flatten=args.auto_flatten,
        pumping=args.pumping,
    )
    start = parse_term(args.start, variables=pf.variables) if args.start is not None else None
    t0 = time.perf_counter()
    res = run_decide(pf, cfg, start)
    v = res.verdict
    w = v.witness
    if w is not None and w.kind == OVERFLOW and cfg.pumping:
        R, E = v.system if v.system is not None else (pf.trs, pf.equations)
        try:
            w.pumping = extract_pumping(w, R, E)
        except NotFound as exc:
            w.pumping = exc
    seconds = time.perf_counter() - t0
    report = emit_report(
        v,
        procedure=res.procedure,
        mode=cfg.mode,
        input_text=text,
        input_path=args.file,
        start=res.start,
        budget=budget,
        budget_source=source,
        seconds=seconds,
        preprocess_args=res.preprocess_args,
    )
    if args.output:
        _write(args.output, report)
    if args.json:
        out.write(report)
    else:
        line = f"{v.result.upper()}"
        if w is not None:
            line += f" ({w.kind}, {len(w.steps())} steps, loop of {len(w.loop)} classes)"
        if v.unknown:
            line += f" ({v.reason})"
        out.write(line + "\n")
    return EXIT[v.result]


def _automata(spec: str) -> list:
    data = json.loads(_read(spec[1:]) if spec.startswith("@") else spec)
    return [gen.AutomatonSpec(a["states"], a["initial"], a["finals"], [tuple(t) for t in a["transitions"]]) for a in data]


def cmd_generate(args, out) -> int:
    start = None
    if args.kind == "automata":
        if not args.spec:
            raise InputError("automata needs --spec (JSON list or @file)")
        R = gen.gen_intersection_trs(_automata(args.spec), pad_single=args.pad_single)
    else:
        if not args.pairs:
            raise InputError(f"{args.kind} needs --pairs like aa:a,b:aba")
        inst = gen.PcpInstance.parse(args.pairs)
        if args.kind == "pcp":
            R = gen.gen_pcp_trs(inst)
            if args.witness:
                start = gen.pcp_witness_term(inst, [int(i) for i in args.witness.split(",")])
        else:
            R = gen.gen_pcp_innermost_trs(inst)
            if args.word is not None:
                start = gen.pcp_innermost_start(args.word)
    text = format_problem(make_problem(R, None, start))
    if args.output:
        _write(args.output, text)
        out.write(f"wrote {args.output} ({len(R.rules)} rules)\n")
    else:
        out.write(text)
    return 0


def cmd_check_witness(args, out) -> int:
    text = _read(args.file)
    try:
        report = json.loads(_read(args.report))
    except json.JSONDecodeError as exc:
        raise InputError(f"report is not JSON: {exc}") from exc
    err = check_report(text, report)
    if err is None:
        out.write("witness ok\n")
        return 0
    out.write(f"witness rejected: {err}\n")
    return 1


# ---- argument parsing ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="termite", description="Termination of right-flat rewrite systems modulo permutative theories.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="print syntactic classes of the rules")
    c.add_argument("file")
    c.add_argument("--json", action="store_true")
    c.set_defaults(run=cmd_classify)

    f = sub.add_parser("flatten", help="write the preprocessed problem and its trace")
    f.add_argument("file")
    f.add_argument("--mode", choices=[PLAIN_MODE, INNERMOST_MODE], default=PLAIN_MODE)
    f.add_argument("--target", choices=[FLAT, RIGHT_FLAT], default=FLAT)
    f.add_argument("--collapse", action="store_true", help="also collapse to a single function symbol")
    f.add_argument("-o", "--output", required=True)
    f.set_defaults(run=cmd_flatten)

    d = sub.add_parser("decide", help="decide (innermost) termination")
    d.add_argument("file")
    d.add_argument("--mode", choices=[PLAIN_MODE, INNERMOST_MODE], default=PLAIN_MODE)
    d.add_argument("--from", dest="start", metavar="TERM")
    d.add_argument("--auto-flatten", action="store_true")
    d.add_argument("--budget", type=int)
    d.add_argument("--engine", choices=["auto", "bfs", "compose"], default="auto")
    d.add_argument("--collapse", action="store_true")
    d.add_argument("--no-prune", action="store_true", help="check every flat start term")
    d.add_argument("--pumping", action="store_true", help="attach a pumping certificate to overflow witnesses")
    d.add_argument("--json", action="store_true")
    d.add_argument("-o", "--output", help="also write the JSON report here")
    d.set_defaults(run=cmd_decide)

    g = sub.add_parser("generate", help="emit a reduction instance")
    g.add_argument("kind", choices=["automata", "pcp", "pcp-innermost"])
    g.add_argument("--spec", help="automata as JSON, or @file")
    g.add_argument("--pad-single", action="store_true", help="duplicate a lone automaton")
    g.add_argument("--pairs", help="PCP pairs, e.g. aa:a,b:aba")
    g.add_argument("--witness", help="PCP index sequence for the START term, e.g. 1,2,1")
    g.add_argument("--word", help="word for the innermost START term")
    g.add_argument("-o", "--output")
    g.set_defaults(run=cmd_generate)

    w = sub.add_parser("check-witness", help="replay the witness in a JSON report")
    w.add_argument("file")
    w.add_argument("report")
    w.set_defaults(run=cmd_check_witness)
    return p


def run_command(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.run(args, out)
    except (InputError, ParseError, NotPermutative, ReportError, ClassBudgetExceeded, ValueError) as exc:
        print(f"termite: {exc}", file=sys.stderr)
        return INPUT_ERROR


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
