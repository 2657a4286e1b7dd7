"""JSON verdict reports and their replay."""

from __future__ import annotations

import hashlib
import json
from typing import Optional

from .explore import Verdict, Witness, replay_witness
from .marking import PumpingCertificate, certificate_error
from .modulo import ModStep
from .problem import ProblemFile, format_problem, make_problem, parse_problem, parse_term
from .terms import Term
from .transform import preprocess
from .trs import EquationSet, RewriteStep, Trs

SCHEMA = "termite-report/1"
TOOL = "termite"
VERSION = "0.1.0"


class ReportError(ValueError):
    pass


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# ---- encoding ---------------------------------------------------------------


def step_to_dict(st: RewriteStep) -> dict:
    return {
        "kind": st.kind,
        "rule": st.rule_index,
        "position": list(st.position),
        "substitution": {x: str(t) for x, t in sorted(st.substitution.items())},
        "source": str(st.source),
        "target": str(st.target),
    }


def modstep_to_dict(ms: ModStep) -> dict:
    return {
        "pre": [step_to_dict(s) for s in ms.pre_equational],
        "core": step_to_dict(ms.core),
        "post": [step_to_dict(s) for s in ms.post_equational],
    }


def certificate_to_dict(c: PumpingCertificate) -> dict:
    return {
        "constant": c.constant,
        "start": str(c.start),
        "reach": [step_to_dict(s) for s in c.reach],
        "reach_position": list(c.reach_position),
        "loop": [step_to_dict(s) for s in c.loop],
        "loop_position": list(c.loop_position),
        "marks": [list(p) for p in c.marks],
    }


def witness_to_dict(w: Witness) -> dict:
    out = {
        "kind": w.kind,
        "start": str(w.start),
        "bound": w.bound,
        "entry": [step_to_dict(s) for s in w.entry],
        "prefix": [modstep_to_dict(m) for m in w.prefix],
        "loop": [modstep_to_dict(m) for m in w.loop],
        "loop_length": len(w.loop),
        "steps": len(w.steps()),
    }
    if isinstance(w.pumping, PumpingCertificate):
        out["pumping"] = certificate_to_dict(w.pumping)
    elif w.pumping is not None:
        out["pumping"] = {"not_found": str(w.pumping)}
    return out


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)


def build_report(
    verdict: Verdict,
    *,
    procedure: str,
    mode: str,
    input_text: str = "",
    input_path: str = "",
    start: Term | None = None,
    budget: int | None = None,
    budget_source: str = "default",
    seconds: float | None = None,
    preprocess_args: dict | None = None,
) -> dict:
    rep: dict = {
        "schema": SCHEMA,
        "tool": {"name": TOOL, "version": VERSION},
        "input": {"path": input_path, "sha256": digest(input_text)},
        "procedure": procedure,
        "mode": mode,
        "start": None if start is None else str(start),
        "result": verdict.result,
    }
    if verdict.unknown:
        rep["reason"] = "budget"
        rep["detail"] = verdict.reason
    if verdict.witness is not None:
        rep["witness"] = witness_to_dict(verdict.witness)
    rep["stats"] = _plain(verdict.stats)
    rep["budget"] = {"limit": budget, "source": budget_source}
    rep["seconds"] = seconds
    rep["transform_trace"] = verdict.trace.as_dict() if verdict.trace is not None else None
    if verdict.system is not None:
        R, E = verdict.system
        rep["system"] = format_problem(make_problem(R, E))
        rep["preprocess"] = preprocess_args
    return rep


def emit_report(verdict: Verdict, trace=None, **kw) -> str:
    """Serialize a verdict; key order is fixed by construction."""
    if trace is not None and verdict.trace is None:
        verdict.trace = trace
    kw.setdefault("procedure", "from-term")
    kw.setdefault("mode", "plain")
    return json.dumps(build_report(verdict, **kw), indent=2) + "\n"


# ---- decoding and replay ----------------------------------------------------


def _term(text: str) -> Term:
    return parse_term(text, allow_reserved=True)


def step_from_dict(d: dict) -> RewriteStep:
    try:
        return RewriteStep(
            int(d["rule"]),
            tuple(int(i) for i in d["position"]),
            {x: _term(t) for x, t in d["substitution"].items()},
            _term(d["source"]),
            _term(d["target"]),
            d["kind"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportError(f"malformed step: {exc}") from exc


def modstep_from_dict(d: dict) -> ModStep:
    return ModStep(
        tuple(step_from_dict(s) for s in d["pre"]),
        step_from_dict(d["core"]),
        tuple(step_from_dict(s) for s in d["post"]),
    )


def certificate_from_dict(d: dict) -> PumpingCertificate:
    return PumpingCertificate(
        d["constant"],
        _term(d["start"]),
        tuple(step_from_dict(s) for s in d["reach"]),
        tuple(d["reach_position"]),
        tuple(step_from_dict(s) for s in d["loop"]),
        tuple(d["loop_position"]),
        tuple(tuple(p) for p in d.get("marks", ((), ()))),
    )


def witness_from_dict(d: dict) -> Witness:
    try:
        w = Witness(
            d["kind"],
            _term(d["start"]),
            int(d["bound"]),
            tuple(step_from_dict(s) for s in d["entry"]),
            tuple(modstep_from_dict(m) for m in d["prefix"]),
            tuple(modstep_from_dict(m) for m in d["loop"]),
        )
    except (KeyError, TypeError) as exc:
        raise ReportError(f"malformed witness: {exc}") from exc
    p = d.get("pumping")
    if p is not None and "constant" in p:
        w.pumping = certificate_from_dict(p)
    return w


def replay_system(problem: ProblemFile, report: dict) -> tuple[Trs, EquationSet]:
    """The system a report's witness refers to: the embedded transformed one, else the input."""
    text = report.get("system")
    if not text:
        return problem.trs, problem.equations
    args = report.get("preprocess")
    if not args:
        raise ReportError("embedded system without preprocessing parameters")
    R, E, _ = preprocess(problem.trs, problem.equations, args["mode"], args["target"], bool(args.get("collapse")))
    if format_problem(make_problem(R, E)) != text:
        raise ReportError("embedded system differs from the preprocessed input")
    pf = parse_problem(text, allow_reserved=True)
    return pf.trs, pf.equations


def check_report(problem_text: str, report: dict) -> Optional[str]:
    """None when the report's witness replays against the problem; else the reason it does not."""
    if report.get("schema") != SCHEMA:
        return f"unsupported schema {report.get('schema')!r}"
    if report.get("result") != "nonterminating":
        return "report has no nontermination witness"
    if "witness" not in report:
        return "missing witness"
    problem = parse_problem(problem_text)
    if report.get("input", {}).get("sha256") not in (None, digest(problem_text)):
        return "input digest mismatch"
    try:
        R, E = replay_system(problem, report)
        w = witness_from_dict(report["witness"])
    except (ReportError, ValueError) as exc:
        return str(exc)
    if report.get("start") is not None and report.get("transform_trace") is None:
        if _term(report["start"]) != w.start:
            return "witness start differs from the reported start term"
    err = replay_witness(w, R, E)
    if err is not None:
        return err
    if isinstance(w.pumping, PumpingCertificate):
        err = certificate_error(w.pumping, R, E)
        if err is not None:
            return f"pumping certificate: {err}"
    return None
