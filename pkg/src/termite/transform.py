"""Preprocessing: signature collapse, left/right flattening and the A3 filter."""

from __future__ import annotations

from dataclasses import dataclass, field

from .modulo import is_normal_mod
from .terms import App, Signature, Symbol, Term, Var, apply_subst, const, iter_positions, variables
from .trs import EquationSet, Rule, Trs

PLAIN_MODE = "plain"
INNERMOST_MODE = "innermost"
FLAT = "flat"
RIGHT_FLAT = "right-flat"

COLLAPSED_SYMBOL = "#f"
FRESH_PREFIX = "#k"


@dataclass
class TransformTrace:
    original_signature: Signature
    result_signature: Signature
    ledger: list[tuple[str, Term, str]] = field(default_factory=list)
    mode: str = PLAIN_MODE
    collapsed: bool = False
    removed_rules: list[int] = field(default_factory=list)

    def fresh_names(self) -> set[str]:
        return {c for c, _, _ in self.ledger}

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "collapsed": self.collapsed,
            "original_signature": [[s.name, s.arity] for s in self.original_signature],
            "result_signature": [[s.name, s.arity] for s in self.result_signature],
            "fresh_constants": [{"constant": c, "term": str(u), "step": d} for c, u, d in self.ledger],
            "removed_rules": list(self.removed_rules),
        }


def _fresh(sig: Signature, trace: TransformTrace) -> str:
    k = len(trace.ledger)
    while f"{FRESH_PREFIX}{k}" in sig:
        k += 1
    return f"{FRESH_PREFIX}{k}"


# ---- signature collapse ---------------------------------------------------


def collapse_arity(sig: Signature) -> int:
    return max((s.arity for s in sig), default=0) + 1


def collapse_term(t: Term, m: int) -> Term:
    """T: ``g(t1..tk)`` becomes ``#f(T(t1)..T(tk), g, .., g)`` with ``m`` arguments."""
    if isinstance(t, Var) or not t.args:
        return t
    args = [collapse_term(a, m) for a in t.args]
    args += [const(t.symbol)] * (m - len(args))
    return App(COLLAPSED_SYMBOL, args)


def collapse_signature(R: Trs, E: EquationSet, trace: TransformTrace | None = None):
    sig = R.signature.extended(E.signature.symbols)
    m = collapse_arity(sig)
    new_sig = Signature([Symbol(s.name, 0) for s in sig] + [Symbol(COLLAPSED_SYMBOL, m)])
    rules = [Rule(collapse_term(r.lhs, m), collapse_term(r.rhs, m)) for r in R.rules]
    eqs = [Rule(collapse_term(r.lhs, m), collapse_term(r.rhs, m)) for r in E.rules]
    if trace is None:
        trace = TransformTrace(sig, new_sig)
    trace.result_signature = new_sig
    trace.collapsed = True
    return Trs(new_sig, rules), EquationSet(new_sig, tuple(eqs)), trace


# ---- flattening ------------------------------------------------------------


def replace_all(t: Term, u: Term, c: Term) -> Term:
    """NF_{u->c}(t) for a ground flat ``u``."""
    if t == u:
        return c
    if isinstance(t, Var) or not t.args:
        return t
    return App(t.symbol, [replace_all(a, u, c) for a in t.args])


def expand_fresh(t: Term, trace: TransformTrace) -> Term:
    """NF_{c->u}(t): unfold every fresh constant into the ground term it names."""
    table = {c: u for c, u, _ in trace.ledger}
    if not table:
        return t

    def go(s):
        if isinstance(s, Var):
            return s
        if not s.args:
            u = table.get(s.symbol)
            return s if u is None else go(u)
        return App(s.symbol, [go(a) for a in s.args])

    return go(t)


def _ground_flat_proper(t: Term):
    for p, s in iter_positions(t):
        if p and isinstance(s, App) and s.height == 1 and all(not isinstance(a, Var) for a in s.args):
            return s
    return None


def deep_positions(terms) -> int:
    return sum(1 for t in terms for p, _ in iter_positions(t) if len(p) > 1)


def _flatten(R: Trs, trace: TransformTrace, side: str) -> Trs:
    rules = list(R.rules)
    sig = R.signature
    added: list[Rule] = []
    pick = (lambda r: r.lhs) if side == "a" else (lambda r: r.rhs)
    measure = deep_positions(pick(r) for r in rules)
    while True:
        u = next((s for s in (_ground_flat_proper(pick(r)) for r in rules) if s is not None), None)
        if u is None:
            break
        name = _fresh(sig, trace)
        c = const(name)
        sig = sig.extended([Symbol(name, 0)])
        trace.ledger.append((name, u, side))
        if side == "a":
            rules = [Rule(replace_all(r.lhs, u, c), r.rhs) for r in rules]
            added.append(Rule(u, c))
        else:
            rules = [Rule(r.lhs, replace_all(r.rhs, u, c)) for r in rules]
            added.append(Rule(c, u))
        new_measure = deep_positions(pick(r) for r in rules)
        assert new_measure < measure, "flattening measure did not decrease"
        measure = new_measure
    trace.result_signature = sig
    return Trs(sig, added + rules)


def flatten_lhs(R: Trs, trace: TransformTrace | None = None) -> tuple[Trs, TransformTrace]:
    trace = trace or TransformTrace(R.signature, R.signature)
    return _flatten(R, trace, "a"), trace


def flatten_rhs(R: Trs, trace: TransformTrace | None = None) -> tuple[Trs, TransformTrace]:
    trace = trace or TransformTrace(R.signature, R.signature)
    return _flatten(R, trace, "b"), trace


# ---- A3 -------------------------------------------------------------------


def freeze(t: Term) -> Term:
    """Replace each variable x by a fresh constant ``#x``."""
    return apply_subst({x: const("#" + x) for x in variables(t)}, t)


def innermost_usable_filter(R: Trs, E: EquationSet, trace: TransformTrace | None = None) -> Trs:
    keep = []
    for i, r in enumerate(R.rules):
        proper = (s for p, s in iter_positions(r.lhs) if p and isinstance(s, App))
        if all(is_normal_mod(freeze(s), R, E) for s in proper):
            keep.append(r)
        elif trace is not None:
            trace.removed_rules.append(i)
    return Trs(R.signature, keep)


# ---- pipeline -----------------------------------------------------------


def preprocess(R: Trs, E: EquationSet, mode: str = PLAIN_MODE, target: str = FLAT, collapse: bool = False):
    """Filter (innermost only), flatten right then left, optionally collapse the signature."""
    sig = R.signature.extended(E.signature.symbols)
    trace = TransformTrace(sig, sig, mode=mode)
    R = R.with_signature(sig)
    E = E.with_signature(sig)
    if mode == INNERMOST_MODE:
        R = innermost_usable_filter(R, E, trace)
    R, trace = flatten_rhs(R, trace)
    if target == FLAT:
        R, trace = flatten_lhs(R, trace)
    E = E.with_signature(R.signature)
    if collapse:
        R, E, trace = collapse_signature(R, E, trace)
    return R, E, trace


def map_start(t: Term, trace: TransformTrace) -> Term:
    """Map an original start term into the transformed system."""
    if trace.collapsed:
        return collapse_term(t, trace.result_signature.arity(COLLAPSED_SYMBOL))
    return t
