"""Rewrite rules, rule sets, equation sets and single-step rewriting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .terms import (
    App,
    InvalidPosition,
    Position,
    Signature,
    Substitution,
    Symbol,
    Term,
    Var,
    apply_subst,
    is_flat,
    is_ground,
    is_linear,
    is_shallow,
    iter_nodes,
    iter_positions,
    match,
    replace_at,
    subterm_at,
    variables,
)


class InvalidRule(ValueError):
    pass


class UnboundRhsVariable(InvalidRule):
    """The right-hand side uses a variable absent from the left-hand side.

    Such a system is trivially nonterminating; callers may short-circuit.
    """


class NotPermutative(ValueError):
    def __init__(self, rule: "Rule", reason: str):
        super().__init__(f"{rule} is not permutative: {reason}")
        self.rule = rule
        self.reason = reason


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise InvalidRule(f"left-hand side of {self} is a variable")
        extra = variables(self.rhs) - variables(self.lhs)
        if extra:
            raise UnboundRhsVariable(f"{self}: variables {sorted(extra)} not in lhs")

    def __str__(self):
        return f"{self.lhs} -> {self.rhs}"

    def reversed(self) -> "Rule":
        return Rule(self.rhs, self.lhs)


def infer_signature(terms: Iterable[Term], base: Signature | None = None) -> Signature:
    """Signature of ``base`` extended with symbols in first-use order."""
    syms: list[Symbol] = list(base.symbols) if base else []
    seen = {s.name: s.arity for s in syms}
    for t in terms:
        for n in iter_nodes(t):
            if isinstance(n, App):
                a = seen.get(n.symbol)
                if a is None:
                    seen[n.symbol] = len(n.args)
                    syms.append(Symbol(n.symbol, len(n.args)))
                elif a != len(n.args):
                    raise ValueError(f"symbol {n.symbol} used with arities {a} and {len(n.args)}")
    return Signature(syms)


def rule_terms(rules: Iterable[Rule]) -> Iterator[Term]:
    for r in rules:
        yield r.lhs
        yield r.rhs


@dataclass(frozen=True)
class Trs:
    signature: Signature
    rules: tuple[Rule, ...]

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        for r in self.rules:
            self.signature.check(r.lhs)
            self.signature.check(r.rhs)

    @classmethod
    def from_rules(cls, rules: Sequence[Rule], signature: Signature | None = None) -> "Trs":
        return cls(infer_signature(rule_terms(rules), signature), tuple(rules))

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def with_signature(self, sig: Signature) -> "Trs":
        return Trs(sig, self.rules)


def check_permutative(rule: Rule) -> None:
    l, r = rule.lhs, rule.rhs
    if not (is_linear(l) and is_linear(r)):
        raise NotPermutative(rule, "not linear")
    if not (is_flat(l) and is_flat(r)):
        raise NotPermutative(rule, "not flat")
    if l.height != r.height:
        raise NotPermutative(rule, "height(l) != height(r)")
    if variables(l) != variables(r):
        raise NotPermutative(rule, "V(l) != V(r)")


@dataclass(frozen=True)
class EquationSet:
    """A symmetrically closed permutative theory. Build with :func:`validate_equations`."""

    signature: Signature
    rules: tuple[Rule, ...] = field(default=())

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __bool__(self):
        return bool(self.rules)

    def with_signature(self, sig: Signature) -> "EquationSet":
        return EquationSet(sig, self.rules)


def validate_equations(rules: Iterable[Rule], signature: Signature | None = None) -> EquationSet:
    rules = list(rules)
    closed: list[Rule] = []
    seen: set[Rule] = set()
    for rule in rules:
        check_permutative(rule)
        for r in (rule, rule.reversed()):
            if r not in seen:
                seen.add(r)
                closed.append(r)
    sig = infer_signature(rule_terms(closed), signature)
    return EquationSet(sig, tuple(closed))


def empty_theory(signature: Signature) -> EquationSet:
    return EquationSet(signature, ())


@dataclass(frozen=True)
class ClassReport:
    ground: bool
    flat: bool
    shallow: bool
    linear: bool
    left_flat: bool
    left_shallow: bool
    left_linear: bool
    right_flat: bool
    right_shallow: bool
    right_ground: bool
    right_linear: bool
    collapsing: bool

    def as_dict(self) -> dict[str, bool]:
        return dict(self.__dict__)


def classify(R: Trs | Sequence[Rule]) -> ClassReport:
    rules = list(R.rules if isinstance(R, Trs) else R)
    lf = all(is_flat(r.lhs) for r in rules)
    rf = all(is_flat(r.rhs) for r in rules)
    ls = all(is_shallow(r.lhs) for r in rules)
    rs = all(is_shallow(r.rhs) for r in rules)
    ll = all(is_linear(r.lhs) for r in rules)
    rl = all(is_linear(r.rhs) for r in rules)
    lg = all(is_ground(r.lhs) for r in rules)
    rg = all(is_ground(r.rhs) for r in rules)
    return ClassReport(
        ground=lg and rg,
        flat=lf and rf,
        shallow=ls and rs,
        linear=ll and rl,
        left_flat=lf,
        left_shallow=ls,
        left_linear=ll,
        right_flat=rf,
        right_shallow=rs,
        right_ground=rg,
        right_linear=rl,
        collapsing=any(isinstance(r.rhs, Var) for r in rules),
    )


PLAIN = "plain"
EQUATIONAL = "equational"


@dataclass(frozen=True)
class RewriteStep:
    rule_index: int
    position: Position
    substitution: Substitution
    source: Term
    target: Term
    kind: str = PLAIN

    def __hash__(self):
        return hash((self.rule_index, self.position, self.source, self.target, self.kind))


def rewrite_once(t: Term, rules: Sequence[Rule], kind: str = PLAIN) -> list[RewriteStep]:
    """All one-step rewrites of ``t``, ordered by (position, rule index)."""
    steps = []
    for p, sub in iter_positions(t):
        if not isinstance(sub, App):
            continue
        for i, rule in enumerate(rules):
            sigma = match(rule.lhs, sub)
            if sigma is None:
                continue
            target = replace_at(t, p, apply_subst(sigma, rule.rhs))
            steps.append(RewriteStep(i, p, sigma, t, target, kind))
    return steps


def redexes_at_root(t: Term, rules: Sequence[Rule]) -> Iterator[tuple[int, Substitution]]:
    for i, rule in enumerate(rules):
        sigma = match(rule.lhs, t)
        if sigma is not None:
            yield i, sigma


def is_reducible(t: Term, rules: Sequence[Rule]) -> bool:
    return any(
        match(rule.lhs, sub) is not None
        for _, sub in iter_positions(t)
        if isinstance(sub, App)
        for rule in rules
    )


def apply_step(t: Term, rule: Rule, position: Position, sigma: Substitution) -> Term | None:
    """Replay one step; None if the rule does not match at ``position`` with ``sigma``."""
    try:
        sub = subterm_at(t, position)
    except InvalidPosition:
        return None
    if variables(rule.lhs) != set(sigma):
        return None
    if apply_subst(sigma, rule.lhs) != sub:
        return None
    return replace_at(t, position, apply_subst(sigma, rule.rhs))


def check_step(step: RewriteStep, rules: Sequence[Rule]) -> bool:
    if not 0 <= step.rule_index < len(rules):
        return False
    return apply_step(step.source, rules[step.rule_index], step.position, step.substitution) == step.target
