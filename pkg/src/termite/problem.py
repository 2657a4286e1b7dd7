"""Reading and writing problem files.

The format is a small s-expression language::

    ; Toyama's example
    (VAR x)
    (SIG (f 3) (0 0) (1 0) (c 0))      ; optional, inferred from first use
    (RULES f(0,1,x) -> f(x,x,x)  c -> 0  c -> 1)
    (EQUATIONS f(x,y) == f(y,x))       ; optional, must be permutative
    (START f(0,1,c))                   ; optional

Names starting with ``#`` are reserved for constants introduced by flattening.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .terms import App, Signature, Symbol, Term, Var, iter_nodes
from .trs import EquationSet, InvalidRule, Rule, Trs, validate_equations


class ParseError(ValueError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        msg = f"{line}:{col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)
        self.line = line
        self.col = col
        self.expected = expected


class ReservedName(ParseError):
    pass


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>;[^\n]*)
  | (?P<arrow>->)
  | (?P<eq>==)
  | (?P<punct>[(),])
  | (?P<name>\#?[A-Za-z0-9_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(line, pos - line_start + 1, "token", text[pos])
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


@dataclass(frozen=True)
class ProblemFile:
    trs: Trs
    equations: EquationSet
    variables: tuple[str, ...] = ()
    start: Term | None = None
    declared_signature: bool = field(default=False, compare=False)

    @property
    def signature(self) -> Signature:
        return self.trs.signature


class _Parser:
    def __init__(self, text: str, allow_reserved: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.allow_reserved = allow_reserved
        self.vars: set[str] = set()
        self.arity: dict[str, int] = {}
        self.order: list[str] = []
        self.declared = False

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: str):
        t = self.tok
        raise ParseError(t.line, t.col, expected, t.text or "end of input")

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            self.fail(repr(text) if text else kind)
        self.i += 1
        return t

    def name(self) -> _Tok:
        t = self.expect("name")
        if t.text.startswith("#") and not self.allow_reserved:
            raise ReservedName(t.line, t.col, "non-reserved name", t.text)
        return t

    def use_symbol(self, t: _Tok, arity: int):
        if t.text in self.vars:
            if arity:
                raise ParseError(t.line, t.col, "function symbol", f"variable {t.text}")
            return
        known = self.arity.get(t.text)
        if known is None:
            if self.declared:
                raise ParseError(t.line, t.col, "symbol declared in SIG", t.text)
            self.arity[t.text] = arity
            self.order.append(t.text)
        elif known != arity:
            raise ParseError(t.line, t.col, f"{known} arguments for {t.text}", str(arity))

    def term(self) -> Term:
        t = self.name()
        if self.tok.kind == "punct" and self.tok.text == "(":
            self.i += 1
            args = [self.term()]
            while self.tok.text == ",":
                self.i += 1
                args.append(self.term())
            self.expect("punct", ")")
            self.use_symbol(t, len(args))
            return App(t.text, args)
        if t.text in self.vars:
            return Var(t.text)
        self.use_symbol(t, 0)
        return App(t.text, ())

    def at_close(self) -> bool:
        return self.tok.kind == "punct" and self.tok.text == ")"

    def pairs(self, sep_kind: str) -> list[tuple[Term, Term, _Tok]]:
        out = []
        while not self.at_close():
            start = self.tok
            lhs = self.term()
            self.expect(sep_kind)
            rhs = self.term()
            out.append((lhs, rhs, start))
        return out

    def parse(self) -> ProblemFile:
        rules_raw, eqs_raw, start = [], [], None
        seen = set()
        blocks = []
        while self.tok.kind != "eof":
            self.expect("punct", "(")
            kw = self.expect("name")
            if kw.text in seen:
                raise ParseError(kw.line, kw.col, "each block at most once", kw.text)
            seen.add(kw.text)
            if kw.text == "VAR":
                while not self.at_close():
                    self.vars.add(self.name().text)
            elif kw.text == "SIG":
                if blocks:
                    raise ParseError(kw.line, kw.col, "SIG before RULES, EQUATIONS and START")
                while not self.at_close():
                    self.expect("punct", "(")
                    n = self.name()
                    a = self.expect("name")
                    if not a.text.isdigit():
                        raise ParseError(a.line, a.col, "arity", a.text)
                    if n.text in self.arity:
                        raise ParseError(n.line, n.col, "unique symbol", n.text)
                    self.arity[n.text] = int(a.text)
                    self.order.append(n.text)
                    self.expect("punct", ")")
                self.declared = True
            elif kw.text == "RULES":
                blocks.append(kw.text)
                rules_raw = self.pairs("arrow")
            elif kw.text == "EQUATIONS":
                blocks.append(kw.text)
                eqs_raw = self.pairs("eq")
            elif kw.text == "START":
                blocks.append(kw.text)
                start = self.term()
            else:
                raise ParseError(kw.line, kw.col, "VAR, SIG, RULES, EQUATIONS or START", kw.text)
            self.expect("punct", ")")

        def mk(l, r, tok):
            try:
                return Rule(l, r)
            except InvalidRule as exc:
                raise ParseError(tok.line, tok.col, "valid rule", str(exc)) from exc

        sig = Signature(Symbol(n, self.arity[n]) for n in self.order)
        rules = [mk(l, r, tok) for l, r, tok in rules_raw]
        E = validate_equations([mk(l, r, tok) for l, r, tok in eqs_raw], sig)
        if start is not None and any(isinstance(n, Var) for n in iter_nodes(start)):
            raise ParseError(0, 0, "ground start term", str(start))
        return ProblemFile(
            Trs(sig, rules),
            E,
            tuple(sorted(self.vars)),
            start,
            declared_signature=self.declared,
        )


def parse_problem(text: str, allow_reserved: bool = False) -> ProblemFile:
    return _Parser(text, allow_reserved).parse()


def parse_term(text: str, variables=(), allow_reserved: bool = False) -> Term:
    """Parse a single term; names in ``variables`` are variables."""
    p = _Parser(text, allow_reserved)
    p.vars = set(variables)
    t = p.term()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return t


def parse_rule(text: str, variables=("x", "y", "z")) -> Rule:
    lhs, rhs = text.split("->")
    return Rule(parse_term(lhs.strip(), variables), parse_term(rhs.strip(), variables))


def parse_rules(text: str, variables=("x", "y", "z")) -> list[Rule]:
    return [parse_rule(part, variables) for part in text.split(";") if part.strip()]


def format_problem(pf: ProblemFile) -> str:
    lines = []
    if pf.variables:
        lines.append(f"(VAR {' '.join(pf.variables)})")
    lines.append("(SIG " + " ".join(f"({s.name} {s.arity})" for s in pf.signature) + ")")
    lines.append("(RULES")
    lines.extend(f"  {r.lhs} -> {r.rhs}" for r in pf.trs.rules)
    lines.append(")")
    if pf.equations.rules:
        lines.append("(EQUATIONS")
        lines.extend(f"  {r.lhs} == {r.rhs}" for r in pf.equations.rules)
        lines.append(")")
    if pf.start is not None:
        lines.append(f"(START {pf.start})")
    return "\n".join(lines) + "\n"


def make_problem(trs: Trs, equations: EquationSet | None = None, start: Term | None = None) -> ProblemFile:
    from .terms import variables as term_vars

    names: set[str] = set()
    for r in trs.rules + (equations.rules if equations else ()):
        names |= term_vars(r.lhs) | term_vars(r.rhs)
    sig = trs.signature
    if equations is not None:
        sig = sig.extended(equations.signature.symbols)
    E = EquationSet(sig, equations.rules) if equations is not None else EquationSet(sig, ())
    return ProblemFile(Trs(sig, trs.rules), E, tuple(sorted(names)), start, declared_signature=True)
