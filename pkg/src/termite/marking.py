"""Markings along right-flat derivations and pumping certificates."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .terms import App, Position, Term, Var, is_constant, iter_positions, subterm_at
from .trs import EQUATIONAL, PLAIN, EquationSet, RewriteStep, Trs, check_step, rewrite_once

LEFTMOST = "leftmost"
RIGHTMOST = "rightmost"

PASS = "pass"
UNCONFIRMED = "unconfirmed"
FAIL = "fail"

DEFAULT_REACH_BUDGET = 2_000


class NotRightFlat(ValueError):
    pass


class InvalidDerivation(ValueError):
    pass


class NotFound(Exception):
    pass


def _rules_for(step: RewriteStep, R: Trs, E: EquationSet | None):
    if step.kind == EQUATIONAL:
        if E is None:
            raise InvalidDerivation("equational step without a theory")
        return E.rules
    return R.rules


@dataclass
class Marking:
    start: Term
    terms: list[Term]
    maps: list[dict[Position, Term]]

    def __len__(self):
        return len(self.maps)

    def __getitem__(self, i: int) -> dict[Position, Term]:
        return self.maps[i]

    @property
    def last(self) -> dict[Position, Term]:
        return self.maps[-1]


def _var_positions(l: Term, name: str) -> list[Position]:
    return [p for p, n in iter_positions(l) if isinstance(n, Var) and n.name == name]


def build_marking(
    derivation: Sequence[RewriteStep],
    R: Trs,
    E: EquationSet | None = None,
    tie: str = LEFTMOST,
    start: Term | None = None,
) -> Marking:
    """Mark every position of every term of a right-flat derivation.

    ``maps[i]`` marks the i-th term (0-based). For a collapsing rule ``l -> x``
    the variable case applies with an empty ``p0``, so positions strictly below
    the redex take the mark of the matching position under ``x`` in ``l``.
    """
    if tie not in (LEFTMOST, RIGHTMOST):
        raise ValueError(f"unknown tie-break {tie}")
    if start is None:
        if not derivation:
            raise InvalidDerivation("empty derivation needs a start term")
        start = derivation[0].source
    cur = start
    M = {p: sub for p, sub in iter_positions(start)}
    terms, maps = [start], [M]
    for k, st in enumerate(derivation):
        rules = _rules_for(st, R, E)
        if st.source != cur or not check_step(st, rules):
            raise InvalidDerivation(f"step {k} does not replay")
        rule = rules[st.rule_index]
        if rule.rhs.height > 1:
            raise NotRightFlat(f"rule {rule} is not right-flat")
        pbar, l, r = st.position, rule.lhs, rule.rhs
        n = len(pbar)
        new: dict[Position, Term] = {}
        for p, _ in iter_positions(st.target):
            if len(p) <= n or p[:n] != pbar:
                new[p] = M[p]
                continue
            rest = p[n:]
            if isinstance(r, Var):
                q0s, p1 = _var_positions(l, r.name), rest
            else:
                ri = r.args[rest[0] - 1]
                if is_constant(ri):
                    assert len(rest) == 1
                    new[p] = ri
                    continue
                q0s, p1 = _var_positions(l, ri.name), rest[1:]
            q0 = q0s[0] if tie == LEFTMOST else q0s[-1]
            new[p] = M[pbar + q0 + p1]
        for v in new.values():
            assert is_constant(v) or v in _subterm_set(start), "mark outside subterms(s) and constants"
        M, cur = new, st.target
        terms.append(cur)
        maps.append(M)
    return Marking(start, terms, maps)


_SUBTERMS: dict[Term, frozenset] = {}


def _subterm_set(t: Term) -> frozenset:
    s = _SUBTERMS.get(t)
    if s is None:
        if len(_SUBTERMS) > 256:
            _SUBTERMS.clear()
        s = _SUBTERMS[t] = frozenset(sub for _, sub in iter_positions(t))
    return s


# ---- bounded reachability ---------------------------------------------------


class _Reach:
    """Breadth-first reachability from one term under R plus E as ordinary rules.

    Expansion is lazy: queries run the search only until they are answered.
    """

    def __init__(self, u: Term, rules, budget: int):
        self.rules, self.budget = rules, budget
        self.terms = {u}
        self.inner: set[Term] = set()  # proper subterms of reachable terms
        self.complete = True
        self.queue = deque([u])
        self._add_inner(u)

    def _add_inner(self, t: Term):
        stack = list(t.args) if isinstance(t, App) else []
        while stack:
            sub = stack.pop()
            if sub in self.inner:
                continue
            self.inner.add(sub)
            if isinstance(sub, App):
                stack.extend(sub.args)

    def _expand(self) -> bool:
        """Expand one queued term; False once nothing is left to do."""
        if not self.queue:
            return False
        t = self.queue.popleft()
        for st in rewrite_once(t, self.rules):
            if st.target not in self.terms:
                if len(self.terms) >= self.budget:
                    self.complete = False
                    self.queue.clear()
                    return False
                self.terms.add(st.target)
                self._add_inner(st.target)
                self.queue.append(st.target)
        return True

    def reaches(self, t: Term) -> bool:
        while t not in self.terms:
            if not self._expand():
                return False
        return True

    def reaches_inside(self, t: Term, or_root: bool) -> bool:
        while t not in self.inner and not (or_root and t in self.terms):
            if not self._expand():
                return False
        return True

    def status(self, found: bool) -> str:
        if found:
            return PASS
        return FAIL if self.complete else UNCONFIRMED


@dataclass
class LemmaReport:
    reach0: str = PASS
    creach2: str = PASS
    reach1: str = PASS
    creach1: str = PASS
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return FAIL not in (self.reach0, self.creach2, self.reach1, self.creach1)


_RANK = {PASS: 0, UNCONFIRMED: 1, FAIL: 2}


def _worse(a: str, b: str) -> str:
    return a if _RANK[a] >= _RANK[b] else b


def check_marking_lemmas(
    M: Marking, R: Trs, E: EquationSet | None = None, reach_budget: int = DEFAULT_REACH_BUDGET
) -> LemmaReport:
    rep = LemmaReport()
    s, tn, last = M.start, M.terms[-1], M.last
    if last[()] != s:
        rep.reach0 = FAIL
        rep.failures.append(("reach0", ()))
    if not is_constant(s):
        for p, v in last.items():
            if p and v == s:
                rep.reach0 = FAIL
                rep.failures.append(("reach0", p))
    for p, v in last.items():
        if len(p) > s.height and not is_constant(v):
            rep.creach2 = FAIL
            rep.failures.append(("creach2", p))
    rules = list(R.rules) + (list(E.rules) if E is not None else [])
    cache: dict[Term, _Reach] = {}

    def reach(u):
        if u not in cache:
            cache[u] = _Reach(u, rules, reach_budget)
        return cache[u]

    for p, v in last.items():
        rv = reach(v)
        st = rv.status(rv.reaches(subterm_at(tn, p)))
        if st == FAIL:
            rep.failures.append(("reach1", p))
        rep.reach1 = _worse(rep.reach1, st)
    for p, v in last.items():
        for k in range(len(p)):
            u = last[p[:k]]
            ru = reach(u)
            st = ru.status(ru.reaches_inside(v, not (is_constant(u) and is_constant(v))))
            if st == FAIL:
                rep.failures.append(("creach1", p[:k], p))
            rep.creach1 = _worse(rep.creach1, st)
    return rep


# ---- pumping certificates -------------------------------------------------


@dataclass
class PumpingCertificate:
    """``start ->* C1[c]`` followed by a loop ``c ->+ C2[c]`` with ``C2`` nonempty."""

    constant: str
    start: Term
    reach: tuple[RewriteStep, ...]
    reach_position: Position
    loop: tuple[RewriteStep, ...]
    loop_position: Position
    marks: tuple[Position, Position] = ((), ())  # the nested positions that share the mark


def _search(start: Term, rules_R, rules_E, goal, budget: int, need_plain: bool):
    """Shortest derivation from ``start`` to a term satisfying ``goal``; None if budget runs out."""
    init = (start, not need_plain)
    parent = {init: None}
    queue = deque([init])
    while queue:
        node = queue.popleft()
        t, ok = node
        if ok:
            pos = goal(t)
            if pos is not None:
                path = []
                while parent[node] is not None:
                    node, st = parent[node]
                    path.append(st)
                return path[::-1], pos
        for rules, kind in ((rules_R, PLAIN), (rules_E, EQUATIONAL)):
            for st in rewrite_once(t, rules, kind):
                nxt = (st.target, ok or kind == PLAIN)
                if nxt not in parent:
                    if len(parent) >= budget:
                        return None
                    parent[nxt] = (node, st)
                    queue.append(nxt)
    return None


def _occurrence(c: str, nonroot: bool):
    def goal(t):
        for p, sub in iter_positions(t):
            if (p or not nonroot) and isinstance(sub, App) and sub.symbol == c and not sub.args:
                return p
        return None

    return goal


def extract_pumping(
    witness, R: Trs, E: EquationSet, budget: int = 20_000, tie: str = LEFTMOST
) -> PumpingCertificate:
    """Certificate for a height-overflow witness; raises NotFound if the searches run out."""
    steps = witness.steps()
    M = build_marking(steps, R, E, tie, start=witness.start)
    last = M.last
    s = witness.start
    deep = max(last, key=len)
    if len(deep) <= witness.bound:
        raise ValueError("witness does not exceed its height bound")
    seen: dict[Term, Position] = {}
    pair = None
    for k in range(s.height + 1, len(deep) + 1):
        v = last[deep[:k]]
        assert is_constant(v)
        if v in seen:
            pair = (seen[v], deep[:k])
            break
        seen[v] = deep[:k]
    assert pair is not None, "pigeonhole: a deep branch must repeat a constant mark"
    c = last[pair[0]].symbol
    Er = E.rules if E is not None else ()
    first = _search(s, R.rules, Er, _occurrence(c, False), budget, False)
    if first is None:
        raise NotFound(f"no derivation from {s} to a context of {c} within budget")
    loop = _search(App(c, ()), R.rules, Er, _occurrence(c, True), budget, True)
    if loop is None:
        raise NotFound(f"no pumping loop for {c} within budget")
    cert = PumpingCertificate(c, s, tuple(first[0]), first[1], tuple(loop[0]), loop[1], pair)
    assert verify_certificate(cert, R, E)
    return cert


def certificate_error(cert: PumpingCertificate, R: Trs, E: EquationSet | None) -> Optional[str]:
    """None if the certificate replays, else the first failing check."""
    c = App(cert.constant, ())
    for name, start, steps, pos in (
        ("reach", cert.start, cert.reach, cert.reach_position),
        ("loop", c, cert.loop, cert.loop_position),
    ):
        cur = start
        for k, st in enumerate(steps):
            try:
                rules = _rules_for(st, R, E)
            except InvalidDerivation:
                return f"{name} step {k}: equational step without a theory"
            if st.source != cur or not check_step(st, rules):
                return f"{name} step {k} does not replay"
            cur = st.target
        try:
            if subterm_at(cur, pos) != c:
                return f"{name} does not end with {cert.constant} at the stated position"
        except Exception:
            return f"{name} position is not a position of the final term"
    if not cert.loop_position:
        return "loop context is empty"
    if not any(st.kind == PLAIN for st in cert.loop):
        return "loop has no plain step"
    return None


def verify_certificate(cert: PumpingCertificate, R: Trs, E: EquationSet | None) -> bool:
    return certificate_error(cert, R, E) is None
