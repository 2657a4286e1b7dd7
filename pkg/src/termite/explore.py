"""Deciding (innermost) termination of a right-flat system from a fixed start term."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .compose import BudgetExceeded, Composer
from .modulo import ModStep, canonical, canonical_path, check_modstep, materialize, mod_successors
from .terms import Signature, Symbol, Term, iter_nodes, App
from .trs import EQUATIONAL, PLAIN, EquationSet, RewriteStep, Trs, check_step

TERMINATING = "terminating"
NONTERMINATING = "nonterminating"
UNKNOWN = "unknown"

CYCLE = "cycle"
OVERFLOW = "height-overflow"

DEFAULT_BUDGET = 1_000_000
BFS_LIMIT = 20_000


class NotRightFlat(ValueError):
    pass


@dataclass
class Witness:
    kind: str
    start: Term
    bound: int
    entry: tuple[RewriteStep, ...]
    prefix: tuple[ModStep, ...]
    loop: tuple[ModStep, ...]
    pumping: Optional[object] = None

    @property
    def loop_start(self) -> Term:
        if self.prefix:
            return self.prefix[-1].target
        return self.entry[-1].target if self.entry else self.start

    @property
    def final(self) -> Term:
        return self.loop[-1].target if self.loop else self.loop_start

    def steps(self) -> list[RewriteStep]:
        out = list(self.entry)
        for ms in self.prefix + self.loop:
            out += ms.steps()
        return out


@dataclass
class Verdict:
    result: str
    witness: Optional[Witness] = None
    stats: dict = field(default_factory=dict)
    reason: str = ""
    trace: Optional[object] = None
    system: Optional[tuple] = None  # (R, E) the witness replays against, when transformed

    @property
    def terminating(self) -> bool:
        return self.result == TERMINATING

    @property
    def nonterminating(self) -> bool:
        return self.result == NONTERMINATING

    @property
    def unknown(self) -> bool:
        return self.result == UNKNOWN


def full_signature(R: Trs, E: EquationSet, s: Term | None = None) -> Signature:
    sig = R.signature.extended(E.signature.symbols)
    if s is not None:
        sig = sig.extended(
            Symbol(n.symbol, len(n.args)) for n in iter_nodes(s) if isinstance(n, App) and n.symbol not in sig
        )
    return sig


def height_bound(s: Term, sig: Signature) -> int:
    return s.height + len(sig.constants)


def check_right_flat(R: Trs):
    for r in R.rules:
        if r.rhs.height > 1:
            raise NotRightFlat(f"rule {r} has a right-hand side of height {r.rhs.height}")


# ---- breadth-first quotient exploration ---------------------------------


def _bfs(R, E, s, innermost, bound, limit, known=frozenset()):
    """Breadth-first quotient search that stops at the first loop or overflow.

    Edges are checked in exploration order; the witness is the first edge
    closing a loop among the edges before it. Only edges into an already
    expanded class can close one, since unexpanded classes have no out-edges.
    Classes in ``known`` are already proven terminating and stay unexpanded.
    """
    start = canonical(s, E).canonical
    index = {start: 0}
    terms = [start]
    parent: list = [None]
    G = nx.DiGraph()
    G.add_node(0)
    edges = 0
    k = 0
    while k < len(terms):
        u = terms[k]
        if u in known:
            k += 1
            continue
        for key, ms in mod_successors(u, R, E, innermost):
            assert ms.core.target.height <= ms.core.source.height + 1, "right-flat step grew by more than one"
            v = key.canonical
            if v.height > bound:
                return terms, parent, edges, None, (k, ms)
            j = index.get(v)
            if j is None:
                j = index[v] = len(terms)
                terms.append(v)
                parent.append((k, ms))
                if len(terms) > limit:
                    raise BudgetExceeded(f"more than {limit} classes")
            edges += 1
            if j == k:
                return terms, parent, edges, ([ms], j), None
            if j < k and nx.has_path(G, j, k):
                path = nx.shortest_path(G, j, k)
                loop = [G.edges[a, b]["ms"] for a, b in zip(path, path[1:])]
                return terms, parent, edges, (loop + [ms], j), None
            if not G.has_edge(k, j):
                G.add_edge(k, j, ms=ms)
        k += 1
    return terms, parent, edges, None, None


def _tree_path(parent, i) -> list[ModStep]:
    out = []
    while parent[i] is not None:
        j, ms = parent[i]
        out.append(ms)
        i = j
    return out[::-1]


def _explore_bfs(R, E, s, innermost, bound, limit, stats, known=None):
    terms, parent, edges, found, overflow = _bfs(R, E, s, innermost, bound, limit, known or frozenset())
    stats.update(nodes=len(terms), edges=edges, engine="bfs")
    entry = tuple(canonical_path(s, E))
    if found is not None:
        loop, v = found
        return Witness(CYCLE, s, bound, entry, tuple(_tree_path(parent, v)), tuple(loop))
    if overflow is not None:
        k, ms = overflow
        return Witness(OVERFLOW, s, bound, entry, tuple(_tree_path(parent, k)), (ms,))
    for t in terms:
        assert t.height <= bound
    stats["max_height"] = max(t.height for t in terms)
    if known is not None:
        known.update(terms)
    return None


def _explore_compose(R, s, bound, budget, stats, comp=None):
    if comp is None:
        comp = Composer(R, s, bound, budget)
    found = comp.run(s)
    stats.update(engine="compose", work=comp.work, subterms=len(comp.rr))
    if found is None:
        return None
    prefix = materialize(s, found.prefix, R.rules, PLAIN)
    t = prefix[-1].target if prefix else s
    loop = materialize(t, found.loop, R.rules, PLAIN)
    kind = CYCLE if found.kind == "cycle" else OVERFLOW
    wrap = lambda st: ModStep((), st, ())
    return Witness(kind, s, bound, (), tuple(map(wrap, prefix)), tuple(map(wrap, loop)))


def decide_from_term(
    R: Trs,
    E: EquationSet,
    s: Term,
    mode: str = "plain",
    budget: int = DEFAULT_BUDGET,
    engine: str = "auto",
    bfs_limit: int = BFS_LIMIT,
    composer: Composer | None = None,
    known: set | None = None,
) -> Verdict:
    """Exact verdict for right-flat ``R`` modulo permutative ``E`` from ``s``.

    ``engine`` is ``"bfs"``, ``"compose"`` or ``"auto"``. In auto mode the
    breadth-first quotient search runs first; plain problems with empty E that
    outgrow ``bfs_limit`` classes switch to the compositional search.
    ``known`` collects canonical classes proven terminating; passing the same
    set to later calls lets them stop at those classes.
    """
    check_right_flat(R)
    innermost = mode == "innermost"
    sig = full_signature(R, E, s)
    E = E.with_signature(sig) if E.signature != sig else E
    R = R.with_signature(sig) if R.signature != sig else R
    bound = height_bound(s, sig)
    stats: dict = {"bound": bound}
    t0 = time.perf_counter()
    can_compose = not innermost and not E.rules
    witness = None
    try:
        if engine == "compose":
            if not can_compose:
                raise ValueError("compositional search needs plain mode and an empty theory")
            witness = _explore_compose(R, s, bound, budget, stats, composer)
        else:
            limit = budget if engine == "bfs" or not can_compose else min(budget, bfs_limit)
            try:
                witness = _explore_bfs(R, E, s, innermost, bound, limit, stats, known)
            except BudgetExceeded:
                if engine == "bfs" or not can_compose or limit >= budget:
                    raise
                stats["bfs_nodes"] = limit
                witness = _explore_compose(R, s, bound, budget, stats, composer)
    except BudgetExceeded as exc:
        stats["seconds"] = time.perf_counter() - t0
        return Verdict(UNKNOWN, None, stats, reason=f"budget: {exc}")
    stats["seconds"] = time.perf_counter() - t0
    if witness is None:
        return Verdict(TERMINATING, None, stats)
    witness.bound = bound
    return Verdict(NONTERMINATING, witness, stats)


# ---- witness replay ------------------------------------------------------


def replay_witness(w: Witness, R: Trs, E: EquationSet) -> Optional[str]:
    """None if the witness replays; otherwise a description of the first failure."""
    cur = w.start
    for k, st in enumerate(w.entry):
        if st.kind != EQUATIONAL or st.source != cur or not check_step(st, E.rules):
            return f"entry step {k} does not replay"
        cur = st.target
    for part, seq in (("prefix", w.prefix), ("loop", w.loop)):
        for k, ms in enumerate(seq):
            if ms.source != cur or not check_modstep(ms, R, E):
                return f"{part} step {k} does not replay"
            cur = ms.target
    if not w.loop:
        return "empty loop"
    if w.kind == CYCLE:
        if canonical(cur, E) != canonical(w.loop_start, E):
            return "loop does not return to its first class"
    elif w.kind == OVERFLOW:
        if w.bound != height_bound(w.start, full_signature(R, E, w.start)):
            return "wrong height bound"
        if cur.height <= w.bound:
            return "final term does not exceed the height bound"
    else:
        return f"unknown witness kind {w.kind}"
    return None


def check_witness(w: Witness, R: Trs, E: EquationSet) -> bool:
    return replay_witness(w, R, E) is None
