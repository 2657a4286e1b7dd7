"""Compositional nontermination search for right-flat systems (plain rewriting, E empty).

Breadth-first search over whole terms blows up on systems whose reachable set
is a product of independent subderivations. This engine works per subterm:

* ``RR(t)`` is the set of terms reachable from ``t`` whose last step was at the
  root (plus ``t``). Every term reachable from ``t`` is obtained from some
  ``u`` in ``RR(t)`` by rewriting strictly below the root.
* Matching a left-hand side against ``Reach(u)`` only needs ``RR`` of the
  children, recursively. A variable binds the least-reduced subterm available;
  repeated variables bind a cover of common reducts (every common reduct is
  reachable from a member of the cover).
* ``t`` is nonterminating iff ``RR(t)`` is infinite (height overflow), has a
  cycle, or some child of a member of ``RR(t)`` is nonterminating.

Every recursive call carries a *focus*: how the current subterm sits inside a
term reachable from the start. Whenever nontermination is detected the focus
turns into a concrete derivation from the start term. Re-entering a
computation for a term that is still in progress means ``u ->+ C[u]`` with a
nonempty context, which is pumped until the height bound is exceeded.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from itertools import product

from .terms import App, Position, Term, Var, apply_subst, iter_positions, subterm_at, variables
from .trs import Trs, apply_step

Move = tuple  # (rule index, position, substitution)


class BudgetExceeded(RuntimeError):
    pass


class Found(Exception):
    def __init__(self, kind: str, prefix: list, loop: list):
        super().__init__(kind)
        self.kind = kind
        self.prefix = prefix
        self.loop = loop


def lift(moves, prefix: Position) -> list:
    if not prefix:
        return list(moves)
    return [(i, prefix + p, s) for i, p, s in moves]


@dataclass(frozen=True)
class _Node:
    parent: "_Node | None"
    moves: tuple
    pos: int


@dataclass(frozen=True)
class Focus:
    node: _Node | None = None
    pending: tuple = ()

    def then(self, moves) -> "Focus":
        return Focus(self.node, self.pending + tuple(moves)) if moves else self

    def child(self, moves, j: int) -> "Focus":
        return Focus(_Node(self.node, self.pending + tuple(moves), j), ())

    def resolve(self) -> tuple[list, Position]:
        chain = []
        n = self.node
        while n is not None:
            chain.append(n)
            n = n.parent
        out: list = []
        offset: Position = ()
        for n in reversed(chain):
            out += lift(n.moves, offset)
            offset += (n.pos,)
        out += lift(self.pending, offset)
        return out, offset


@dataclass
class _RR:
    elems: list = field(default_factory=list)
    parent: dict = field(default_factory=dict)
    edges: dict = field(default_factory=dict)
    _paths: dict = field(default_factory=dict)

    def moves_to(self, w: Term) -> list:
        hit = self._paths.get(w)
        if hit is not None:
            return hit
        seg = []
        cur = w
        while self.parent[cur] is not None:
            prev, mv = self.parent[cur]
            seg.append(mv)
            cur = prev
        out = [m for mv in reversed(seg) for m in mv]
        self._paths[w] = out
        return out


class Composer:
    def __init__(self, R: Trs, start: Term, bound: int, budget: int = 1_000_000):
        self.R = R
        self.start = start
        self.bound = bound
        self.budget = budget
        self.work = 0
        self.by_root: dict[tuple[str, int], list] = {}
        for i, r in enumerate(R.rules):
            self.by_root.setdefault((r.lhs.symbol, len(r.lhs.args)), []).append((i, r))
        self.rr: dict[Term, _RR] = {}
        self.rr_busy: dict[Term, Focus] = {}
        self.explored: set[Term] = set()
        self.explore_busy: dict[Term, Focus] = {}
        self.reach_memo: dict[tuple, list | None] = {}
        self.common_memo: dict[tuple, list] = {}
        self.join_memo: dict[tuple, tuple | None] = {}
        self.common_busy: dict[tuple, tuple] = {}

    # ---- bookkeeping ---------------------------------------------------

    def tick(self, n: int = 1):
        self.work += n
        if self.work > self.budget:
            raise BudgetExceeded(f"compositional search exceeded {self.budget} work units")

    def overflow(self, focus: Focus, moves: list):
        prefix, offset = focus.resolve()
        raise Found("overflow", prefix, lift(moves, offset))

    def pump(self, first: Focus, again: Focus, t: Term):
        g1, off1 = first.resolve()
        g2, off2 = again.resolve()
        assert g2[: len(g1)] == g1 and off2[: len(off1)] == off1
        rest = g2[len(g1):]
        if off2 == off1:
            assert rest, "re-entered a computation without progress"
            raise Found("cycle", g1, rest)
        d = off2[len(off1):]
        rel = [(i, p[len(off1):], s) for i, p, s in rest]
        assert all(p[: len(off1)] == off1 for _, p, _ in rest)
        # t ->+ C[t] at hole d; repeat inside the hole until the height bound is crossed
        cur = _replay(self.R, self.start, g1)
        loop = []
        hole = off1
        while cur.height <= self.bound:
            seg = lift(rel, hole)
            cur = _replay(self.R, cur, seg)
            loop += seg
            hole += d
        raise Found("overflow", g1, loop)

    # ---- root-reachable closure ---------------------------------------

    def RR(self, t: Term, focus: Focus) -> _RR:
        info = self.rr.get(t)
        if info is not None:
            return info
        if t in self.rr_busy:
            self.pump(self.rr_busy[t], focus, t)
        self.rr_busy[t] = focus
        info = _RR([t], {t: None}, {})
        k = 0
        while k < len(info.elems):
            u = info.elems[k]
            k += 1
            mu = info.moves_to(u)
            fu = focus.then(mu)
            succ = []
            for v, mv in self.root_steps(u, fu):
                self.tick()
                if v.height > self.bound:
                    self.overflow(focus, mu + mv)
                succ.append(v)
                if v == t:
                    raise Found("cycle", focus.resolve()[0], lift(mu + mv, focus.resolve()[1]))
                if v not in info.parent:
                    info.parent[v] = (u, mv)
                    info.elems.append(v)
            info.edges[u] = succ
        self._check_cycle(info, focus)
        del self.rr_busy[t]
        self.rr[t] = info
        return info

    def _check_cycle(self, info: _RR, focus: Focus):
        state = {}
        for root in info.elems:
            if root in state:
                continue
            stack = [(root, iter(info.edges[root]))]
            state[root] = 1
            path = [root]
            while stack:
                u, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[u] = 2
                    stack.pop()
                    path.pop()
                    continue
                if state.get(nxt) == 1:
                    cyc = path[path.index(nxt):] + [nxt]
                    loop = []
                    for a, b in zip(cyc, cyc[1:]):
                        loop += self._edge_moves(info, a, b, focus)
                    prefix, offset = focus.resolve()
                    raise Found("cycle", prefix + lift(info.moves_to(nxt), offset), lift(loop, offset))
                if nxt not in state:
                    state[nxt] = 1
                    stack.append((nxt, iter(info.edges[nxt])))
                    path.append(nxt)

    def _edge_moves(self, info: _RR, a: Term, b: Term, focus: Focus) -> list:
        fa = focus.then(info.moves_to(a))
        for v, mv in self.root_steps(a, fa):
            if v == b:
                return mv
        raise AssertionError("edge vanished")

    def root_steps(self, u: Term, focus: Focus):
        """Root steps available after rewriting ``u`` strictly below the root."""
        if isinstance(u, Var):
            return
        for i, rule in self.by_root.get((u.symbol, len(u.args)), ()):
            rvars = variables(rule.rhs)
            seen = set()
            for sigma, mv in self.match_root(rule.lhs, u, focus, rvars):
                v = apply_subst(sigma, rule.rhs)
                if v in seen:
                    continue
                seen.add(v)
                yield v, mv + [(i, (), sigma)]

    # ---- matching against Reach(u) ---------------------------------------

    def match_sub(self, p: Term, u: Term, focus: Focus) -> list:
        """Instances ``I`` of the shape of ``p`` with ``u ->* I``: list of (I, moves)."""
        if isinstance(p, Var):
            return [(u, [])]
        if not variables(p):
            mv = self.reaches(u, p, focus)
            return [] if mv is None else [(p, mv)]
        out = []
        seen = set()
        for w in self.RR(u, focus).elems:
            if not isinstance(w, App) or w.symbol != p.symbol or len(w.args) != len(p.args):
                continue
            mw = self.RR(u, focus).moves_to(w)
            subs = []
            for j, (pj, wj) in enumerate(zip(p.args, w.args), 1):
                subs.append(self.match_sub(pj, wj, focus.child(mw, j)))
                if not subs[-1]:
                    break
            else:
                for combo in product(*subs):
                    inst = App(w.symbol, [c[0] for c in combo])
                    if inst in seen:
                        continue
                    seen.add(inst)
                    mv = list(mw)
                    for j, (_, mj) in enumerate(combo, 1):
                        mv += lift(mj, (j,))
                    out.append((inst, mv))
        return out

    def match_root(self, l: App, u: App, focus: Focus, rvars: set[str]):
        subs = []
        for j, (pj, uj) in enumerate(zip(l.args, u.args), 1):
            subs.append(self.match_sub(pj, uj, focus.child((), j)))
            if not subs[-1]:
                return
        occ: dict[str, list[Position]] = {}
        for q, n in iter_positions(l):
            if isinstance(n, Var):
                occ.setdefault(n.name, []).append(q)
        for combo in product(*subs):
            inst = App(u.symbol, [c[0] for c in combo])
            base = []
            for j, (_, mj) in enumerate(combo, 1):
                base += lift(mj, (j,))
            fi = focus.then(base)
            choices = []
            for x, qs in occ.items():
                terms = tuple(subterm_at(inst, q) for q in qs)
                if len(qs) == 1:
                    choices.append([(x, terms[0], [])])
                    continue
                foci = tuple(_descend(fi, q) for q in qs)
                if x in rvars:
                    cover = self.common(terms, foci)
                else:
                    j = self.join(terms, foci)
                    cover = [] if j is None else [j]
                if not cover:
                    break
                choices.append([(x, m, [mv for q, mi in zip(qs, ms) for mv in lift(mi, q)]) for m, ms in cover])
            else:
                for pick in product(*choices):
                    sigma = {x: m for x, m, _ in pick}
                    mv = base + [m for _, _, ms in pick for m in ms]
                    yield sigma, mv

    # ---- reachability between terms ------------------------------------

    def reaches(self, a: Term, b: Term, focus: Focus) -> list | None:
        """Moves ``a ->* b``, or None."""
        if a == b:
            return []
        key = (a, b)
        if key in self.reach_memo:
            return self.reach_memo[key]
        res = None
        if isinstance(a, App) and isinstance(b, App):
            info = self.RR(a, focus)
            for w in info.elems:
                mw = info.moves_to(w)
                if w == b:
                    res = mw
                    break
                if w.symbol == b.symbol and len(w.args) == len(b.args) and w.args:
                    mv = list(mw)
                    for j, (wj, bj) in enumerate(zip(w.args, b.args), 1):
                        mj = self.reaches(wj, bj, focus.child(mw, j))
                        if mj is None:
                            break
                        mv += lift(mj, (j,))
                    else:
                        res = mv
                        break
        self.reach_memo[key] = res
        return res

    def _groups(self, terms, foci):
        infos = [self.RR(t, f) for t, f in zip(terms, foci)]
        heads = []
        for w in infos[0].elems:
            h = (w.symbol, len(w.args))
            if h not in heads:
                heads.append(h)
        for h in heads:
            lists = [[w for w in info.elems if (w.symbol, len(w.args)) == h] for info in infos]
            if all(lists):
                yield h, infos, lists

    def _enter(self, key, foci):
        old = self.common_busy.get(key)
        if old is not None:
            # the re-entry happened inside the computation for some component i,
            # so that component's focus extends its earlier one
            for i, (f1, f2) in enumerate(zip(old, foci)):
                g1, o1 = f1.resolve()
                g2, o2 = f2.resolve()
                if g2[: len(g1)] == g1 and o2[: len(o1)] == o1:
                    self.pump(f1, f2, key[i])
            raise AssertionError("re-entry without a common ancestor")
        self.common_busy[key] = foci

    def join(self, terms: tuple, foci: tuple):
        """One common reduct ``(m, [moves_i])``, or None."""
        if all(t == terms[0] for t in terms):
            return terms[0], [[] for _ in terms]
        if any(isinstance(t, Var) for t in terms):
            return None
        key = ("join",) + terms
        if key in self.join_memo:
            return self.join_memo[key]
        self._enter(terms, foci)
        res = None
        try:
            for (sym, k), infos, lists in self._groups(terms, foci):
                for combo in product(*lists):
                    self.tick()
                    mws = [info.moves_to(w) for info, w in zip(infos, combo)]
                    if k == 0:
                        res = (combo[0], mws)
                        break
                    kids = []
                    for j in range(1, k + 1):
                        sub = self.join(
                            tuple(w.args[j - 1] for w in combo),
                            tuple(f.child(mw, j) for f, mw in zip(foci, mws)),
                        )
                        if sub is None:
                            break
                        kids.append(sub)
                    else:
                        m = App(sym, [s[0] for s in kids])
                        moves = [mw + [x for j, s in enumerate(kids, 1) for x in lift(s[1][i], (j,))] for i, mw in enumerate(mws)]
                        res = (m, moves)
                        break
                if res is not None:
                    break
        finally:
            del self.common_busy[terms]
        self.join_memo[key] = res
        return res

    def common(self, terms: tuple, foci: tuple) -> list:
        """A cover of the common reducts: list of ``(m, [moves_i])``."""
        if all(t == terms[0] for t in terms):
            return [(terms[0], [[] for _ in terms])]
        if any(isinstance(t, Var) for t in terms):
            return []
        if terms in self.common_memo:
            return self.common_memo[terms]
        self._enter(terms, foci)
        found: dict[Term, list] = {}
        try:
            for (sym, k), infos, lists in self._groups(terms, foci):
                for combo in product(*lists):
                    self.tick()
                    mws = [info.moves_to(w) for info, w in zip(infos, combo)]
                    if k == 0:
                        found.setdefault(combo[0], mws)
                        continue
                    kid_covers = []
                    for j in range(1, k + 1):
                        sub = self.common(
                            tuple(w.args[j - 1] for w in combo),
                            tuple(f.child(mw, j) for f, mw in zip(foci, mws)),
                        )
                        if not sub:
                            break
                        kid_covers.append(sub)
                    else:
                        for pick in product(*kid_covers):
                            m = App(sym, [s[0] for s in pick])
                            if m in found:
                                continue
                            self.tick()
                            found[m] = [
                                mw + [x for j, s in enumerate(pick, 1) for x in lift(s[1][i], (j,))]
                                for i, mw in enumerate(mws)
                            ]
        finally:
            del self.common_busy[terms]
        cover = self._prune(found, foci[0])
        self.common_memo[terms] = cover
        return cover

    def _prune(self, found: dict, focus: Focus) -> list:
        items = list(found.items())
        keep = []
        for m, ms in items:
            dominated = False
            for m2, ms2 in items:
                if m2 is m or m2 == m:
                    continue
                if self.reaches(m2, m, focus.then(ms2[0])) is not None:
                    # keep the first of two mutually reachable terms
                    if self.reaches(m, m2, focus.then(ms[0])) is None or _before(items, m2, m):
                        dominated = True
                        break
            if not dominated:
                keep.append((m, ms))
        return keep

    # ---- whole search --------------------------------------------------

    def explore(self, t: Term, focus: Focus):
        if t in self.explored or isinstance(t, Var):
            return
        if t in self.explore_busy:
            self.pump(self.explore_busy[t], focus, t)
        self.explore_busy[t] = focus
        info = self.RR(t, focus)
        for u in info.elems:
            mu = info.moves_to(u)
            for j, a in enumerate(u.args, 1):
                self.explore(a, focus.child(mu, j))
        del self.explore_busy[t]
        self.explored.add(t)

    def run(self, start: Term | None = None) -> Found | None:
        """None if the start term terminates; otherwise the Found witness.

        Memo tables only record facts about terms, so one Composer can serve
        several start terms as long as its bound is at least theirs.
        """
        if start is not None:
            self.start = start
        self.work = 0
        self.rr_busy.clear()
        self.explore_busy.clear()
        self.common_busy.clear()
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 20_000))
        try:
            self.explore(self.start, Focus())
        except Found as f:
            return f
        finally:
            sys.setrecursionlimit(old)
        return None


def _descend(f: Focus, q: Position) -> Focus:
    for j in q:
        f = f.child((), j)
    return f


def _before(items, a, b) -> bool:
    for m, _ in items:
        if m == a:
            return True
        if m == b:
            return False
    return False


def _replay(R: Trs, t: Term, moves) -> Term:
    for i, p, s in moves:
        nxt = apply_step(t, R.rules[i], p, s)
        if nxt is None:
            raise AssertionError(f"move {i} at {p} does not apply to {t}")
        t = nxt
    return t


def replay_moves(R: Trs, t: Term, moves) -> Term:
    return _replay(R, t, moves)
