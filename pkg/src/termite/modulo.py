"""Equivalence classes modulo a permutative theory, and rewriting modulo E.

Permutative rules are flat and linear with equal heights, so an E-step at the
root of ``g(t1,...,tn)`` only shuffles whole children (and rewrites constant
arguments). The class of a term is therefore determined by its root symbol and
the classes of its children, which lets :func:`canonical` work bottom-up
without materializing the class. :func:`e_class` still materializes it when
membership or enumeration is needed.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .terms import App, Position, Term, apply_subst, is_constant, iter_positions, match, replace_at, term_key, Var
from .trs import EQUATIONAL, PLAIN, EquationSet, RewriteStep, Rule, Trs

DEFAULT_CLASS_CAP = 100_000

Move = tuple  # (rule index, position, substitution)


class ClassBudgetExceeded(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"equivalence class exceeds {cap} members")
        self.cap = cap


@dataclass(frozen=True)
class EClassKey:
    canonical: Term
    size: int

    def __str__(self):
        return str(self.canonical)


def materialize(start: Term, moves: Sequence[Move], rules: Sequence[Rule], kind: str) -> list[RewriteStep]:
    """Turn (rule, position, substitution) moves into concrete steps from ``start``."""
    steps = []
    cur = start
    for i, p, sigma in moves:
        nxt = replace_at(cur, p, apply_subst(sigma, rules[i].rhs))
        steps.append(RewriteStep(i, p, sigma, cur, nxt, kind))
        cur = nxt
    return steps


def _lift(moves, prefix: Position):
    return [(i, prefix + p, s) for i, p, s in moves]


@dataclass(frozen=True)
class ModStep:
    pre_equational: tuple[RewriteStep, ...]
    core: RewriteStep
    post_equational: tuple[RewriteStep, ...]

    @property
    def source(self) -> Term:
        return self.pre_equational[0].source if self.pre_equational else self.core.source

    @property
    def target(self) -> Term:
        return self.post_equational[-1].target if self.post_equational else self.core.target

    def steps(self) -> list[RewriteStep]:
        return [*self.pre_equational, self.core, *self.post_equational]


class _Engine:
    """Caches for one (R, E) pair. Results are pure functions of their keys."""

    def __init__(self, R: Trs | None, E: EquationSet, cap: int):
        self.R = R
        self.E = E
        self.cap = cap
        self.erules = E.rules
        self.sig = E.signature if R is None else R.signature.extended(E.signature.symbols)
        self.reverse = [self.erules.index(r.reversed()) for r in self.erules]
        self.const_rules = [(i, r) for i, r in enumerate(self.erules) if is_constant(r.lhs)]
        self.root_rules: dict[str, list] = {}
        for i, r in enumerate(self.erules):
            if r.lhs.height == 1:
                self.root_rules.setdefault(r.lhs.symbol, []).append((i, r))
        self._canon: dict[Term, tuple[Term, list]] = {}
        self._normal: dict[Term, bool] = {}
        self._variants: dict[Term, dict] = {}
        self._succs: dict[tuple, dict] = {}
        self._lock = threading.Lock()

    def key(self, t: Term) -> tuple:
        return term_key(t, self.sig)

    # ---- canonical representatives -------------------------------------

    def _const_paths(self, c: App) -> dict[Term, list]:
        """All constants E-equal to ``c`` with a move list reaching each."""
        paths = {c: []}
        queue = deque([c])
        while queue:
            d = queue.popleft()
            for i, r in self.const_rules:
                if r.lhs == d and r.rhs not in paths:
                    paths[r.rhs] = paths[d] + [(i, (), {})]
                    queue.append(r.rhs)
        return paths

    def canon_moves(self, t: Term) -> tuple[Term, list]:
        hit = self._canon.get(t)
        if hit is not None:
            return hit
        if not self.erules or not isinstance(t, App):
            res = (t, [])
        elif not t.args:
            paths = self._const_paths(t)
            best = min(paths, key=self.key)
            res = (best, paths[best])
        else:
            moves = []
            kids = []
            for j, a in enumerate(t.args, 1):
                ca, ma = self.canon_moves(a)
                kids.append(ca)
                moves += _lift(ma, (j,))
            w = App(t.symbol, kids)
            states = self._root_closure(w)
            best = min(states, key=self.key)
            res = (best, moves + states[best])
        with self._lock:
            self._canon[t] = res
        return res

    def _root_closure(self, w: App) -> dict[Term, list]:
        """States reachable by root E-steps from ``w`` (children kept canonical)."""
        states = {w: []}
        queue = deque([w])
        while queue:
            s = queue.popleft()
            for i, r in self.root_rules.get(s.symbol, ()):
                moves = []
                cur = s
                ok = True
                for j, (pat, child) in enumerate(zip(r.lhs.args, s.args), 1):
                    if isinstance(pat, App) and pat != child:
                        path = self._const_paths(child).get(pat)
                        if path is None:
                            ok = False
                            break
                        moves += _lift(path, (j,))
                        cur = replace_at(cur, (j,), pat)
                if not ok:
                    continue
                sigma = match(r.lhs, cur)
                moves.append((i, (), sigma))
                cur = apply_subst(sigma, r.rhs)
                for j, a in enumerate(r.rhs.args, 1):
                    if isinstance(a, App):
                        ca, ma = self.canon_moves(a)
                        moves += _lift(ma, (j,))
                        cur = replace_at(cur, (j,), ca)
                if cur not in states:
                    states[cur] = states[s] + moves
                    if len(states) > self.cap:
                        raise ClassBudgetExceeded(self.cap)
                    queue.append(cur)
        return states

    def reverse_moves(self, moves) -> list:
        return [(self.reverse[i], p, s) for i, p, s in reversed(moves)]

    def path(self, s: Term, t: Term) -> list:
        """Moves from ``s`` to an E-equal term ``t`` through their canonical form."""
        cs, ms = self.canon_moves(s)
        ct, mt = self.canon_moves(t)
        if cs != ct:
            raise ValueError(f"{s} and {t} are not E-equal")
        return ms + self.reverse_moves(mt)

    # ---- class materialization ----------------------------------------

    def e_class(self, t: Term) -> list[Term]:
        """Members of the class of ``t`` in term order."""
        return list(_e_class_cached(self, self.canon_moves(t)[0]))

    # ---- rewriting modulo ---------------------------------------------

    def variants(self, c: Term) -> dict[Term, list]:
        """Root variants of a canonical term, each with moves from ``c``; children stay canonical."""
        hit = self._variants.get(c)
        if hit is not None:
            return hit
        if not isinstance(c, App) or not self.erules:
            res = {c: []}
        elif not c.args:
            res = self._const_paths(c)
        else:
            res = self._root_closure(c)
        with self._lock:
            self._variants[c] = res
        return res

    def match_class(self, pat: Term, c: Term) -> list[tuple[dict, list]]:
        """Ways to turn canonical ``c`` by E-moves into an instance of ``pat``.

        Each result is (binding of pattern variables to canonical terms, moves);
        the moves lead from ``c`` to exactly ``apply_subst(binding, pat)``.
        """
        if isinstance(pat, Var):
            return [({pat.name: c}, [])]
        if not isinstance(c, App):
            return []
        out: dict[frozenset, tuple[dict, list]] = {}
        for w, mw in self.variants(c).items():
            if w.symbol != pat.symbol or len(w.args) != len(pat.args):
                continue
            partial = [({}, mw)]
            for j, (pj, cj) in enumerate(zip(pat.args, w.args), 1):
                sub = self.match_class(pj, cj)
                nxt = []
                for b, m in partial:
                    for b2, m2 in sub:
                        if any(b.get(x, v) != v for x, v in b2.items()):
                            continue
                        nxt.append(({**b, **b2}, m + _lift(m2, (j,))))
                partial = nxt
                if not partial:
                    break
            for b, m in partial:
                out.setdefault(frozenset(b.items()), (b, m))
        return list(out.values())

    def is_normal(self, t: Term) -> bool:
        """No member of the class of ``t`` is R-reducible at any position."""
        c = self.canon_moves(t)[0]
        hit = self._normal.get(c)
        if hit is not None:
            return hit
        res = True
        if isinstance(c, App):
            for w in self.variants(c):
                if not all(self.is_normal(a) for a in w.args):
                    res = False
                    break
            if res:
                res = not any(self.match_class(r.lhs, c) for r in self.R.rules)
        with self._lock:
            self._normal[c] = res
        return res

    def _succ(self, c: Term, innermost: bool) -> dict:
        """Successor classes of canonical ``c``: target -> (pre, move, u, v, post), moves relative to ``c``.

        Order: root steps by rule, then steps inside each root variant by
        argument; for an empty theory this is rewrite_once order.
        """
        key = (c, innermost)
        hit = self._succs.get(key)
        if hit is not None:
            return hit
        out: dict = {}
        if isinstance(c, App):
            for i, r in enumerate(self.R.rules):
                for b, m in self.match_class(r.lhs, c):
                    u = apply_subst(b, r.lhs)
                    if innermost and not all(self.is_normal(a) for a in u.args):
                        continue
                    v = apply_subst(b, r.rhs)
                    cv, post = self.canon_moves(v)
                    if cv not in out:
                        out[cv] = (m, (i, (), b), u, v, post)
            for w, mw in self.variants(c).items():
                for j, a in enumerate(w.args, 1):
                    for ca2, (pre_a, (i, p, b), u_a, v_a, post_a) in self._succ(a, innermost).items():
                        w2 = replace_at(w, (j,), ca2)
                        cv, post2 = self.canon_moves(w2)
                        if cv in out:
                            continue
                        out[cv] = (
                            mw + _lift(pre_a, (j,)),
                            (i, (j,) + p, b),
                            replace_at(w, (j,), u_a),
                            replace_at(w, (j,), v_a),
                            _lift(post_a, (j,)) + post2,
                        )
        with self._lock:
            self._succs[key] = out
        return out

    def successors(self, t: Term, innermost: bool) -> list[tuple[EClassKey, ModStep]]:
        ct, to_c = self.canon_moves(t)
        res = []
        for cv, (pre, (i, p, b), u, v, post) in self._succ(ct, innermost).items():
            pre_steps = materialize(t, to_c + pre, self.erules, EQUATIONAL)
            assert (pre_steps[-1].target if pre_steps else t) == u
            core = RewriteStep(i, p, b, u, v, PLAIN)
            res.append((EClassKey(cv, cv.size), ModStep(tuple(pre_steps), core, tuple(materialize(v, post, self.erules, EQUATIONAL)))))
        return res

    def successors_enum(self, t: Term, innermost: bool) -> list[tuple[EClassKey, ModStep]]:
        """Reference version: enumerate every class member, position and rule."""
        ct, to_c = self.canon_moves(t)
        members = self.e_class(ct) if self.erules else [t]
        out: dict[Term, ModStep] = {}
        rules = self.R.rules
        for u in members:
            for p, sub in iter_positions(u):
                if not isinstance(sub, App):
                    continue
                args_normal = None
                for i, r in enumerate(rules):
                    sigma = match(r.lhs, sub)
                    if sigma is None:
                        continue
                    if innermost:
                        if args_normal is None:
                            args_normal = all(self.is_normal(a) for a in sub.args)
                        if not args_normal:
                            break
                    v = replace_at(u, p, apply_subst(sigma, r.rhs))
                    cv, post = self.canon_moves(v)
                    if cv in out:
                        continue
                    pre = to_c + self.reverse_moves(self.canon_moves(u)[1]) if self.erules else []
                    pre_steps = materialize(t, pre, self.erules, EQUATIONAL)
                    core = RewriteStep(i, p, sigma, u, v, PLAIN)
                    post_steps = materialize(v, post, self.erules, EQUATIONAL)
                    out[cv] = ModStep(tuple(pre_steps), core, tuple(post_steps))
        return [(EClassKey(c, c.size), ms) for c, ms in out.items()]


@lru_cache(maxsize=4096)
def _e_class_cached(eng: _Engine, t: Term) -> tuple[Term, ...]:
    seen = {t}
    queue = deque([t])
    h, n = t.height, t.size
    while queue:
        u = queue.popleft()
        for p, sub in iter_positions(u):
            if not isinstance(sub, App):
                continue
            for r in eng.erules:
                sigma = match(r.lhs, sub)
                if sigma is None:
                    continue
                v = replace_at(u, p, apply_subst(sigma, r.rhs))
                if v in seen:
                    continue
                assert v.height == h and v.size == n, "permutative step changed height or size"
                seen.add(v)
                if len(seen) > eng.cap:
                    raise ClassBudgetExceeded(eng.cap)
                queue.append(v)
    return tuple(sorted(seen, key=eng.key))


@lru_cache(maxsize=64)
def engine(R: Trs | None, E: EquationSet, cap: int = DEFAULT_CLASS_CAP) -> _Engine:
    return _Engine(R, E, cap)


def e_class(t: Term, E: EquationSet, cap: int = DEFAULT_CLASS_CAP) -> set[Term]:
    """The full closure of ``{t}`` under E-steps."""
    eng = engine(None, E, cap)
    if not E.rules:
        return {t}
    return set(_e_class_cached(eng, t))


def canonical(t: Term, E: EquationSet, cap: int = DEFAULT_CLASS_CAP) -> EClassKey:
    c = engine(None, E, cap).canon_moves(t)[0]
    return EClassKey(c, c.size)


def e_path(s: Term, t: Term, E: EquationSet) -> list[RewriteStep]:
    """Equational steps from ``s`` to ``t``; raises ValueError if not E-equal."""
    eng = engine(None, E)
    return materialize(s, eng.path(s, t), E.rules, EQUATIONAL)


def canonical_path(t: Term, E: EquationSet) -> list[RewriteStep]:
    c, moves = engine(None, E).canon_moves(t)
    return materialize(t, moves, E.rules, EQUATIONAL)


def is_normal_mod(t: Term, R: Trs, E: EquationSet) -> bool:
    return engine(R, E).is_normal(t)


def mod_successors(t: Term, R: Trs, E: EquationSet, innermost: bool = False) -> list[tuple[EClassKey, ModStep]]:
    """One ``R/E`` step from ``t``, one ModStep per successor class, in enumeration order."""
    return engine(R, E).successors(t, innermost)


def check_modstep(ms: ModStep, R: Trs, E: EquationSet) -> bool:
    from .trs import check_step

    prev = None
    for st in ms.steps():
        rules = E.rules if st.kind == EQUATIONAL else R.rules
        if not check_step(st, rules):
            return False
        if prev is not None and prev.target != st.source:
            return False
        prev = st
    return ms.core.kind == PLAIN
