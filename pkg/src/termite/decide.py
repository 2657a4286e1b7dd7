"""Global decision procedures and the reachability measure."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product

from .compose import Composer
from .explore import (
    DEFAULT_BUDGET,
    TERMINATING,
    Verdict,
    decide_from_term,
    full_signature,
    height_bound,
)
from .modulo import DEFAULT_CLASS_CAP, canonical, mod_successors
from .terms import App, Signature, Term, const, iter_positions
from .transform import FLAT, INNERMOST_MODE, PLAIN_MODE, RIGHT_FLAT, preprocess
from .trs import EquationSet, Trs, classify

GLOBAL_BFS_LIMIT = 64


class MultipleFunctionSymbols(ValueError):
    pass


class NotShallow(ValueError):
    pass


class NotRightShallowRightLinear(ValueError):
    pass


class PartialReachability(ValueError):
    pass


def ground_flat_terms(sig: Signature) -> list[Term]:
    """Constants, then ``f(c1..cm)`` in term order, for a single function symbol ``f``."""
    funcs = sig.functions
    if len(funcs) != 1:
        raise MultipleFunctionSymbols(f"expected one function symbol, got {len(funcs)}")
    return flat_start_terms(sig)


def flat_start_terms(sig: Signature, symbols=None) -> list[Term]:
    """All ground flat terms: constants first, then each function symbol in signature order."""
    consts = [const(c) for c in sig.constants]
    out: list[Term] = list(consts)
    for f in sig.functions:
        if symbols is not None and f.name not in symbols:
            continue
        out.extend(App(f.name, args) for args in product(consts, repeat=f.arity))
    return out


def relevant_roots(R: Trs, E: EquationSet) -> set[str] | None:
    """Function symbols whose flat ground terms still need checking once all constants terminate.

    With E empty, a root symbol only changes through a root step. If every rule
    rooted by ``g`` rewrites to a constant or a variable, an infinite
    derivation from ``g(c1..ck)`` has at most one root step, so it lives in a
    constant or below a constant argument; both are covered by the constant
    starts. None means no pruning applies.
    """
    if E.rules:
        return None
    keep = set()
    for r in R.rules:
        if isinstance(r.lhs, App) and r.lhs.args and isinstance(r.rhs, App) and r.rhs.args:
            keep.add(r.lhs.symbol)
    return keep


def _sweep(R2, E2, trace, mode, budget, prune):
    sig = full_signature(R2, E2)
    consts = flat_start_terms(Signature([s for s in sig if s.arity == 0]))
    roots = relevant_roots(R2, E2) if prune else None
    funcs = [t for t in flat_start_terms(sig, roots) if t.height == 1]
    composer = None
    if mode == PLAIN_MODE and not E2.rules:
        composer = Composer(R2, None, height_bound(App("_", []), sig) + 1, budget)
    total = {"starts": 0, "skipped_symbols": sorted(s.name for s in sig.functions if roots is not None and s.name not in roots)}
    known: set = set()
    for t in consts + funcs:
        total["starts"] += 1
        v = decide_from_term(R2, E2, t, mode, budget, bfs_limit=GLOBAL_BFS_LIMIT, composer=composer, known=known)
        if not v.terminating:
            # an exhausted budget already rules out a terminating verdict
            v.stats.update(total, start=str(t))
            v.trace, v.system = trace, (R2, E2)
            return v
    return Verdict(TERMINATING, None, total, trace=trace, system=(R2, E2))


def decide_innermost_shallow(
    R: Trs, E: EquationSet, budget: int = DEFAULT_BUDGET, collapse: bool = False, prune: bool = True
) -> Verdict:
    """Innermost termination of a shallow TRS modulo a permutative theory."""
    if not classify(R).shallow:
        raise NotShallow("every rule must be shallow")
    R2, E2, trace = preprocess(R, E, INNERMOST_MODE, FLAT, collapse=collapse)
    return _sweep(R2, E2, trace, INNERMOST_MODE, budget, prune)


def decide_plain_rsrl(
    R: Trs, E: EquationSet, budget: int = DEFAULT_BUDGET, collapse: bool = False, prune: bool = True
) -> Verdict:
    """Termination of a right-shallow right-linear TRS modulo a permutative theory."""
    rep = classify(R)
    if not (rep.right_shallow and rep.right_linear):
        raise NotRightShallowRightLinear("every right-hand side must be shallow and linear")
    R2, E2, trace = preprocess(R, E, PLAIN_MODE, RIGHT_FLAT, collapse=collapse)
    return _sweep(R2, E2, trace, PLAIN_MODE, budget, prune)


# ---- reachability from constants and the measure ---------------------


@dataclass(frozen=True)
class ReachSet:
    keys: frozenset
    partial: bool


def constant_reachable_set(
    R: Trs, E: EquationSet, cap: int = 10_000, mode: str = PLAIN_MODE
) -> ReachSet:
    """E-classes reachable from any constant; ``partial`` when the cap cuts exploration.

    A class higher than the number of constants means some constant pumps, so
    the set is infinite and is reported partial at once.
    """
    sig = full_signature(R, E)
    start = [canonical(const(c), E).canonical for c in sig.constants]
    limit = len(sig.constants)
    seen = set(start)
    queue = deque(start)
    while queue:
        u = queue.popleft()
        for key, _ in mod_successors(u, R, E, mode == INNERMOST_MODE):
            v = key.canonical
            if v.height > limit:
                return ReachSet(frozenset(seen), True)
            if v not in seen:
                if len(seen) >= cap:
                    return ReachSet(frozenset(seen), True)
                seen.add(v)
                queue.append(v)
    return ReachSet(frozenset(seen), False)


def measure_norm(t: Term, reach: ReachSet, E: EquationSet) -> int:
    """Number of positions whose subterm is not reachable from a constant."""
    if reach.partial:
        raise PartialReachability("constant reachability was cut off by the cap")
    return sum(1 for _, s in iter_positions(t) if canonical(s, E, DEFAULT_CLASS_CAP).canonical not in reach.keys)
