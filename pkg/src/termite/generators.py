"""Hard instances from the hardness and undecidability reductions, with oracles."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .terms import App, Signature, Symbol, Term, Var, const
from .trs import Rule, Trs

LETTERS = ("a", "b")


class EmptyAutomaton(ValueError):
    pass


class EmptyString(ValueError):
    pass


class IndexOutOfRange(ValueError):
    pass


# ---- automata intersection ---------------------------------------------


@dataclass(frozen=True)
class AutomatonSpec:
    states: tuple[str, ...]
    initial: str
    finals: frozenset[str]
    transitions: tuple[tuple[str, str, str], ...] = ()  # (q, letter, q')

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "finals", frozenset(self.finals))
        object.__setattr__(self, "transitions", tuple(sorted(set(map(tuple, self.transitions)))))
        if not self.states:
            raise EmptyAutomaton("automaton has no states")
        if self.initial not in self.states or not self.finals <= set(self.states):
            raise ValueError("initial and final states must be states")
        for q, x, p in self.transitions:
            if q not in self.states or p not in self.states or x not in LETTERS:
                raise ValueError(f"bad transition {q} -{x}-> {p}")

    def step(self, q: str, x: str) -> list[str]:
        return [p for (q0, y, p) in self.transitions if q0 == q and y == x]

    def accepts(self, word: str) -> bool:
        cur = {self.initial}
        for x in word:
            cur = {p for q in cur for p in self.step(q, x)}
        return bool(cur & self.finals)


def _sane(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]", "_", str(name))


def product_size(autos: Sequence[AutomatonSpec]) -> int:
    m = 1
    for A in autos:
        m *= len(A.states)
    return m


def depth_levels(M: int) -> int:
    """N = ceil(log2 M), with N = 0 when M = 1."""
    return (M - 1).bit_length()


def gen_intersection_trs(autos: Sequence[AutomatonSpec], pad_single: bool = False) -> Trs:
    """A flat right-linear TRS that is nonterminating iff the languages intersect.

    With a single automaton the rule ``h(x) -> c`` fires on every term, so the
    system loops even for an empty language. ``pad_single`` passes the
    automaton twice, which keeps the intersection and restores the equivalence.
    """
    if not autos:
        raise ValueError("need at least one automaton")
    if pad_single and len(autos) == 1:
        autos = [autos[0], autos[0]]
    for A in autos:
        if not A.states:
            raise EmptyAutomaton("automaton has no states")
    n = len(autos)
    c = const("c")
    if all(A.initial in A.finals for A in autos):
        return Trs(Signature.of(("c", 0)), (Rule(c, c),))
    M = product_size(autos)
    N = depth_levels(M)

    def cq(i, j, q, qh):
        return f"c_{i}_{j}_{_sane(q)}_{_sane(qh)}"

    consts = ["a", "b", "c"] + [f"c_{i}" for i in range(1, n + 1)]
    for i, A in enumerate(autos, 1):
        for j in range(N + 1):
            for q in A.states:
                for qh in A.states:
                    consts.append(cq(i, j, q, qh))
    sig = Signature([Symbol(x, 0) for x in consts] + [Symbol("f", 2), Symbol("h", n)])
    x = Var("x")
    rules = [
        Rule(c, App("h", [const(f"c_{i}") for i in range(1, n + 1)])),
        Rule(App("h", [x] * n), c),
    ]
    for i, A in enumerate(autos, 1):
        for q in sorted(A.finals, key=A.states.index):
            rules.append(Rule(const(f"c_{i}"), const(cq(i, 0, A.initial, q))))
    for letter in LETTERS:
        for i, A in enumerate(autos, 1):
            for j in range(N + 1):
                for q, y, qh in A.transitions:
                    if y == letter:
                        rules.append(Rule(const(cq(i, j, q, qh)), const(letter)))
    for i, A in enumerate(autos, 1):
        for j in range(N):
            for q in A.states:
                for qh in A.states:
                    for qb in A.states:
                        rhs = App("f", [const(cq(i, j + 1, q, qb)), const(cq(i, j + 1, qb, qh))])
                        rules.append(Rule(const(cq(i, j, q, qh)), rhs))
    return Trs(sig, rules)


def intersection_rule_count(autos: Sequence[AutomatonSpec]) -> int:
    """Closed-form size of :func:`gen_intersection_trs` (outside the empty-word case)."""
    N = depth_levels(product_size(autos))
    return (
        2
        + sum(len(A.finals) for A in autos)
        + (N + 1) * sum(len(A.transitions) for A in autos)
        + N * sum(len(A.states) ** 3 for A in autos)
    )


def product_empty(autos: Sequence[AutomatonSpec]) -> bool:
    """True iff the intersection of the languages (empty word included) is empty."""
    start = tuple(A.initial for A in autos)

    def accepting(t):
        return all(q in A.finals for q, A in zip(t, autos))

    if accepting(start):
        return False
    seen = {start}
    queue = deque([start])
    while queue:
        t = queue.popleft()
        for x in LETTERS:
            for nxt in product(*(A.step(q, x) for q, A in zip(t, autos))):
                if accepting(nxt):
                    return False
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return True


# ---- PCP ----------------------------------------------------------------


@dataclass(frozen=True)
class PcpInstance:
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((u, v) for u, v in self.pairs))
        if not self.pairs:
            raise ValueError("PCP instance needs at least one pair")
        for u, v in self.pairs:
            if not u or not v:
                raise EmptyString("PCP strings must be nonempty")
            if not re.fullmatch(r"[A-Za-z]+", u + v):
                raise ValueError(f"letters must be alphabetic: {u!r}, {v!r}")

    @classmethod
    def parse(cls, text: str) -> "PcpInstance":
        """``"aa:a,b:aba"`` style."""
        pairs = []
        for part in text.split(","):
            u, _, v = part.strip().partition(":")
            pairs.append((u.strip(), v.strip()))
        return cls(tuple(pairs))

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def L(self) -> int:
        return max(max(len(u), len(v)) for u, v in self.pairs)

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(sorted(set(LETTERS) | {x for u, v in self.pairs for x in u + v}))

    def is_solution(self, indices: Sequence[int]) -> bool:
        if not indices:
            return False
        u = "".join(self.pairs[i - 1][0] for i in indices)
        v = "".join(self.pairs[i - 1][1] for i in indices)
        return u == v


def _chain(symbols: Sequence[str], tail: Term) -> Term:
    t = tail
    for s in reversed(symbols):
        t = App(s, [t])
    return t


def _sym(kind: str, i: int, j: int) -> str:
    return f"{kind}_{i}_{j}"


def pcp_signature(inst: PcpInstance) -> Signature:
    nullary = ["U", "U'", "V", "V'", "P", "P'", "P''", "A", "A'", "A''"]
    unary = list(inst.alphabet)
    for kind in "UVP":
        unary += [_sym(kind, i, j) for i in range(1, inst.n + 1) for j in range(1, inst.L + 1)]
    return Signature(
        [Symbol(s, 0) for s in nullary]
        + [Symbol(s, 1) for s in unary]
        + [Symbol("f1", 2), Symbol("f3", 6), Symbol("f2", 8)]
    )


def pcp_families(inst: PcpInstance) -> dict[str, list[Rule]]:
    n, L = inst.n, inst.L
    x, y, z, z2 = Var("x"), Var("y"), Var("z"), Var("z'")
    K = const
    row = lambda kind, i: [_sym(kind, i, j) for j in range(1, L + 1)]
    fam: dict[str, list[Rule]] = {}
    fam["R_U"] = [r for i in range(1, n + 1) for r in (
        Rule(_chain(row("U", i), K("U")), K("U'")),
        Rule(_chain(row("U", i), K("U'")), K("U'")),
    )]
    fam["R_V"] = [r for i in range(1, n + 1) for r in (
        Rule(_chain(row("V", i), K("V")), K("V'")),
        Rule(_chain(row("V", i), K("V'")), K("V'")),
    )]
    fam["R_2P"] = [
        r
        for i in range(1, n + 1)
        for j in range(1, L + 1)
        for r in (
            Rule(App(_sym("U", i, j), [x]), App(_sym("P", i, j), [x])),
            Rule(App(_sym("V", i, j), [x]), App(_sym("P", i, j), [x])),
        )
    ]
    fam["R_P'"] = [Rule(_chain(row("P", i), K("P'")), K("P'")) for i in range(1, n + 1)]
    fam["R_P''"] = [Rule(_chain(row("P", i), K("P''")), K("P''")) for i in range(1, n + 1)]
    fam["R_UP"] = [Rule(K("U"), K("P")), Rule(K("V"), K("P")), Rule(K("P"), K("P'")), Rule(K("P"), K("P''"))]
    fam["R_alpha"] = [
        r for a in inst.alphabet for r in (
            Rule(App(a, [K("A'")]), K("A'")),
            Rule(App(a, [K("A''")]), K("A''")),
        )
    ]
    w = []
    for kind, side in (("U", 0), ("V", 1)):
        for i, pair in enumerate(inst.pairs, 1):
            word = pair[side]
            for j in range(1, L + 1):
                lhs = App(_sym(kind, i, j), [x])
                w.append(Rule(lhs, App(word[j - 1], [x]) if j <= len(word) else x))
    fam["R_w"] = w
    fam["R_UA"] = [Rule(K("U"), K("A")), Rule(K("V"), K("A")), Rule(K("A"), K("A'")), Rule(K("A"), K("A''"))]
    fam["R_f"] = [
        Rule(App("f1", [x, y]), App("f2", [x, y] * 4)),
        Rule(App("f2", [x, y, z, z, z2, z2, K("U'"), K("V'")]), App("f3", [x, y, z, z, z2, z2])),
        Rule(App("f3", [x, y, K("A'"), K("A''"), K("P'"), K("P''")]), App("f1", [x, y])),
    ]
    return fam


def gen_pcp_trs(inst: PcpInstance) -> Trs:
    """A shallow right-flat TRS that is nonterminating iff the instance is solvable."""
    rules = [r for rs in pcp_families(inst).values() for r in rs]
    return Trs(pcp_signature(inst), rules)


def pcp_family_sizes(inst: PcpInstance) -> dict[str, int]:
    n, L, k = inst.n, inst.L, len(inst.alphabet)
    return {
        "R_U": 2 * n, "R_V": 2 * n, "R_2P": 2 * n * L, "R_P'": n, "R_P''": n,
        "R_UP": 4, "R_alpha": 2 * k, "R_w": 2 * n * L, "R_UA": 4, "R_f": 3,
    }


def pcp_witness_term(inst: PcpInstance, indices: Sequence[int]) -> Term:
    """``f1(s_uu, s_vv)`` for a 1-based index sequence."""
    if not indices:
        raise IndexOutOfRange("index sequence must be nonempty")
    for i in indices:
        if not 1 <= i <= inst.n:
            raise IndexOutOfRange(f"index {i} not in 1..{inst.n}")
    uu = [_sym("U", i, j) for i in indices for j in range(1, inst.L + 1)]
    vv = [_sym("V", i, j) for i in indices for j in range(1, inst.L + 1)]
    return App("f1", [_chain(uu, const("U")), _chain(vv, const("V"))])


def word_term(word: str, tail: Term) -> Term:
    return _chain(list(word), tail)


EPS = "eps"


def gen_pcp_innermost_trs(inst: PcpInstance) -> Trs:
    """A right-flat TRS that is innermost nonterminating iff the instance is solvable."""
    x, y, z = Var("x"), Var("y"), Var("z")
    eps = const(EPS)
    rules = [Rule(App("f", [x]), App("g", [x, x, x]))]
    for u, v in inst.pairs:
        rules.append(Rule(App("g", [x, word_term(u, y), word_term(v, z)]), App("h", [x, y, z])))
    for u, v in inst.pairs:
        rules.append(Rule(App("h", [x, word_term(u, y), word_term(v, z)]), App("h", [x, y, z])))
    rules.append(Rule(App("h", [x, eps, eps]), App("f", [x])))
    sig = Signature(
        [Symbol(EPS, 0)] + [Symbol(a, 1) for a in inst.alphabet]
        + [Symbol("f", 1), Symbol("g", 3), Symbol("h", 3)]
    )
    return Trs(sig, rules)


def pcp_innermost_start(word: str) -> Term:
    return App("f", [word_term(word, const(EPS))])


def pcp_brute_solve(inst: PcpInstance, k_max: int) -> Optional[tuple[int, ...]]:
    """Shortest solution of length at most ``k_max`` (lexicographically first), or None."""
    idx = range(1, inst.n + 1)
    for k in range(1, k_max + 1):
        for seq in product(idx, repeat=k):
            if inst.is_solution(seq):
                return seq
    return None
