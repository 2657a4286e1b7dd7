"""Terms, positions, substitutions and matching.

Terms are immutable. ``Var`` and ``App`` precompute their hash, height and
node count, so they can be used freely as dictionary keys during state-space
exploration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

Position = tuple[int, ...]
ROOT: Position = ()


class InvalidPosition(ValueError):
    pass


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("symbol name must be nonempty")
        if self.arity < 0:
            raise ValueError(f"negative arity for {self.name}")


class Signature:
    """Ordered set of symbols; declaration order is the total symbol order."""

    __slots__ = ("symbols", "_arity", "_rank")

    def __init__(self, symbols: Iterable[Symbol] = ()):
        self.symbols: tuple[Symbol, ...] = tuple(symbols)
        self._arity: dict[str, int] = {}
        self._rank: dict[str, int] = {}
        for i, s in enumerate(self.symbols):
            if s.name in self._arity:
                raise ValueError(f"duplicate symbol {s.name}")
            self._arity[s.name] = s.arity
            self._rank[s.name] = i

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "Signature":
        return cls(Symbol(n, a) for n, a in pairs)

    @property
    def constants(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.symbols if s.arity == 0)

    @property
    def functions(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.arity > 0)

    def arity(self, name: str) -> int:
        return self._arity[name]

    def rank(self, name: str) -> int:
        return self._rank[name]

    def __contains__(self, name: str) -> bool:
        return name in self._arity

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        inner = ", ".join(f"{s.name}/{s.arity}" for s in self.symbols)
        return f"Signature({inner})"

    def extended(self, symbols: Iterable[Symbol]) -> "Signature":
        extra: dict[str, Symbol] = {}
        for s in symbols:
            if s.name not in self._arity:
                extra.setdefault(s.name, s)
        if not extra:
            return self
        return Signature(self.symbols + tuple(extra.values()))

    def check(self, t: "Term") -> None:
        """Raise ValueError if ``t`` uses a symbol absent from, or inconsistent with, this signature."""
        for node in iter_nodes(t):
            if isinstance(node, App):
                if node.symbol not in self._arity:
                    raise ValueError(f"symbol {node.symbol} not in signature")
                if self._arity[node.symbol] != len(node.args):
                    raise ValueError(
                        f"symbol {node.symbol} used with arity {len(node.args)}, "
                        f"declared {self._arity[node.symbol]}"
                    )


class Var:
    __slots__ = ("name", "_hash")
    height = 0
    size = 1

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("V", name))

    def __eq__(self, other):
        return self is other or (isinstance(other, Var) and other.name == self.name)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return self.name

    __str__ = __repr__


class App:
    __slots__ = ("symbol", "args", "height", "size", "_hash")

    def __init__(self, symbol: str, args: Iterable["Term"] = ()):
        self.symbol = symbol
        self.args: tuple[Term, ...] = tuple(args)
        if self.args:
            self.height = 1 + max(a.height for a in self.args)
            self.size = 1 + sum(a.size for a in self.args)
        else:
            self.height = 0
            self.size = 1
        self._hash = hash((symbol, self.args))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, App) or self._hash != other._hash:
            return False
        if self.height < 100:
            return self.symbol == other.symbol and self.args == other.args
        # deep terms: explicit stack instead of recursion
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if isinstance(a, Var) or isinstance(b, Var):
                if a != b:
                    return False
                continue
            if a._hash != b._hash or a.symbol != b.symbol or len(a.args) != len(b.args):
                return False
            stack.extend(zip(a.args, b.args))
        return True

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.args:
            return self.symbol
        return f"{self.symbol}({','.join(map(repr, self.args))})"

    __str__ = __repr__


Term = Union[Var, App]
Substitution = dict  # variable name -> Term


def const(name: str) -> App:
    return App(name, ())


def is_constant(t: Term) -> bool:
    return isinstance(t, App) and not t.args


def iter_nodes(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, App):
            stack.extend(reversed(n.args))


def iter_positions(t: Term, prefix: Position = ROOT) -> Iterator[tuple[Position, Term]]:
    """Yield ``(position, subterm)`` pairs in preorder, which is lexicographic order."""
    stack = [(prefix, t)]
    while stack:
        p, n = stack.pop()
        yield p, n
        if isinstance(n, App):
            for i in range(len(n.args), 0, -1):
                stack.append((p + (i,), n.args[i - 1]))


def positions(t: Term) -> set[Position]:
    return {p for p, _ in iter_positions(t)}


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if not isinstance(t, App) or not 1 <= i <= len(t.args):
            raise InvalidPosition(p)
        t = t.args[i - 1]
    return t


def replace_at(t: Term, p: Position, s: Term) -> Term:
    if not p:
        return s
    i = p[0]
    if not isinstance(t, App) or not 1 <= i <= len(t.args):
        raise InvalidPosition(p)
    args = list(t.args)
    args[i - 1] = replace_at(args[i - 1], p[1:], s)
    return App(t.symbol, args)


def height(t: Term) -> int:
    return t.height


def size(t: Term) -> int:
    return t.size


def variables(t: Term) -> set[str]:
    return {n.name for n in iter_nodes(t) if isinstance(n, Var)}


def variable_list(t: Term) -> list[str]:
    """Variables in preorder, with repetitions."""
    return [n.name for n in iter_nodes(t) if isinstance(n, Var)]


def subterms(t: Term) -> set[Term]:
    return set(iter_nodes(t))


def match(pattern: Term, t: Term, sigma: Substitution | None = None) -> Substitution | None:
    """Return ``σ`` with ``σ(pattern) == t``, extending ``sigma``, or None."""
    sigma = {} if sigma is None else dict(sigma)
    stack = [(pattern, t)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            bound = sigma.get(p.name)
            if bound is None:
                sigma[p.name] = s
            elif bound != s:
                return None
        elif isinstance(s, App) and p.symbol == s.symbol and len(p.args) == len(s.args):
            stack.extend(zip(p.args, s.args))
        else:
            return None
    return sigma


def apply_subst(sigma: Mapping[str, Term], t: Term) -> Term:
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    if not t.args:
        return t
    return App(t.symbol, [apply_subst(sigma, a) for a in t.args])


def is_ground(t: Term) -> bool:
    return not any(isinstance(n, Var) for n in iter_nodes(t))


def is_linear(t: Term) -> bool:
    vs = variable_list(t)
    return len(vs) == len(set(vs))


def is_flat(t: Term) -> bool:
    return t.height <= 1


def is_shallow(t: Term) -> bool:
    return all(len(p) <= 1 for p, n in iter_positions(t) if isinstance(n, Var))


@dataclass(frozen=True)
class SyntacticFlags:
    ground: bool
    linear: bool
    flat: bool
    shallow: bool


def syntactic_predicates(t: Term) -> SyntacticFlags:
    return SyntacticFlags(is_ground(t), is_linear(t), is_flat(t), is_shallow(t))


def pos_str(p: Position) -> str:
    return ".".join(map(str, p)) if p else "λ"


def is_prefix(p: Position, q: Position) -> bool:
    """True iff ``p <= q`` (p is above or equal to q)."""
    return q[: len(p)] == p


def term_key(t: Term, sig: Signature) -> tuple:
    """Sort key of the global total term order.

    Compares by height, then node count, then the preorder label sequence.
    Symbols rank by declaration order; variables come after every symbol,
    ordered by name. Symbols missing from ``sig`` rank after declared ones.
    """
    n = len(sig)
    labels = []
    for node in iter_nodes(t):
        if isinstance(node, Var):
            labels.append((2, 0, node.name))
        elif node.symbol in sig:
            labels.append((0, sig.rank(node.symbol), ""))
        else:
            labels.append((1, n, node.symbol))
    return (t.height, t.size, tuple(labels))
