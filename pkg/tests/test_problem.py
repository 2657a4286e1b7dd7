import random

import pytest
from hypothesis import given, settings, strategies as st

from strategies import random_permutative, random_right_flat_trs, random_shallow_trs, random_signature, random_term
from termite.problem import ParseError, ReservedName, format_problem, make_problem, parse_problem, parse_term
from termite.trs import NotPermutative

TOYAMA = "(VAR x)(RULES f(0,1,x) -> f(x,x,x) c -> 0 c -> 1)(START f(0,1,c))"


def test_toyama_file():
    pf = parse_problem(TOYAMA)
    assert len(pf.trs.rules) == 3
    assert pf.start == parse_term("f(0,1,c)")
    assert {s.name: s.arity for s in pf.signature} == {"f": 3, "0": 0, "1": 0, "c": 0}
    assert not pf.equations.rules


def test_equations_only():
    pf = parse_problem("(VAR x y)(RULES)(EQUATIONS f(x,y) == f(y,x))")
    assert not pf.trs.rules
    assert len(pf.equations.rules) == 2  # symmetric closure


def test_declared_signature_and_comments():
    text = """; a comment
(VAR x)
(SIG (g 1) (a 0) (b 0))
(RULES
  g(x) -> a ; trailing
)
"""
    pf = parse_problem(text)
    assert [s.name for s in pf.signature] == ["g", "a", "b"]


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("(VAR x)(RULES f(x -> x)", 1, 19),
        ("(VAR x)\n(RULES a -> )", 2, 13),
        ("(VAR x)(RULES f(a) -> f(a,a))", 1, 23),
        ("(VAR x)(RULES a -> b)(START f(x)", 1, 33),
        ("(VAR x)(RULES a -> b) $", 1, 23),
    ],
)
def test_parse_errors(text, line, col):
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert (info.value.line, info.value.col) == (line, col)


def test_semantic_errors():
    with pytest.raises(NotPermutative):
        parse_problem("(VAR x y)(RULES)(EQUATIONS f(x,y) == g(x))")
    with pytest.raises(ReservedName):
        parse_problem("(VAR x)(RULES #k -> a)")
    assert parse_problem("(VAR x)(RULES #k -> a)", allow_reserved=True).trs.rules
    with pytest.raises(ValueError):
        parse_problem("(VAR x y)(RULES f(x) -> y)")  # fresh variable on the right


def _random_problem(seed):
    rng = random.Random(seed)
    sig = random_signature(rng, max_arity=3)
    R = random_right_flat_trs(rng, sig) if rng.random() < 0.5 else random_shallow_trs(rng, sig)
    E = random_permutative(rng, sig)
    start = random_term(rng, sig, 2) if rng.random() < 0.5 else None
    return make_problem(R, E, start)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip(seed):
    pf = _random_problem(seed)
    text = format_problem(pf)
    back = parse_problem(text)
    assert back.trs.rules == pf.trs.rules
    assert back.equations.rules == pf.equations.rules
    assert back.start == pf.start
    assert format_problem(back) == text
