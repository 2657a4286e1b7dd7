import random

import pytest

from strategies import random_right_flat_trs, random_signature, random_term
from termite.generators import PcpInstance, gen_pcp_trs
from termite.problem import parse_rules, parse_term
from termite.terms import iter_positions, match, variable_list, replace_at, apply_subst, subterm_at
from termite.trs import (
    NotPermutative,
    Trs,
    UnboundRhsVariable,
    InvalidRule,
    apply_step,
    check_step,
    classify,
    rewrite_once,
    validate_equations,
)

TOYAMA = Trs.from_rules(parse_rules("f(0,1,x)->f(x,x,x); c->0; c->1"))


def test_classify_toyama():
    rep = classify(TOYAMA)
    assert rep.flat and rep.shallow and not rep.right_linear


def test_classify_collapsing():
    assert classify(parse_rules("f(x,y)->x")).collapsing


def test_classify_pcp_generator_rule_by_rule():
    R = gen_pcp_trs(PcpInstance.parse("aa:a,b:aba"))
    rep = classify(R)
    assert rep.right_flat and rep.shallow and not rep.right_linear
    assert all(r.rhs.height <= 1 for r in R.rules)
    assert any(len(set(variable_list(r.rhs))) < len(variable_list(r.rhs)) for r in R.rules)


def test_rule_validation():
    with pytest.raises(UnboundRhsVariable):
        parse_rules("f(x)->g(y)", ("x", "y"))
    with pytest.raises(InvalidRule):
        parse_rules("x->a")


def test_permutative_validation():
    E = validate_equations(parse_rules("f(x,y)->f(y,x)"))
    assert [str(r) for r in E.rules] == ["f(x,y) -> f(y,x)", "f(y,x) -> f(x,y)"]
    with pytest.raises(NotPermutative):
        validate_equations(parse_rules("f(x,y)->f(x,x)"))
    E2 = validate_equations(parse_rules("f(x,y)->g(y,x)"))
    assert len(E2.rules) == 2
    assert validate_equations(E.rules).rules == E.rules


def test_rewrite_once_toyama():
    steps = rewrite_once(parse_term("f(0,1,c)"), TOYAMA.rules)
    assert [(s.rule_index, s.position) for s in steps] == [(0, ()), (1, (3,)), (2, (3,))]
    assert str(steps[0].target) == "f(c,c,c)"
    assert rewrite_once(parse_term("f(0,0,0)"), TOYAMA.rules) == []


def _brute_count(t, rules):
    n = 0
    for p, _ in iter_positions(t):
        for r in rules:
            if match(r.lhs, subterm_at(t, p)) is not None:
                n += 1
    return n


def test_step_count_matches_brute_force():
    rng = random.Random(7)
    for _ in range(100):
        sig = random_signature(rng)
        R = random_right_flat_trs(rng, sig)
        t = random_term(rng, sig, 2)
        steps = rewrite_once(t, R.rules)
        assert len(steps) == _brute_count(t, R.rules)
        keys = [(s.position, s.rule_index) for s in steps]
        assert keys == sorted(keys)
        for s in steps:
            assert check_step(s, R.rules)
            assert s.target == replace_at(t, s.position, apply_subst(s.substitution, R.rules[s.rule_index].rhs))


def test_apply_step_rejects_bad_substitution():
    r = TOYAMA.rules[0]
    t = parse_term("f(0,1,c)")
    assert apply_step(t, r, (), {"x": parse_term("c")}) == parse_term("f(c,c,c)")
    assert apply_step(t, r, (), {"x": parse_term("0")}) is None
    assert apply_step(t, r, (), {"x": parse_term("c"), "y": parse_term("c")}) is None
    assert apply_step(t, r, (1,), {"x": parse_term("c")}) is None


def test_classify_monotone():
    rng = random.Random(3)
    for _ in range(50):
        sig = random_signature(rng)
        R = random_right_flat_trs(rng, sig)
        extra = random_right_flat_trs(rng, sig, n_rules=1, lhs_depth=3)
        a, b = classify(R).as_dict(), classify(R.rules + extra.rules).as_dict()
        for k in a:
            if k == "collapsing":
                assert b[k] >= a[k]
            else:
                assert b[k] <= a[k]
