import pytest

from termite.config import DecideConfig, UnsupportedProblem, run_decide
from termite.problem import parse_problem, parse_term

TOYAMA = "(VAR x)(RULES f(0,1,x) -> f(x,x,x) c -> 0 c -> 1)\n"


def test_defaults_and_validation():
    cfg = DecideConfig()
    assert cfg.mode == "plain" and cfg.prune and not cfg.collapse
    assert cfg.as_dict()["engine"] == "auto"
    for bad in ({"mode": "outermost"}, {"engine": "dfs"}, {"budget": 0}):
        with pytest.raises(ValueError):
            DecideConfig(**bad)


def test_run_decide_dispatch():
    pf = parse_problem(TOYAMA)
    res = run_decide(pf, DecideConfig(mode="innermost"))
    assert res.procedure == "innermost-shallow" and res.verdict.terminating
    res = run_decide(pf, DecideConfig(), parse_term("f(0,1,c)"))
    assert res.procedure == "from-term" and res.verdict.nonterminating
    with pytest.raises(UnsupportedProblem):
        run_decide(pf, DecideConfig(), parse_term("f(0,1,x)", variables={"x"}))


def test_not_right_flat_needs_flag():
    pf = parse_problem("(RULES a -> g(g(a)))\n")
    with pytest.raises(UnsupportedProblem):
        run_decide(pf, DecideConfig(), parse_term("a"))
    res = run_decide(pf, DecideConfig(auto_flatten=True), parse_term("a"))
    assert res.verdict.nonterminating and res.preprocess_args["target"] == "right-flat"
