"""Toyama's system: innermost terminating, but f(0,1,c) loops under plain rewriting."""

from termite.config import DecideConfig, run_decide
from termite.problem import parse_problem, parse_term

TOYAMA = "(VAR x)(RULES f(0,1,x) -> f(x,x,x) c -> 0 c -> 1)\n"


def main():
    pf = parse_problem(TOYAMA)
    res = run_decide(pf, DecideConfig(mode="innermost"))
    print(f"innermost, all starts: {res.verdict.result}")
    res = run_decide(pf, DecideConfig(), parse_term("f(0,1,c)"))
    v = res.verdict
    print(f"plain, from f(0,1,c): {v.result}")
    for step in v.witness.steps():
        print(f"  {step.source}  ->  {step.target}")


if __name__ == "__main__":
    main()
