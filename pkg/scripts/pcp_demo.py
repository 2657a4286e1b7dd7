"""Encode a PCP instance and decide termination from a candidate solution term."""

import argparse

from termite.explore import decide_from_term
from termite.generators import PcpInstance, gen_pcp_trs, pcp_brute_solve, pcp_witness_term
from termite.trs import validate_equations


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", default="aa:a,b:aba")
    ap.add_argument("--indices", default="1,2,1")
    ap.add_argument("--budget", type=int, default=200_000)
    args = ap.parse_args()
    inst = PcpInstance.parse(args.pairs)
    idx = [int(i) for i in args.indices.split(",")]
    R = gen_pcp_trs(inst)
    print(f"{inst.n} pairs, {len(R.rules)} rules; {idx} is a solution: {inst.is_solution(idx)}")
    print(f"brute force up to length 6: {pcp_brute_solve(inst, 6)}")
    s = pcp_witness_term(inst, idx)
    v = decide_from_term(R, validate_equations([], R.signature), s, budget=args.budget)
    print(f"from {s}: {v.result}")
    if v.witness is not None:
        print(f"  {v.witness.kind}, loop of {len(v.witness.loop)} classes")


if __name__ == "__main__":
    main()
