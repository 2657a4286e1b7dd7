"""Random automata intersections: compare the termination verdict with product emptiness."""

import argparse
import random
import time

from termite.decide import decide_plain_rsrl
from termite.generators import AutomatonSpec, gen_intersection_trs, product_empty
from termite.trs import validate_equations


def random_automaton(rng, max_states):
    states = [f"q{i}" for i in range(rng.randint(1, max_states))]
    finals = [q for q in states if rng.random() < 0.4] or [rng.choice(states)]
    trans = [(q, x, p) for q in states for x in "ab" for p in states if rng.random() < 0.3]
    return AutomatonSpec(states, states[0], finals, trans)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=20)
    ap.add_argument("--states", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    agree = 0
    for i in range(args.n):
        autos = [random_automaton(rng, args.states) for _ in range(rng.randint(1, 3))]
        R = gen_intersection_trs(autos, pad_single=True)
        t0 = time.perf_counter()
        v = decide_plain_rsrl(R, validate_equations([], R.signature))
        empty = product_empty(autos)
        ok = v.unknown or v.nonterminating == (not empty)
        agree += ok
        print(f"{i:3d} k={len(autos)} rules={len(R.rules):4d} {v.result:15s} empty={empty!s:5s} "
              f"{time.perf_counter() - t0:6.2f}s {'ok' if ok else 'MISMATCH'}")
    print(f"{agree}/{args.n} consistent")


if __name__ == "__main__":
    main()
