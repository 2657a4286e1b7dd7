"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import json
import random
import time

from conftest import record
from mutants import KINDS, mutate
from oracles import NONTERM, TERM, naive_decide
from strategies import (
    random_automaton,
    random_derivation,
    random_permutative,
    random_right_flat_trs,
    random_shallow_trs,
    random_signature,
    random_term,
)
from termite.decide import constant_reachable_set, decide_innermost_shallow, decide_plain_rsrl, measure_norm
from termite.explore import CYCLE, check_witness, decide_from_term, full_signature, height_bound
from termite.generators import (
    PcpInstance,
    gen_intersection_trs,
    pcp_witness_term,
    product_empty,
    gen_pcp_trs,
)
from termite.marking import FAIL, PASS, NotFound, build_marking, check_marking_lemmas, extract_pumping, verify_certificate
from termite.modulo import canonical
from termite.problem import format_problem, make_problem, parse_problem, parse_rules, parse_term
from termite.report import check_report, emit_report
from termite.transform import (
    FLAT,
    INNERMOST_MODE,
    PLAIN_MODE,
    collapse_signature,
    collapse_term,
    expand_fresh,
    flatten_lhs,
    flatten_rhs,
    preprocess,
)
from termite.trs import EQUATIONAL, PLAIN, Trs, rewrite_once, validate_equations

T = parse_term


def _sys(text, eqs=""):
    R = Trs.from_rules(parse_rules(text))
    E = validate_equations(parse_rules(eqs) if eqs else [], R.signature)
    sig = R.signature.extended(E.signature.symbols)
    return R.with_signature(sig), E.with_signature(sig)


# ---- 1. Toyama pair ------------------------------------------------------------


def test_toyama_pair():
    t0 = time.perf_counter()
    R, E = _sys("f(0,1,x)->f(x,x,x); c->0; c->1")
    inner = decide_innermost_shallow(R, E)
    v = decide_from_term(R, E, T("f(0,1,c)"))
    secs = time.perf_counter() - t0
    w = v.witness
    ok = (
        inner.terminating
        and v.nonterminating
        and w.kind == CYCLE
        and len(w.loop) == 3
        and check_witness(w, R, E)
        and secs < 1.0
    )
    detail = f"innermost {inner.result}, from f(0,1,c) {v.result} with loop of {len(w.loop) if w else 0} classes, {secs:.3f}s"
    assert record("toyama", ok, detail)


# ---- 2. height bound ----------------------------------------------------------


def test_height_bound():
    rng = random.Random(2024)
    n = violations = term = over = cycles = certs = notfound = unknown = 0
    while n < 200:
        sig = random_signature(rng, max_arity=3)
        R = random_right_flat_trs(rng, sig)
        E = random_permutative(rng, sig)
        s = random_term(rng, sig, 2)
        n += 1
        v = decide_from_term(R, E, s, budget=20_000, engine="bfs")
        if v.unknown:
            unknown += 1
        elif v.terminating:
            term += 1
            if v.stats["max_height"] > v.stats["bound"]:
                violations += 1
        elif v.witness.kind == CYCLE:
            cycles += 1
        else:
            over += 1
            try:
                cert = extract_pumping(v.witness, R, E, budget=20_000)
            except NotFound:
                notfound += 1
                continue
            if verify_certificate(cert, R, E):
                certs += 1
            else:
                violations += 1
    ok = violations == 0 and certs + notfound == over and term > 0 and over > 0
    detail = (
        f"{n} systems: {term} terminating within bound, {cycles} cycles, {over} overflows "
        f"({certs} verified certificates, {notfound} NotFound), {unknown} unknown, {violations} violations"
    )
    assert record("height bound", ok, detail)


# ---- 3. marking lemmas ------------------------------------------------------------


EXAMPLE = ["g(a,b)", "g(f(c),b)", "g(f(c),f(c))", "f(f(c))"]


def _example_marking():
    R, E = _sys("a->f(c); b->f(c); g(x,x)->f(x)")
    terms = [T(x) for x in EXAMPLE]
    d = [next(st for st in rewrite_once(s, R.rules) if st.target == t) for s, t in zip(terms, terms[1:])]
    M = build_marking(d, R, E)
    return M, check_marking_lemmas(M, R, E)


def test_marking_lemmas():
    M, rep = _example_marking()
    example = (M[3][()], M[3][(1,)], M[3][(1, 1)]) == (T("g(a,b)"), T("a"), T("c")) and rep.ok
    rng = random.Random(77)
    n = steps = hard = fails = unconfirmed = 0
    while n < 500:
        sig = random_signature(rng, max_arity=3)
        R = random_right_flat_trs(rng, sig)
        E = random_permutative(rng, sig)
        s = random_term(rng, sig, rng.randint(0, 2))
        d = random_derivation(rng, R, s, rng.randint(1, 10), E)
        if not d:
            continue
        n += 1
        steps += len(d)
        M = build_marking(d, R, E, start=s)
        rep = check_marking_lemmas(M, R, E, reach_budget=500)
        if rep.reach0 != PASS or rep.creach2 != PASS:
            hard += 1
        if FAIL in (rep.reach1, rep.creach1):
            fails += 1
        if rep.reach1 != PASS or rep.creach1 != PASS:
            unconfirmed += 1
    ok = example and hard == 0 and fails == 0
    detail = (
        f"example M4 = (g(a,b), a, c): {example}; {n} derivations, {steps} steps: "
        f"{hard} reach0/creach2 failures, {fails} reach1/creach1 failures, {unconfirmed} unconfirmed"
    )
    assert record("marking lemmas", ok, detail)


# ---- 4. flattening simulations ---------------------------------------------------------


def _reaches_plus(R, s, t, keep, cap=5000):
    """t is reachable from s in one or more steps through terms satisfying ``keep``."""
    seen = set()
    frontier = [s]
    while frontier and len(seen) < cap:
        nxt = []
        for u in frontier:
            for st in rewrite_once(u, R.rules):
                if st.target == t:
                    return True
                if st.target not in seen and keep(st.target):
                    seen.add(st.target)
                    nxt.append(st.target)
        frontier = nxt
    return False


def _step_sample(rng, R, sig, depth=3):
    """One random R-step from a random term, or None."""
    for _ in range(20):
        s = random_term(rng, sig, depth)
        steps = rewrite_once(s, R.rules)
        if steps:
            return rng.choice(steps)
    return None


def test_flattening_simulations():
    rng = random.Random(303)
    counts = {"T-bijection R": 0, "T-bijection E": 0, "step-a (i)": 0, "step-a (ii)": 0, "step-b (i)": 0, "step-b (ii)": 0}
    bad = 0
    while min(counts.values()) < 200:
        sig = random_signature(rng, max_arity=3)
        R = random_shallow_trs(rng, sig)
        E = random_permutative(rng, sig)
        # collapse T: steps correspond one to one, for R and for E
        TR, TE, trace = collapse_signature(R, E)
        m = trace.result_signature.arity("#f")
        s = random_term(rng, sig, 3)
        for name, rules, trules in (("T-bijection R", R.rules, TR.rules), ("T-bijection E", E.rules, TE.rules)):
            want = {collapse_term(st.target, m) for st in rewrite_once(s, rules)}
            got = {st.target for st in rewrite_once(collapse_term(s, m), trules)}
            counts[name] += len(want)
            bad += want != got
        for name, flatten in (("step-a", flatten_lhs), ("step-b", flatten_rhs)):
            R2, tr = flatten(R)
            # (i) an original step is simulated by one or more new steps
            st = _step_sample(rng, R, sig)
            if st is not None and st.target != st.source:
                counts[name + " (i)"] += 1
                # simulating steps only fold or unfold fresh constants around s and t
                ends = {st.source, st.target}
                bad += not _reaches_plus(R2, st.source, st.target, lambda u: expand_fresh(u, tr) in ends)
            # (ii) a new step maps back to zero or one original steps
            st = _step_sample(rng, R2, R2.signature)
            if st is not None:
                counts[name + " (ii)"] += 1
                a, b = expand_fresh(st.source, tr), expand_fresh(st.target, tr)
                bad += not (a == b or b in {x.target for x in rewrite_once(a, R.rules)})
    agree = decided = 0
    for _ in range(30):
        sig = random_signature(rng)
        R = random_shallow_trs(rng, sig)
        E = random_permutative(rng, sig)
        a = decide_innermost_shallow(R, E, budget=3000)
        R2, E2, _ = preprocess(R, E, INNERMOST_MODE, FLAT)
        b = decide_innermost_shallow(R2, E2, budget=3000)
        if a.unknown or b.unknown:
            continue
        decided += 1
        agree += a.result == b.result
    ok = bad == 0 and agree == decided and decided >= 25
    detail = ", ".join(f"{k} {v}" for k, v in counts.items()) + f" steps; {bad} violations; pre-flattened verdicts agree on {agree}/{decided} decided of 30"
    assert record("flattening simulations", ok, detail)


# ---- 5. automata intersection reduction ---------------------------------------------------


def test_automata_reduction():
    rng = random.Random(606)
    n = agree = unknown = 0
    slowest = 0.0
    for _ in range(30):
        autos = [random_automaton(rng, 3) for _ in range(rng.randint(1, 3))]
        R = gen_intersection_trs(autos, pad_single=True)
        t0 = time.perf_counter()
        v = decide_plain_rsrl(R, validate_equations([], R.signature))
        secs = time.perf_counter() - t0
        slowest = max(slowest, secs)
        n += 1
        if v.unknown:
            unknown += 1
            continue
        agree += v.nonterminating == (not product_empty(autos))
    ok = agree == n - unknown and unknown <= n // 10 and slowest < 30
    detail = f"{agree}/{n - unknown} decided instances agree with product emptiness, {unknown} budget-exceeded, slowest {slowest:.2f}s"
    assert record("automata reduction", ok, detail)


# ---- 6. PCP reduction spot-check ------------------------------------------------------


def test_pcp_spot_check():
    inst = PcpInstance.parse("aa:a,b:aba")
    R = gen_pcp_trs(inst)
    E = validate_equations([], R.signature)
    s = pcp_witness_term(inst, [1, 2, 1])
    v = decide_from_term(R, E, s)
    w = v.witness
    solvable = (
        v.nonterminating
        and w.kind == CYCLE
        and canonical(w.loop_start, E) == canonical(s, E)
        and w.loop[-1].target == s
        and check_witness(w, R, E)
    )
    bad = PcpInstance.parse("a:b")
    Rb = gen_pcp_trs(bad)
    Eb = validate_equations([], Rb.signature)
    starts = [[1], [1, 1]]
    verdicts = [decide_from_term(Rb, Eb, pcp_witness_term(bad, seq)).result for seq in starts]
    ok = solvable and all(x == "terminating" for x in verdicts)
    detail = (
        f"<aa,a>,<b,aba> from 1,2,1: {v.result}, loop of {len(w.loop)} classes back to the start: {solvable}; "
        f"<a,b> from {len(starts)} starts: {', '.join(verdicts)}"
    )
    assert record("pcp spot-check", ok, detail)


# ---- 7. modulo-E semantics ----------------------------------------------------------------


def test_modulo_semantics():
    R, E0 = _sys("f(a,b)->f(b,a)")
    _, E = _sys("f(a,b)->f(b,a)", "f(x,y)->f(y,x)")
    plain = decide_from_term(R, E0, T("f(a,b)")).result
    comm = decide_from_term(R, E, T("f(a,b)")).result
    rng = random.Random(707)
    n = agree = 0
    kinds = {TERM: 0, NONTERM: 0}
    while n < 50:
        sig = random_signature(rng, max_arity=3)
        Rr = random_right_flat_trs(rng, sig)
        Er = random_permutative(rng, sig)
        if not Er.rules:
            continue
        s = random_term(rng, sig, 2)
        expected = naive_decide(Rr, Er, s, height_bound(s, full_signature(Rr, Er, s)))
        if expected not in (TERM, NONTERM):
            continue
        n += 1
        kinds[expected] += 1
        agree += decide_from_term(Rr, Er, s).result == expected
    ok = plain == "terminating" and comm == "nonterminating" and agree == n
    detail = (
        f"f(a,b)->f(b,a): {plain} with E empty, {comm} with commutativity; "
        f"{agree}/{n} random instances agree with the naive explorer ({kinds[TERM]} terminating, {kinds[NONTERM]} not)"
    )
    assert record("modulo-E semantics", ok, detail)


# ---- 8. measure monotonicity ------------------------------------------------------


def test_measure_monotonicity():
    rng = random.Random(808)
    n = violations = systems = strict = 0
    while n < 100:
        sig = random_signature(rng, max_arity=3)
        R = random_right_flat_trs(rng, sig, linear_rhs=True)
        E = random_permutative(rng, sig)
        reach = constant_reachable_set(R, E, cap=2000)
        if reach.partial:
            continue
        systems += 1
        for _ in range(5):
            s = random_term(rng, sig, 3)
            steps = rewrite_once(s, R.rules, PLAIN) + rewrite_once(s, E.rules, EQUATIONAL)
            if not steps:
                continue
            st = rng.choice(steps)
            a, b = measure_norm(st.source, reach, E), measure_norm(st.target, reach, E)
            n += 1
            violations += a < b
            strict += a > b
    ok = violations == 0
    detail = f"{n} steps over {systems} systems with closed constant-reachable sets: {violations} increases, {strict} strict decreases"
    assert record("measure monotonicity", ok, detail)


# ---- 9. witness integrity ------------------------------------------------------------


def _reports():
    """(problem text, report) pairs for a spread of nonterminating verdicts."""
    out = []

    def add(text, v, start, **kw):
        assert v.nonterminating
        out.append((text, json.loads(emit_report(v, input_text=text, start=start, **kw))))

    for text, start in (
        ("(VAR x)(RULES f(0,1,x) -> f(x,x,x) c -> 0 c -> 1)\n", "f(0,1,c)"),
        ("(VAR x y)(RULES f(a,b) -> f(b,a))(EQUATIONS f(x,y) == f(y,x))\n", "f(a,b)"),
    ):
        pf = parse_problem(text)
        add(text, decide_from_term(pf.trs, pf.equations, T(start)), T(start))
    inst = PcpInstance.parse("aa:a,b:aba")
    R = gen_pcp_trs(inst)
    text = format_problem(make_problem(R))
    s = pcp_witness_term(inst, [1, 2, 1])
    add(text, decide_from_term(R, validate_equations([], R.signature), s), s)
    text = "(VAR x)(RULES c -> f(c,c))\n"
    pf = parse_problem(text)
    v = decide_from_term(pf.trs, pf.equations, T("c"))
    v.witness.pumping = extract_pumping(v.witness, pf.trs, pf.equations)
    add(text, v, T("c"))
    text = "(VAR x)(RULES g(x) -> f(h(a),x) h(a) -> g(b))\n"
    pf = parse_problem(text)
    v = decide_plain_rsrl(pf.trs, pf.equations)
    add(text, v, None, procedure="plain-rsrl", preprocess_args={"mode": PLAIN_MODE, "target": "right-flat", "collapse": False})
    rng = random.Random(909)
    while len(out) < 15:
        sig = random_signature(rng, max_arity=3)
        R = random_right_flat_trs(rng, sig)
        E = random_permutative(rng, sig)
        s = random_term(rng, sig, 2)
        v = decide_from_term(R, E, s, budget=5000)
        if v.nonterminating:
            add(format_problem(make_problem(R, E)), v, s)
    return out


def test_witness_integrity():
    reports = _reports()
    accepted = sum(check_report(text, rep) is None for text, rep in reports)
    rng = random.Random(99)
    mutants = rejected = 0
    for text, rep in reports:
        for kind in KINDS:
            for _ in range(2 if kind != "drop" else 1):
                mutants += 1
                rejected += check_report(text, mutate(rep, kind, rng)) is not None
    ok = accepted == len(reports) and rejected == mutants and mutants >= 50
    detail = f"accepted {accepted}/{len(reports)} emitted reports; rejected {rejected}/{mutants} mutants ({', '.join(KINDS)})"
    assert record("witness integrity", ok, detail)
