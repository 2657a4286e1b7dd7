"""Deciding termination of right-flat rewrite systems modulo permutative theories."""

from .config import DecideConfig, run_decide
from .decide import decide_innermost_shallow, decide_plain_rsrl
from .explore import NONTERMINATING, TERMINATING, UNKNOWN, Verdict, Witness, check_witness, decide_from_term
from .modulo import canonical, e_class, mod_successors
from .problem import format_problem, parse_problem, parse_rules, parse_term
from .terms import App, Signature, Symbol, Var, const
from .trs import Rule, Trs, classify, validate_equations

__version__ = "0.1.0"

__all__ = [
    "App",
    "DecideConfig",
    "NONTERMINATING",
    "Rule",
    "Signature",
    "Symbol",
    "TERMINATING",
    "Trs",
    "UNKNOWN",
    "Var",
    "Verdict",
    "Witness",
    "canonical",
    "check_witness",
    "classify",
    "const",
    "decide_from_term",
    "decide_innermost_shallow",
    "decide_plain_rsrl",
    "e_class",
    "format_problem",
    "mod_successors",
    "parse_problem",
    "parse_rules",
    "parse_term",
    "run_decide",
    "validate_equations",
]
