"""Run configuration for the decision procedures and the dispatch that uses it."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .decide import decide_innermost_shallow, decide_plain_rsrl
from .explore import DEFAULT_BUDGET, Verdict, decide_from_term
from .problem import ProblemFile
from .terms import Term, is_ground
from .transform import FLAT, INNERMOST_MODE, PLAIN_MODE, RIGHT_FLAT, map_start, preprocess
from .trs import classify


class UnsupportedProblem(ValueError):
    pass


@dataclass
class DecideConfig:
    mode: str = PLAIN_MODE
    budget: int = DEFAULT_BUDGET
    engine: str = "auto"  # "auto", "bfs" or "compose"
    collapse: bool = False
    prune: bool = True
    auto_flatten: bool = False
    pumping: bool = False

    def __post_init__(self):
        if self.mode not in (PLAIN_MODE, INNERMOST_MODE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.engine not in ("auto", "bfs", "compose"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.budget < 1:
            raise ValueError("budget must be positive")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Outcome:
    verdict: Verdict
    procedure: str
    start: Term | None
    preprocess_args: dict | None


def run_decide(pf: ProblemFile, cfg: DecideConfig, start: Term | None = None) -> Outcome:
    """Pick the procedure for a problem: from a start term if one is given, else a global one."""
    R, E, mode = pf.trs, pf.equations, cfg.mode
    start = start if start is not None else pf.start
    if start is not None:
        if not is_ground(start):
            raise UnsupportedProblem("start terms must be ground")
        if cfg.auto_flatten and not classify(R).right_flat:
            R2, E2, trace = preprocess(R, E, mode, RIGHT_FLAT, cfg.collapse)
            if not classify(R2).right_flat:
                raise UnsupportedProblem("flattening leaves non-ground subterms below right-hand side roots")
            v = decide_from_term(R2, E2, map_start(start, trace), mode, cfg.budget, cfg.engine)
            v.trace, v.system = trace, (R2, E2)
            return Outcome(v, "from-term", start, {"mode": mode, "target": RIGHT_FLAT, "collapse": cfg.collapse})
        if not classify(R).right_flat:
            raise UnsupportedProblem("system is not right-flat; pass --auto-flatten to flatten right-hand sides first")
        return Outcome(decide_from_term(R, E, start, mode, cfg.budget, cfg.engine), "from-term", start, None)
    rep = classify(R)
    if mode == INNERMOST_MODE and rep.shallow:
        v = decide_innermost_shallow(R, E, cfg.budget, cfg.collapse, cfg.prune)
        return Outcome(v, "innermost-shallow", None, {"mode": mode, "target": FLAT, "collapse": cfg.collapse})
    if mode == PLAIN_MODE and rep.right_shallow and rep.right_linear:
        v = decide_plain_rsrl(R, E, cfg.budget, cfg.collapse, cfg.prune)
        return Outcome(v, "plain-rsrl", None, {"mode": mode, "target": RIGHT_FLAT, "collapse": cfg.collapse})
    need = "shallow" if mode == INNERMOST_MODE else "right-shallow and right-linear"
    flags = ", ".join(k for k, v in rep.as_dict().items() if v) or "none"
    raise UnsupportedProblem(f"no decision procedure for {mode} mode: system must be {need} (classes: {flags})")
