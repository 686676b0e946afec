"""Synthesize number-theory programs from predicate-calculus specs by backward proof search."""

from .calculus import AXIOMS, Derivation, Judgment, eval_derivation, replay_check
from .programs import Program, parse_program, render, simplify_cr1
from .runtime import check_judgment, oracle_decide, oracle_list, run
from .search import SearchConfig, SearchExhausted, TheoremStore, bootstrap_theorems, synthesize
from .specs import SpecKind, classify, parse_spec, render_spec

__all__ = [
    "AXIOMS",
    "Derivation",
    "Judgment",
    "Program",
    "SearchConfig",
    "SearchExhausted",
    "SpecKind",
    "TheoremStore",
    "bootstrap_theorems",
    "check_judgment",
    "classify",
    "eval_derivation",
    "oracle_decide",
    "oracle_list",
    "parse_program",
    "parse_spec",
    "render",
    "render_spec",
    "replay_check",
    "run",
    "simplify_cr1",
    "synthesize",
]
