"""Stable-model semantics for normal logic programs on a relational,
interleaving-search resolution engine."""

from .complement import CompiledProgram, compile_program
from .program import Literal, Program, ProgramError, Rule, parse_body, parse_program
from .solver import Answer, enumerate_models, solve
from .stream import Budget, BudgetExceeded, DEFAULT_BUDGET
from .terms import Struct, Var, render, unify
from .verifier import brute_force_models, ground_program, verify_stable

__all__ = [
    "Answer",
    "Budget",
    "BudgetExceeded",
    "CompiledProgram",
    "DEFAULT_BUDGET",
    "Literal",
    "Program",
    "ProgramError",
    "Rule",
    "Struct",
    "Var",
    "brute_force_models",
    "compile_program",
    "enumerate_models",
    "ground_program",
    "parse_body",
    "parse_program",
    "render",
    "solve",
    "unify",
    "verify_stable",
]
