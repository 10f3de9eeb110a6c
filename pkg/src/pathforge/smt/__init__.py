from .backend import (
    Sat, SolverConfig, SolverFailure, SolverVerdict, Unknown, Unsat, solve, solve_text, solver_available,
)
from .model import ArrayVal, Model, ModelParseError, Value, default_value, eval_model, eval_term, parse_model
from .script import Assertion, SmtScript, SmtSymbol, emit_smtlib
from .terms import BOOL, INT, REAL, array_sort, is_array, parse_sexprs, render, render_sort, to_term

__all__ = [
    "ArrayVal", "Assertion", "BOOL", "INT", "Model", "ModelParseError", "REAL", "Sat", "SmtScript",
    "SmtSymbol", "SolverConfig", "SolverFailure", "SolverVerdict", "Unknown", "Unsat", "Value",
    "array_sort", "default_value", "emit_smtlib", "eval_model", "eval_term", "is_array",
    "parse_model", "parse_sexprs", "render", "render_sort", "solve", "solve_text",
    "solver_available", "to_term",
]
