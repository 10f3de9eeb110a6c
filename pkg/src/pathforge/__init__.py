"""Symbolic execution for a small, statically analyzable Python subset.

Paths through a function become SMT-LIB array-theory scripts, an external
solver finds inputs, and a built-in interpreter checks that each input really
follows its path.
"""
from .cfg_path import Bounds, ExecutionPath, build_cfg, enumerate_paths
from .frontend import parse_function, parse_unit
from .interpreter import path_verdict, run
from .smt import SolverConfig, solve
from .testcase import TestInput, decode_model
from .translator import translate_path
from .typeinfer import infer_types

__version__ = "0.1.0"

__all__ = [
    "Bounds", "ExecutionPath", "SolverConfig", "TestInput", "build_cfg", "decode_model",
    "enumerate_paths", "infer_types", "parse_function", "parse_unit", "path_verdict", "run",
    "solve", "translate_path",
]
