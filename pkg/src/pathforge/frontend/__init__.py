from .nodes import *  # noqa: F401,F403
from .nodes import FunctionDef, SourceSpan, SourceUnit
from .parser import Diagnostic, ParseError, UnsupportedConstruct, build_unit, parse_function, parse_unit
from .printer import expr_text, function_text, pretty_print, stmt_header
from .validate import validate_subset

__all__ = [
    "Diagnostic", "FunctionDef", "ParseError", "SourceSpan", "SourceUnit",
    "UnsupportedConstruct", "build_unit", "expr_text", "function_text",
    "parse_function", "parse_unit", "pretty_print", "stmt_header", "validate_subset",
]
