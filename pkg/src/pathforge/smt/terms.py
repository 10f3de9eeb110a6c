"""Solver-agnostic terms and their SMT-LIB text form.

A term is one of

* ``str`` - a symbol,
* ``bool`` / ``int`` / :class:`fractions.Fraction` - a literal,
* ``tuple`` ``(op, *args)`` - an application; ``("const", sort, value)`` is a
  constant array and ``("as-array", name)`` references a model function.

Sorts are ``"Int"``, ``"Real"``, ``"Bool"`` or ``("Array", index, elem)``.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

Sort = Union[str, tuple]
Term = Union[str, bool, int, Fraction, tuple]

INT, REAL, BOOL = "Int", "Real", "Bool"


def array_sort(elem: Sort) -> tuple:
    return ("Array", INT, elem)


def is_array(sort: Sort) -> bool:
    return isinstance(sort, tuple) and sort[0] == "Array"


class SexprError(ValueError):
    pass


# -- rendering ---------------------------------------------------------------


def render_sort(sort: Sort) -> str:
    if isinstance(sort, tuple):
        return "(" + " ".join(render_sort(s) for s in sort) + ")"
    return sort


def _render_rational(q: Fraction) -> str:
    if q < 0:
        return f"(- {_render_rational(-q)})"
    if q.denominator == 1:
        return f"{q.numerator}.0"
    return f"(/ {q.numerator}.0 {q.denominator}.0)"


def render(t: Term) -> str:
    if isinstance(t, bool):
        return "true" if t else "false"
    if isinstance(t, int):
        return str(t) if t >= 0 else f"(- {-t})"
    if isinstance(t, Fraction):
        return _render_rational(t)
    if isinstance(t, str):
        return t
    if isinstance(t, tuple):
        op = t[0]
        if op == "const":
            return f"((as const {render_sort(t[1])}) {render(t[2])})"
        if op == "as-array":
            return f"(_ as-array {t[1]})"
        return "(" + " ".join([op] + [render(a) for a in t[1:]]) + ")"
    raise TypeError(f"not a term: {t!r}")


# -- reading -----------------------------------------------------------------

_TOKEN = re.compile(r"""\s+|;[^\n]*|(?P<tok>\(|\)|"(?:[^"]|"")*"|\|[^|]*\||[^\s()";|]+)""")


def tokenize(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SexprError(f"unexpected character {text[pos]!r} at offset {pos}")
        if m.group("tok") is not None:
            out.append(m.group("tok"))
        pos = m.end()
    return out


def parse_sexprs(text: str) -> list:
    """Parse every s-expression in ``text`` into nested Python lists of atoms."""
    stack: list[list] = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SexprError("unbalanced '('")
    return stack[0]


def show(sx) -> str:
    if isinstance(sx, list):
        return "(" + " ".join(show(x) for x in sx) + ")"
    return sx


_NUMERAL = re.compile(r"^\d+$")
_DECIMAL = re.compile(r"^\d+\.\d*$")


def to_sort(sx) -> Sort:
    if isinstance(sx, list):
        return tuple(to_sort(x) for x in sx)
    return sx


def to_term(sx) -> Term:
    """Convert a parsed s-expression into a term."""
    if isinstance(sx, str):
        if _NUMERAL.match(sx):
            return int(sx)
        if _DECIMAL.match(sx):
            return Fraction(sx)
        if sx == "true":
            return True
        if sx == "false":
            return False
        if sx.startswith("|") and sx.endswith("|"):
            return sx[1:-1]
        return sx
    if not sx:
        raise SexprError("empty application")
    head = sx[0]
    if isinstance(head, list):
        if len(head) == 3 and head[0] == "as" and head[1] == "const" and len(sx) == 2:
            return ("const", to_sort(head[2]), to_term(sx[1]))
        raise SexprError(f"unsupported application head {show(head)}")
    if head == "_" and len(sx) == 3 and sx[1] == "as-array":
        return ("as-array", sx[2])
    if head == "let":
        binds = tuple((b[0], to_term(b[1])) for b in sx[1])
        return ("let", binds, to_term(sx[2]))
    if head == "lambda":
        params = tuple((p[0], to_sort(p[1])) for p in sx[1])
        return ("lambda", params, to_term(sx[2]))
    if head == "-" and len(sx) == 2:
        inner = to_term(sx[1])
        if isinstance(inner, (int, Fraction)) and not isinstance(inner, bool):
            return -inner
        return ("-", inner)
    if head == "/" and len(sx) == 3:
        a, b = to_term(sx[1]), to_term(sx[2])
        if _is_number(a) and _is_number(b) and b != 0:
            return Fraction(a) / Fraction(b)
        return ("/", a, b)
    return (head,) + tuple(to_term(x) for x in sx[1:])


def _is_number(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def symbols_in(t: Term) -> set[str]:
    """Free symbols of ``t`` (operators and bound names excluded)."""
    out: set[str] = set()

    def walk(x, bound):
        if isinstance(x, str):
            if x not in bound:
                out.add(x)
        elif isinstance(x, tuple):
            op = x[0]
            if op == "const":
                walk(x[2], bound)
            elif op == "as-array":
                return
            elif op == "let":
                for _, v in x[1]:
                    walk(v, bound)
                walk(x[2], bound | {name for name, _ in x[1]})
            elif op == "lambda":
                walk(x[2], bound | {name for name, _ in x[1]})
            else:
                for a in x[1:]:
                    walk(a, bound)

    walk(t, frozenset())
    return out
