"""Independent reference computations used by the tests.

Nothing here calls the code under test for the value being checked; helpers
only load programs or phrase a finite input domain as solver constraints.
"""
from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path

from pathforge.frontend import parse_unit
from pathforge.interpreter import Domain
from pathforge.translator import len_name, sym_name
from pathforge.typeinfer import BOOL, FLOAT, INT, ListOf


def floor_div(a: int, b: int) -> int:
    return math.floor(Fraction(a, b))


def floor_mod(a: int, b: int) -> int:
    return a - b * floor_div(a, b)


def corpus_functions(corpus_dir: Path):
    from pathforge.typeinfer import infer_types

    for path in sorted(corpus_dir.glob("*.py")):
        for fn in parse_unit(path.read_text(), str(path)).functions:
            yield path, fn, infer_types(fn)


def _in_range(t, lo, hi):
    return ("and", ("<=", lo, t), ("<=", t, hi))


def _on_grid(t, grid):
    return ("or",) + tuple(("=", t, Fraction(g)) for g in grid)


def domain_terms(env, domain: Domain = Domain()) -> tuple:
    """Constraints confining version-0 parameter symbols to ``domain``."""
    out = []
    for p in env.params:
        t = env[p]
        if isinstance(t, ListOf):
            arr, length = sym_name(p, 0), len_name(p, 0)
            out.append(("<=", length, domain.list_len_max))
            for i in range(domain.list_len_max):
                elem = ("select", arr, i)
                if t.elem is INT:
                    cond = _in_range(elem, *domain.elem_range)
                elif t.elem is FLOAT:
                    cond = _on_grid(elem, domain.float_grid)
                else:
                    continue
                out.append(("=>", ("<", i, length), cond))
        elif t is INT:
            out.append(_in_range(sym_name(p, 0), *domain.int_range))
        elif t is FLOAT:
            out.append(_on_grid(sym_name(p, 0), domain.float_grid))
        elif t is BOOL:
            continue
    return tuple(out)


