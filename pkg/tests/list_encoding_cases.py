"""The seven list encodings as small functions, one selected path each.

Run this file to rewrite the golden snapshots after a reviewed encoding change.
"""
from pathlib import Path

from pathforge.cfg_path import build_cfg, enumerate_paths
from pathforge.frontend import parse_function
from pathforge.smt import emit_smtlib
from pathforge.translator import translate_path
from pathforge.typeinfer import infer_types

GOLDEN = Path(__file__).parent / "golden" / "list_encodings"

# name -> (source, index into enumerate_paths)
CASES = {
    "list_initialize": ("def func(n1: List[int]) -> int:\n    return 0\n", 0),
    "list_length": ("def f(n: List[int]) -> int:\n    if len(n) > 5:\n        return 1\n    return 0\n", 0),
    "list_indexing": ("def f(lst: List[int], i: int, j: int) -> int:\n    if i >= 0:\n"
                      "        if lst[i] == j:\n            return 1\n    return 0\n", 1),
    "list_assignment": ("def f(lst: List[int], i: int) -> int:\n    if i >= 0:\n        lst[i] = 2\n    return 0\n", 1),
    "list_append": ("def f(n: List[int], x: int) -> int:\n    n.append(x)\n    return 0\n", 0),
    "list_pop": ("def f(n: List[int]) -> int:\n    n.pop()\n    return 0\n", 0),
    "list_negative_index": ("def f(lst: List[int], z: int) -> int:\n    if lst[-2] == z:\n"
                            "        return 1\n    return 0\n", 0),
}


def emit_case(name: str) -> str:
    src, index = CASES[name]
    fn = parse_function(src)
    path = list(enumerate_paths(build_cfg(fn)))[index]
    return emit_smtlib(translate_path(path, infer_types(fn)).script)


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for case in CASES:
        (GOLDEN / f"{case}.smt2").write_text(emit_case(case))
        print(f"wrote {case}.smt2")
