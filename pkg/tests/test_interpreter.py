import copy
from typing import List

from hypothesis import given, settings, strategies as st

from conftest import CORPUS
from oracles import floor_div, floor_mod
from pathforge.cfg_path import build_cfg, enumerate_paths
from pathforge.frontend import parse_function
from pathforge.harness import load_program, read_inputs
from pathforge.interpreter import (
    Domain, ExecutionPassOnly, ExhaustedNoInput, Failed, FoundInput, PathCorrect, Raised, Returned,
    brute_force, brute_force_many, path_verdict, run,
)
from pathforge.testcase import TestInput
from pathforge.typeinfer import infer_types

GT3 = "def f(x: int) -> int:\n    if x > 3:\n        return 1\n    return 0\n"


def branch_path(fn, outcome):
    return next(p for p in enumerate_paths(build_cfg(fn))
                if tuple(s.branch_taken for s in p.steps if s.branch_taken is not None) == outcome)


def test_returns_and_traces():
    fn = parse_function(GT3)
    r = run(fn, [5])
    assert r.outcome == Returned(1)
    assert r.lines == [1, 2, 3]
    assert run(fn, [0]).lines == [1, 2, 4]


def test_floor_division_follows_python():
    fn = parse_function("def f(a: int, b: int) -> int:\n    return a // b\n")
    assert run(fn, [7, -2]).outcome == Returned(-4)
    g = parse_function("def f(a: int, b: int) -> int:\n    return a % b\n")
    assert run(g, [7, -2]).outcome == Returned(-1)


@given(st.integers(-50, 50), st.integers(-9, 9).filter(bool))
def test_division_matches_oracle(a, b):
    fn = parse_function("def f(a: int, b: int) -> int:\n    q = a // b\n    return q * 1000 + a % b\n")
    assert run(fn, [a, b]).outcome == Returned(floor_div(a, b) * 1000 + floor_mod(a, b))


def test_runtime_errors_become_outcomes():
    fn = parse_function("def f(xs: List[int]) -> int:\n    y = xs[3]\n    return y\n")
    r = run(fn, [[1]])
    assert r.raised and r.outcome.kind == "IndexError"
    # the raising statement is not in the trace
    assert r.lines == [1]


def test_step_limit():
    fn = parse_function("def f(x: int) -> int:\n    while x > 0:\n        x = x + 1\n    return x\n")
    r = run(fn, [1], max_steps=30)
    assert isinstance(r.outcome, Raised) and r.outcome.kind == "StepLimit"
    assert r.steps_executed == 30


def test_arguments_are_not_mutated():
    fn = parse_function("def f(xs: List[int]) -> int:\n    xs.append(1)\n    return len(xs)\n")
    arg = [1, 2]
    run(fn, [arg])
    assert arg == [1, 2]


def test_brute_force_finds_smallest_in_order():
    fn = parse_function(GT3)
    res = brute_force(fn, branch_path(fn, (True,)), infer_types(fn))
    assert res == FoundInput(TestInput.of(["x"], [4]))


def test_brute_force_exhausts_infeasible_path():
    fn = parse_function("def f(x: int) -> int:\n    if x > 3:\n        if x < 2:\n            return 1\n    return 0\n")
    assert isinstance(brute_force(fn, branch_path(fn, (True, True)), infer_types(fn)), ExhaustedNoInput)


def test_brute_force_respects_length_bound():
    fn = parse_function("def f(n: List[int]) -> int:\n    if len(n) > 5:\n        return 1\n    return 0\n")
    env = infer_types(fn)
    target = branch_path(fn, (True,))
    assert isinstance(brute_force(fn, target, env, Domain(list_len_max=4)), ExhaustedNoInput)
    found = brute_force(fn, target, env, Domain(list_len_max=6, elem_range=(0, 0)))
    assert found == FoundInput(TestInput.of(["n"], [(0,) * 6]))


def test_brute_force_many_agrees_with_single():
    fn = parse_function("def f(a: int, b: int) -> int:\n    if a > b:\n        if a - b > 4:\n"
                        "            return 2\n        return 1\n    return 0\n")
    env = infer_types(fn)
    paths = list(enumerate_paths(build_cfg(fn)))
    assert brute_force_many(fn, paths, env) == [brute_force(fn, p, env) for p in paths]


def test_verdicts():
    fn = parse_function(GT3)
    taken = branch_path(fn, (True,))
    assert path_verdict(fn, [4], taken) == PathCorrect()
    assert path_verdict(fn, [0], taken) == ExecutionPassOnly()
    h = parse_function("def f(xs: List[int]) -> int:\n    if xs[0] > 0:\n        return 1\n    return 0\n")
    assert isinstance(path_verdict(h, [[]], branch_path(h, (True,))), Failed)


def test_truncated_target_is_a_prefix():
    fn = parse_function("def f(x: int) -> int:\n    y = x\n    if y > 3:\n        return 1\n    return 0\n")
    p = branch_path(fn, (True,)).truncate(2)
    assert p.truncated
    assert path_verdict(fn, [0], p) == PathCorrect()
    assert path_verdict(fn, [9], p) == PathCorrect()


def _python_call(source, name, args):
    scope = {"List": List}
    exec(compile(source, "<corpus>", "exec"), scope)
    # corpus programs are either plain functions or methods of a Solution class
    target = scope[name] if name in scope else getattr(scope["Solution"](), name)
    try:
        return ("ok", target(*copy.deepcopy(list(args))))
    except Exception as exc:
        return ("raise", type(exc).__name__)


@settings(deadline=None)
@given(st.data())
def test_interpreter_matches_cpython_on_corpus(data):
    files = sorted(CORPUS.glob("*.py"))
    file = data.draw(st.sampled_from(files))
    unit, envs = load_program(file)
    inputs = read_inputs(file.with_suffix(".inputs"))
    args = data.draw(st.sampled_from(inputs))
    for fn in unit.functions:
        mine = run(fn, list(args), max_steps=100_000).outcome
        theirs = _python_call(unit.source_text, fn.name, args)
        if theirs[0] == "ok":
            assert mine == Returned(theirs[1]), (file.name, args)
        else:
            assert isinstance(mine, Raised) and mine.kind == theirs[1], (file.name, args)


def test_every_corpus_input_matches_cpython():
    checked = 0
    for file in sorted(CORPUS.glob("*.py")):
        unit, _ = load_program(file)
        for args in read_inputs(file.with_suffix(".inputs")):
            for fn in unit.functions:
                mine = run(fn, list(args), max_steps=100_000).outcome
                kind, value = _python_call(unit.source_text, fn.name, args)
                expected = Returned(value) if kind == "ok" else Raised(value)
                assert type(mine) is type(expected), (file.name, args, mine)
                if kind == "ok":
                    assert mine == expected, (file.name, args)
                else:
                    assert mine.kind == value, (file.name, args)
                checked += 1
    assert checked >= 60
