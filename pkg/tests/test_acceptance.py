"""Acceptance criteria 1-8, each reported as one PASS/FAIL line in the pytest summary."""
import contextlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import list_encoding_cases
from bridge_cases import solve_path_for, translate_setup
from conftest import CORPUS, FIXTURES, GOLDEN, needs_z3
from oracles import corpus_functions, domain_terms, floor_div
from pathforge.cfg_path import Bounds, ExecutionPath, NodeKind, build_cfg, enumerate_paths
from pathforge.frontend import nodes as n
from pathforge.frontend import parse_function, parse_unit
from pathforge.harness import HarnessConfig, bench
from pathforge.interpreter import (
    Domain, ExecutionPassOnly, ExhaustedNoInput, FoundInput, PathCorrect, Returned, brute_force_many, run,
)
from pathforge.llm_bridge import (
    BridgeConfig, BridgeFailed, FallbackInput, Fragment, TemplateStore, generate_fragment, llm_solve, retrieve,
)
from pathforge.smt import Sat, SolverConfig, Unsat, solve
from pathforge.smt.model import ArrayVal, Model
from pathforge.smt.terms import symbols_in
from pathforge.testcase import decode_model
from pathforge.translator import Translated, init_state, translate_path
from pathforge.typeinfer import ListOf, infer_types

# criterion number -> (title, "PASS" | "FAIL")
RESULTS: dict = {}

Z3 = SolverConfig(("z3",), timeout=30.0)
POOL = 8


@contextlib.contextmanager
def criterion(number, title):
    RESULTS[number] = (title, "FAIL")
    yield
    RESULTS[number] = (title, "PASS")


def solve_all(jobs):
    """Solve ``(script, extra)`` pairs concurrently, keeping order."""
    with ThreadPoolExecutor(POOL) as pool:
        return list(pool.map(lambda j: solve(j[0], Z3, extra=j[1]), jobs))


# -- 1 ---------------------------------------------------------------------------------

LIST_OPS = ("initialize", "length", "indexing", "assignment", "append", "pop", "negative index")


def list_ops_used(fn):
    ops = set()
    env = infer_types(fn)
    if any(isinstance(env[p], ListOf) for p in env.params):
        ops.add("initialize")
    for stmt in n.iter_stmts(fn.body):
        if isinstance(stmt, n.Assign) and isinstance(stmt.target, n.Subscript):
            ops.add("assignment")
        for top in n.child_exprs(stmt):
            for e in n.walk_expr(top):
                if isinstance(e, n.LenCall):
                    ops.add("length")
                elif isinstance(e, n.Subscript):
                    ops.add("indexing")
                    idx = e.index
                    if (isinstance(idx, n.Unary) and idx.op == "neg" and isinstance(idx.operand, n.IntLit)) or \
                            (isinstance(idx, n.IntLit) and idx.value < 0):
                        ops.add("negative index")
                elif isinstance(e, n.AppendCall):
                    ops.add("append")
                elif isinstance(e, n.PopCall):
                    ops.add("pop")
    return ops


@needs_z3
def test_1_rules_pipeline_on_corpus():
    with criterion(1, "end-to-end rules pipeline on the bundled corpus"):
        programs = sorted(CORPUS.glob("*.py"))
        assert len(programs) >= 20
        covered = set()
        for p in programs:
            assert len(p.read_text().splitlines()) <= 25, p.name
            for fn in parse_unit(p.read_text(), str(p)).functions:
                covered |= list_ops_used(fn)
        assert covered == set(LIST_OPS), set(LIST_OPS) - covered
        started = time.monotonic()
        report = bench(HarnessConfig(Bounds(max_steps=20, max_loop_iterations=3), Z3, corpus_dir=CORPUS))
        elapsed = time.monotonic() - started
        assert report.errors == []
        assert report.records
        bad = [r for r in report.records if r.solver != "sat" or r.test != "PathCorrect"]
        assert bad == [], bad[:5]
        assert not any(r.test == "ExecutionPassOnly" for r in report.records)
        assert elapsed < 300, elapsed


# -- 2 ---------------------------------------------------------------------------------


@needs_z3
def test_2_oracle_equivalence():
    with criterion(2, "solver Sat iff brute force finds an input"):
        started = time.monotonic()
        domain = Domain()
        checked, mismatches = 0, []
        for file, fn, env in corpus_functions(CORPUS):
            paths = list(enumerate_paths(build_cfg(fn)))
            found = brute_force_many(fn, paths, env, domain)
            scripts = []
            for p in paths:
                out = translate_path(p, env)
                assert isinstance(out, Translated), (file.name, p.format())
                scripts.append(out.script)
            extra = domain_terms(env, domain)
            free = solve_all([(s, ()) for s in scripts])
            bounded = solve_all([(s, extra) for s in scripts])
            for i, (b, s, sd) in enumerate(zip(found, free, bounded)):
                checked += 1
                ok = (isinstance(s, Sat) and isinstance(sd, Sat)) if isinstance(b, FoundInput) \
                    else isinstance(sd, Unsat)
                if isinstance(s, Unsat) and not isinstance(b, ExhaustedNoInput):
                    ok = False
                if not ok:
                    mismatches.append((file.name, fn.name, i, type(b).__name__, type(s).__name__, type(sd).__name__))
        assert checked > 100
        assert mismatches == []
        assert time.monotonic() - started < 600


# -- 3 ---------------------------------------------------------------------------------

KEY_LINES = {
    "list_initialize": "(assert (>= _n1_0_len 0))",
    "list_length": "(assert (> _n_0_len 5))",
    "list_indexing": "(assert (= (select _lst_0 _i_0) _j_0))",
    "list_assignment": "(assert (= _lst_1 (store _lst_0 _i_0 2)))",
    "list_append": "(assert (= _n_1 (store _n_0 _n_0_len _x_0)))",
    "list_pop": "(assert (> _n_0_len 0))",
    "list_negative_index": "(assert (>= (- 2) (- _lst_0_len)))",
}


def test_3_list_encoding_snapshots():
    with criterion(3, "list encodings match golden SMT-LIB snapshots"):
        assert set(list_encoding_cases.CASES) == set(KEY_LINES)
        for name in list_encoding_cases.CASES:
            emitted = list_encoding_cases.emit_case(name)
            assert emitted == (GOLDEN / "list_encodings" / f"{name}.smt2").read_text(), name
            assert emitted == list_encoding_cases.emit_case(name)
            assert KEY_LINES[name] in emitted.splitlines(), name
        append = list_encoding_cases.emit_case("list_append")
        assert "(assert (= _n_1_len (+ _n_0_len 1)))" in append.splitlines()


# -- 4 ---------------------------------------------------------------------------------


@needs_z3
def test_4_floor_division_differential():
    with criterion(4, "floor division agrees on every pair in range"):
        fn = parse_function("def f(a: int, b: int) -> int:\n    q = a // b\n    return q\n")
        env = infer_types(fn)
        script = translate_path(next(iter(enumerate_paths(build_cfg(fn)))), env).script
        # 17 values of a times 8 nonzero values of b
        pairs = [(a, b) for a in range(-8, 9) for b in range(-4, 5) if b != 0]
        verdicts = solve_all([(script, (("=", "_a_0", a), ("=", "_b_0", b))) for a, b in pairs])
        agree = 0
        for (a, b), v in zip(pairs, verdicts):
            assert isinstance(v, Sat), (a, b, v)
            q = v.model.value("_q_1", "Int")
            if q == floor_div(a, b) and run(fn, [a, b]).outcome == Returned(q):
                agree += 1
        assert agree == len(pairs) == 136


# -- 5 ---------------------------------------------------------------------------------


def test_5_model_decoding():
    with criterion(5, "array models decode to the expected lists"):
        fn = parse_function("def f(xs: List[int]) -> int:\n    return 0\n")
        env = infer_types(fn)
        _, script = init_state(env, fn)
        arr = ArrayVal(0, ((2, 3),))
        assert decode_model(Model({"_xs_0": arr, "_xs_0_len": 4}), env, script).values() == [[0, 0, 3, 0]]
        assert decode_model(Model({"_xs_0": arr, "_xs_0_len": 0}), env, script).values() == [[]]
        beyond = ArrayVal(0, ((2, 3), (9, 7)))
        assert decode_model(Model({"_xs_0": beyond, "_xs_0_len": 3}), env, script).values() == [[0, 0, 3]]


# -- 6 ---------------------------------------------------------------------------------


def test_6_ssa_integrity_scan():
    with criterion(6, "no assertion reads an SSA version ahead of its step"):
        scanned, violations = 0, []
        for file, fn, env in corpus_functions(CORPUS):
            for p in enumerate_paths(build_cfg(fn), Bounds(20, 3)):
                out = translate_path(p, env)
                assert isinstance(out, Translated)
                script = out.script
                names = [d.name for d in script.decls]
                assert len(names) == len(set(names))
                for a in script.asserts:
                    step_env = out.envs[0 if a.origin is None else a.origin]
                    for name in symbols_in(a.term):
                        sym = script.symbol(name)
                        scanned += 1
                        if sym.index > step_env[sym.var]:
                            violations.append((file.name, fn.name, name, a.origin))
        assert scanned > 1000
        assert violations == []


# -- 7 ---------------------------------------------------------------------------------


@needs_z3
def test_7_bridge_replay_suite():
    with criterion(7, "bridge replay scenarios and template self-recall"):
        cfg = BridgeConfig(mode="replay", fixture_dir=FIXTURES / "bridge")
        outcomes = {}
        for name in ("first_try", "refine", "exhaust"):
            _, _, _, out, chunk, ranked = translate_setup(name)
            outcomes[name] = generate_fragment(chunk, dict(out.state.index), out.partial, ranked, cfg,
                                               solver_cfg=Z3)
        assert isinstance(outcomes["first_try"], Fragment) and outcomes["first_try"].attempts == 1
        assert isinstance(outcomes["refine"], Fragment) and outcomes["refine"].attempts == 2
        assert isinstance(outcomes["exhaust"], BridgeFailed) and outcomes["exhaust"].attempts == 3
        src, fn, env, path = solve_path_for("solve_ok")
        good = llm_solve(src, fn, path, env, cfg)
        assert isinstance(good, FallbackInput) and isinstance(good.verdict, PathCorrect)
        src, fn, env, path = solve_path_for("solve_wrong")
        wrong = llm_solve(src, fn, path, env, cfg)
        assert isinstance(wrong, FallbackInput) and isinstance(wrong.verdict, ExecutionPassOnly)
        store = TemplateStore.load()
        recall = sum(retrieve(t.key_chunk, store, 1)[0][0].id == t.id for t in store.templates)
        assert recall == len(store) == 14


# -- 8 ---------------------------------------------------------------------------------

# (file, function, path index, condition step index, the one branch that is reachable)
NEGATION_CASES = [
    ("asteroid_collision.py", "asteroidCollision", 1, 6, False),
    ("climb_stairs.py", "climbStairs", 1, 4, True),
    ("count_above.py", "countAbove", 0, 5, False),
    ("majority_element.py", "majorityElement", 1, 6, True),
    ("max_subarray.py", "maxSubArray", 1, 6, False),
    ("next_greater.py", "nextGreater", 0, 6, False),
    ("pivot_index.py", "pivotIndex", 4, 11, True),
    ("remove_duplicates.py", "removeDuplicates", 1, 5, True),
    ("remove_stars.py", "removeStars", 0, 5, False),
    ("two_sum.py", "twoSum", 9, 11, False),
]


@needs_z3
def test_8_negation_soundness():
    with criterion(8, "flipping a one-sided condition flips the verdict"):
        flipped = 0
        for file, name, pi, si, reachable in NEGATION_CASES:
            unit = parse_unit((CORPUS / file).read_text(), file)
            fn = unit.function(name)
            env = infer_types(fn)
            p = list(enumerate_paths(build_cfg(fn)))[pi]
            step = p.steps[si]
            assert step.kind is NodeKind.CONDITION
            pair = {b: ExecutionPath(p.function, p.steps[:si] + (replace(step, branch_taken=b),), True)
                    for b in (True, False)}
            oracle = dict(zip((True, False), brute_force_many(fn, [pair[True], pair[False]], env)))
            assert isinstance(oracle[reachable], FoundInput), (file, name)
            assert isinstance(oracle[not reachable], ExhaustedNoInput), (file, name)
            sat = solve(translate_path(pair[reachable], env).script, Z3)
            unsat = solve(translate_path(pair[not reachable], env).script, Z3)
            if isinstance(sat, Sat) and isinstance(unsat, Unsat):
                flipped += 1
        assert flipped == len(NEGATION_CASES) == 10
