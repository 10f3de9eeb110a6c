import json

import pytest

from bridge_cases import (
    MAX_SRC, SOLVE, TRANSLATE, all_requests, solve_path_for, translate_setup,
)
from conftest import FIXTURES, needs_z3
from pathforge.cfg_path import Bounds
from pathforge.harness import HarnessConfig, bench
from pathforge.interpreter import ExecutionPassOnly, PathCorrect
from pathforge.llm_bridge import (
    BridgeConfig, BridgeFailed, FallbackInput, FallbackUnsat, Fragment, FragmentRejected, ReplayTransport,
    Template, TemplateStore, TransportError, extract_json, generate_fragment, llm_solve, parse_fragment,
    request_key, retrieve,
)
from pathforge.smt import SolverConfig

REPLAY_DIR = FIXTURES / "bridge"


def replay_cfg(**kw):
    return BridgeConfig(mode="replay", fixture_dir=REPLAY_DIR, **kw)


# -- retrieval -------------------------------------------------------------------------


def test_store_has_fourteen_valid_templates():
    store = TemplateStore.load()
    assert len(store) == 14
    assert store.get("t13").name == "floor division"


def test_every_template_retrieves_itself_first():
    store = TemplateStore.load()
    hits = sum(retrieve(t.key_chunk, store, 1)[0][0].id == t.id for t in store.templates)
    assert hits == 14


def test_subscript_update_ranks_assignment_above_append():
    store = TemplateStore.load()
    order = [t.id for t, _ in retrieve("expression\ta[j] = a[j] + 1", store, len(store))]
    assert order.index("t04") < order.index("t05")


def test_k_larger_than_store_returns_everything():
    store = TemplateStore.load()
    assert len(retrieve("x", store, 99)) == 14
    with pytest.raises(ValueError):
        retrieve("x", store, 0)


def test_retrieval_is_deterministic():
    store = TemplateStore.load()
    q = "condition\tnums[i] > best ->taken"
    assert retrieve(q, store, 3) == retrieve(q, store, 3)


def test_template_validation():
    bad = Template("x", "bad", "k", {}, "(check-sat)", {})
    with pytest.raises(ValueError, match="unexpected command"):
        TemplateStore([bad])
    shrinking = Template("y", "bad", "k", {"a": 2}, "(assert true)", {"a": 1})
    with pytest.raises(ValueError, match="decreases"):
        TemplateStore([shrinking])
    ok = Template("z", "ok", "k", {}, "(assert true)", {})
    with pytest.raises(ValueError, match="duplicate"):
        TemplateStore([ok, ok])


# -- reply parsing -----------------------------------------------------------------------


def test_extract_json_tolerates_prose():
    assert extract_json('Here you go:\n```json\n{"args": [1]}\n```\nthanks') == {"args": [1]}
    with pytest.raises(FragmentRejected):
        extract_json("no json at all")


def test_parse_fragment_rules():
    decls, asserts = parse_fragment("(declare-const _m_1 Int)\n(assert (> _m_1 0))", {"m": 0}, {"m": 1})
    assert len(decls) == 1 and len(asserts) == 1
    with pytest.raises(FragmentRejected):
        parse_fragment("(check-sat)", {}, {})
    with pytest.raises(FragmentRejected):
        # version 0 is not fresh
        parse_fragment("(declare-const _m_0 Int)", {"m": 0}, {"m": 0})
    with pytest.raises(FragmentRejected):
        # env says m moved but nothing declares _m_1
        parse_fragment("(assert true)", {"m": 0}, {"m": 1})


def test_config_validation():
    with pytest.raises(ValueError):
        BridgeConfig(mode="replay")
    with pytest.raises(ValueError):
        BridgeConfig(k=0)
    assert BridgeConfig(max_refine=0).attempts == 1


# -- replay ------------------------------------------------------------------------------


def test_fixtures_match_scenarios():
    """The checked-in fixtures are exactly what the generator would write."""
    on_disk = {p.stem for p in REPLAY_DIR.glob("*.json")}
    for _, request, replies in all_requests():
        key = request_key(request)
        assert key in on_disk
        data = json.loads((REPLAY_DIR / f"{key}.json").read_text())
        assert data["request"] == request and data["responses"] == replies
    assert len(on_disk) == len(TRANSLATE) + len(SOLVE)


def test_missing_fixture_is_a_transport_error(tmp_path):
    with pytest.raises(TransportError, match="no replay fixture"):
        ReplayTransport(tmp_path).conversation({"task": "nothing"})


@needs_z3
def test_fragment_accepted_first_try(solver_cfg):
    _, _, _, out, chunk, ranked = translate_setup("first_try")
    frag = generate_fragment(chunk, dict(out.state.index), out.partial, ranked, replay_cfg(), solver_cfg=solver_cfg)
    assert isinstance(frag, Fragment)
    assert frag.attempts == 1 and frag.env_out["m"] == 1


@needs_z3
def test_fragment_refined_after_solver_rejection(solver_cfg):
    _, _, _, out, chunk, ranked = translate_setup("refine")
    transport = ReplayTransport(REPLAY_DIR)
    frag = generate_fragment(chunk, dict(out.state.index), out.partial, ranked, replay_cfg(), transport, solver_cfg)
    assert isinstance(frag, Fragment) and frag.attempts == 2
    assert "<=" in frag.text


@needs_z3
def test_fragment_attempts_exhausted(solver_cfg):
    _, _, _, out, chunk, ranked = translate_setup("exhaust")
    frag = generate_fragment(chunk, dict(out.state.index), out.partial, ranked, replay_cfg(), solver_cfg=solver_cfg)
    assert isinstance(frag, BridgeFailed) and frag.attempts == 3


@needs_z3
def test_fewer_attempts_stop_earlier(solver_cfg):
    _, _, _, out, chunk, ranked = translate_setup("refine")
    frag = generate_fragment(chunk, dict(out.state.index), out.partial, ranked, replay_cfg(max_refine=1),
                             solver_cfg=solver_cfg)
    assert isinstance(frag, BridgeFailed) and frag.attempts == 1


def test_missing_solver_fails_the_bridge():
    _, _, _, out, chunk, ranked = translate_setup("first_try")
    frag = generate_fragment(chunk, dict(out.state.index), out.partial, ranked, replay_cfg(),
                             solver_cfg=SolverConfig(("no-such-solver-binary",)))
    assert isinstance(frag, BridgeFailed) and "solver" in frag.reason


def test_fallback_input_is_replayed():
    src, fn, env, path = solve_path_for("solve_ok")
    res = llm_solve(src, fn, path, env, replay_cfg())
    assert isinstance(res, FallbackInput)
    assert res.input.values() == [4] and isinstance(res.verdict, PathCorrect)


def test_fallback_wrong_input_is_execution_pass_only():
    src, fn, env, path = solve_path_for("solve_wrong")
    res = llm_solve(src, fn, path, env, replay_cfg())
    assert isinstance(res, FallbackInput) and isinstance(res.verdict, ExecutionPassOnly)


def test_fallback_unsat_claim():
    src, fn, env, path = solve_path_for("solve_unsat")
    assert isinstance(llm_solve(src, fn, path, env, replay_cfg()), FallbackUnsat)


def test_fallback_gives_up_after_one_reprompt():
    src, fn, env, path = solve_path_for("solve_garbage")
    res = llm_solve(src, fn, path, env, replay_cfg())
    assert isinstance(res, BridgeFailed) and res.attempts == 2


@needs_z3
def test_bench_routes_unsupported_chunks_through_bridge(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "bigger.py").write_text(MAX_SRC)
    (corpus / "bigger.inputs").write_text("(5, 1)\n(0, 1)\n")
    cfg = HarnessConfig(Bounds(20, 3), SolverConfig(("z3",), timeout=20.0), replay_cfg(), corpus, tmp_path / "out")
    report = bench(cfg)
    assert [r.source for r in report.records] == ["bridge", "bridge"]
    assert [r.test for r in report.records] == ["PathCorrect", "PathCorrect"]


@needs_z3
def test_bench_without_bridge_reports_unsupported(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "bigger.py").write_text(MAX_SRC)
    (corpus / "bigger.inputs").write_text("(5, 1)\n")
    report = bench(HarnessConfig(corpus_dir=corpus, solver=SolverConfig(("z3",))))
    assert [r.solver for r in report.records] == ["unsupported"]
