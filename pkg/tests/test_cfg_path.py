import pytest

from pathforge.cfg_path import (
    AlignError, Bounds, ChunkStrategy, EdgeLabel, NodeKind, align_trace, build_cfg, chunk_path, enumerate_paths,
)
from pathforge.frontend import parse_function, parse_unit
from pathforge.interpreter import run
from pathforge.testcase import coerce_args, parse_args_literal
from pathforge.typeinfer import infer_types

LOOP = """def f(n: int) -> int:
    i = 0
    while i < n:
        i = i + 1
    return i
"""


def test_return_only():
    cfg = build_cfg(parse_function("def f() -> int:\n    return 0"))
    kinds = [node.kind for node in cfg.nodes]
    assert kinds.count(NodeKind.ENTER) == 1 and kinds.count(NodeKind.EXPRESSION) == 1
    assert len(cfg.nodes) == 3 and len(cfg.exits) == 1
    assert cfg.node(cfg.entry).kind is NodeKind.ENTER


def test_if_else_edges():
    cfg = build_cfg(parse_function("def f(c: bool) -> int:\n    if c:\n        x = 1\n    else:\n        x = 2\n    return x"))
    (cond,) = cfg.conditions()
    labels = sorted(e.label.value for e in cfg.successors(cond.id))
    assert labels == sorted([EdgeLabel.TRUE.value, EdgeLabel.FALSE.value])
    targets = {cfg.node(e.dst).stmt_text for e in cfg.successors(cond.id)}
    assert targets == {"x = 1", "x = 2"}


def test_one_loop_has_one_guard_and_a_back_edge():
    cfg = build_cfg(parse_function(LOOP))
    assert [c.stmt_text for c in cfg.conditions()] == ["i < n"]
    assert sum(e.back for e in cfg.edges) == 1


def test_condition_nodes_have_both_branches(corpus_dir):
    for path in sorted(corpus_dir.glob("*.py")):
        for fn in parse_unit(path.read_text()).functions:
            cfg = build_cfg(fn)
            for c in cfg.conditions():
                labels = sorted(e.label.value for e in cfg.successors(c.id))
                assert labels == sorted([EdgeLabel.TRUE.value, EdgeLabel.FALSE.value]), (path.name, c)


def test_straight_line_one_path():
    fn = parse_function("def f(x: int) -> int:\n    y = x + 1\n    return y")
    assert len(list(enumerate_paths(build_cfg(fn)))) == 1


def test_if_else_two_paths():
    fn = parse_function("def f(x: int) -> int:\n    if x > 0:\n        return 1\n    else:\n        return 2")
    assert len(list(enumerate_paths(build_cfg(fn)))) == 2


def test_nested_ifs_count():
    # hand count: outer false (1) + outer true x inner {true, false} (2)
    src = "def f(x: int) -> int:\n    if x > 0:\n        if x > 5:\n            x = 5\n    return x"
    assert len(list(enumerate_paths(build_cfg(parse_function(src))))) == 3


def test_while_loop_iterations():
    paths = list(enumerate_paths(build_cfg(parse_function(LOOP)), Bounds(50, 2, 100)))
    assert len(paths) == 3  # 0, 1 and 2 iterations


def test_while_loop_iteration_tags_exact():
    paths = list(enumerate_paths(build_cfg(parse_function(LOOP)), Bounds(50, 2, 100)))
    guards = [[(s.loop_iteration, s.branch_taken) for s in p.steps if s.kind is NodeKind.CONDITION] for p in paths]
    assert guards == [
        [(1, False)],
        [(1, True), (2, False)],
        [(1, True), (2, True), (3, False)],
    ]


def test_truncation_and_max_paths():
    paths = list(enumerate_paths(build_cfg(parse_function(LOOP)), Bounds(4, 3, 100)))
    assert all(len(p) <= 4 for p in paths)
    assert any(p.truncated for p in paths)
    assert len(list(enumerate_paths(build_cfg(parse_function(LOOP)), Bounds(50, 3, 2)))) == 2


def test_paths_are_edge_walks(corpus_dir):
    for path in sorted(corpus_dir.glob("*.py")):
        for fn in parse_unit(path.read_text()).functions:
            cfg = build_cfg(fn)
            for p in enumerate_paths(cfg):
                assert p.steps[0].kind is NodeKind.ENTER
                for a, b in zip(p.steps, p.steps[1:]):
                    edges = [e for e in cfg.successors(a.node_id) if e.dst == b.node_id]
                    assert edges, (path.name, a, b)
                    if a.kind is NodeKind.CONDITION:
                        want = EdgeLabel.TRUE if a.branch_taken else EdgeLabel.FALSE
                        assert any(e.label is want for e in edges)


def test_step_format():
    p = list(enumerate_paths(build_cfg(parse_function(LOOP)), Bounds(50, 1, 100)))[1]
    assert p.steps[2].format() == "3\tcondition\ti < n @iter=1 ->taken"


def test_align_loop_trace():
    fn = parse_function(LOOP)
    cfg = build_cfg(fn)
    res = run(fn, [1])
    assert res.lines == [1, 2, 3, 4, 3, 5]
    path = align_trace(cfg, res.lines)
    guards = [(s.loop_iteration, s.branch_taken) for s in path.steps if s.kind is NodeKind.CONDITION]
    assert guards == [(1, True), (2, False)]
    assert path.keys() == res.keys


def test_align_errors():
    cfg = build_cfg(parse_function(LOOP))
    with pytest.raises(AlignError) as exc:
        align_trace(cfg, [1, 2, 99])
    assert exc.value.reason == "NoMatch"
    with pytest.raises(AlignError):
        align_trace(cfg, [])


def test_align_fixed_point_on_corpus(corpus_dir):
    for path in sorted(corpus_dir.glob("*.py")):
        inputs = path.with_suffix(".inputs")
        for fn in parse_unit(path.read_text()).functions:
            env = infer_types(fn)
            cfg = build_cfg(fn)
            for line in inputs.read_text().splitlines():
                inp = coerce_args(parse_args_literal(line), env)
                res = run(fn, inp)
                aligned = align_trace(cfg, res.lines)
                assert aligned.keys() == res.keys, (path.name, line)
                assert run(fn, inp).keys == aligned.keys()


def test_chunking():
    fn = parse_function("def f(x: int) -> int:\n    y = x\n    if y > 0:\n        y = 1\n    while y > 5:\n        y = y - 1\n    return y")
    path = next(p for p in enumerate_paths(build_cfg(fn)) if len(p) == 6)
    kinds = [s.kind for s in path.steps]
    assert kinds[:5] == [NodeKind.ENTER, NodeKind.EXPRESSION, NodeKind.CONDITION, NodeKind.EXPRESSION,
                         NodeKind.CONDITION]
    by_line = chunk_path(path, ChunkStrategy.BY_LINE)
    assert len(by_line) == len(path) and all(len(c.steps) == 1 for c in by_line)
    by_cond = chunk_path(path, ChunkStrategy.BY_CONDITION)
    assert [len(c.steps) for c in by_cond] == [3, 2, 1]
    assert sum((c.steps for c in by_cond), ()) == path.steps
    one = list(enumerate_paths(build_cfg(parse_function("def f() -> int:\n    return 0"))))[0]
    one = type(one)(one.function, one.steps[:1])
    assert len(chunk_path(one, ChunkStrategy.BY_LINE)) == 1 == len(chunk_path(one, ChunkStrategy.BY_CONDITION))


def test_foreach_desugars_to_hidden_index():
    fn = parse_function("def f(xs: list[int]) -> int:\n    t = 0\n    for x in xs:\n        t = t + x\n    return t")
    cfg = build_cfg(fn)
    assert [c.stmt_text for c in cfg.conditions()] == ["_idx_x < len(xs)"]
    texts = [node.stmt_text for node in cfg.nodes]
    assert "x = xs[_idx_x]" in texts and "_idx_x = _idx_x + 1" in texts
