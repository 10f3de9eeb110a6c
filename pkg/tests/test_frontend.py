import pytest
from hypothesis import given, settings, strategies as st

from pathforge.frontend import (
    ParseError, UnsupportedConstruct, nodes as n, parse_function, parse_unit, pretty_print, validate_subset,
)


def test_single_return():
    unit = parse_unit("def f(x: int) -> int:\n    return x + 1")
    assert len(unit.functions) == 1
    fn = unit.functions[0]
    assert [(p.name, str(p.annot)) for p in fn.params] == [("x", "int")]
    assert fn.body == (n.Return(n.Binary("+", n.Name("x"), n.IntLit(1))),)


def test_str_conversion_rejected():
    with pytest.raises(UnsupportedConstruct) as exc:
        parse_unit("def f(s: str):\n    y = str(s)")
    assert "str" in exc.value.construct


def test_unannotated_param_allowed():
    fn = parse_function("def f(x):\n  if x > 3:\n    return 1\n  return 0")
    assert fn.params[0].annot is None


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse_unit("def f(x):\n    return (x +\n")
    assert exc.value.line >= 2


@pytest.mark.parametrize("src, construct", [
    ("def f(x: int):\n    g = lambda y: y\n    return 0", "lambda"),
    ("def f(x: int):\n    a = [i for i in range(3)]\n    return 0", "comprehension"),
    ("def f(x: int):\n    d = {}\n    return 0", "dict"),
    ("def f(x: int):\n    def g():\n        return 1\n    return 0", "nested function"),
    ("def f(x: int):\n    a = b = x\n    return 0", "multiple assignment"),
])
def test_out_of_subset(src, construct):
    with pytest.raises(UnsupportedConstruct) as exc:
        parse_unit(src)
    assert construct in exc.value.construct.lower()


def test_chained_comparison_desugars():
    fn = parse_function("def f(x: int) -> bool:\n    return 0 < x < 5")
    ret = fn.body[0].value
    assert isinstance(ret, n.Binary) and ret.op == "and"
    assert ret.left == n.Compare("<", n.IntLit(0), n.Name("x"))
    assert ret.right == n.Compare("<", n.Name("x"), n.IntLit(5))


def test_int_true_division_is_a_violation():
    # operand types are only known after inference, so that is where it is caught
    from pathforge.typeinfer import TypeInferenceError, infer_types

    fn = parse_function("def f(a: int, b: int) -> int:\n    return a / b")
    with pytest.raises(TypeInferenceError, match="'/' between ints"):
        infer_types(fn)


def test_class_methods_recorded():
    unit = parse_unit("class Solution:\n    def f(self, x: int) -> int:\n        return x\n")
    assert unit.enclosing_class_name == "Solution"
    assert unit.functions[0].param_names() == ["x"]


def test_lenient_parse_keeps_placeholders():
    unit = parse_unit("def f(s: int):\n    y = str(s)\n    return 0", strict=False)
    assert validate_subset(unit)
    assert isinstance(unit.functions[0].body[0].value, n.Unsupported)


def test_spans_within_source():
    src = "def f(xs: list[int]) -> int:\n    t = 0\n    for x in xs:\n        t += x\n    return t\n"
    unit = parse_unit(src)
    lines = src.count("\n")
    for s in n.iter_stmts(unit.functions[0].body):
        assert 1 <= s.span.line <= lines


# -- round trip ------------------------------------------------------------------

_names = st.sampled_from(["a", "b", "c"])


def _exprs(depth):
    leaf = st.one_of(st.integers(-20, 20).map(str), _names, st.just("len(xs)"), st.just("xs[0]"))
    if depth == 0:
        return leaf
    sub = _exprs(depth - 1)
    return st.one_of(
        leaf,
        st.tuples(sub, st.sampled_from(["+", "-", "*", "//", "%"]), sub).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        sub.map(lambda e: f"abs({e})"),
        sub.map(lambda e: f"(-{e})"),
    )


def _conds():
    e = _exprs(1)
    cmp = st.tuples(e, st.sampled_from(["<", "<=", "==", "!=", ">", ">="]), e).map(lambda t: f"{t[0]} {t[1]} {t[2]}")
    return st.one_of(cmp, st.tuples(cmp, st.sampled_from(["and", "or"]), cmp).map(lambda t: f"({t[0]}) {t[1]} ({t[2]})"))


def _stmts(depth, indent):
    pad = "    " * indent
    simple = st.one_of(
        st.tuples(_names, _exprs(2)).map(lambda t: [f"{pad}{t[0]} = {t[1]}"]),
        _exprs(1).map(lambda e: [f"{pad}xs.append({e})"]),
        st.just([f"{pad}if len(xs) > 0:", f"{pad}    xs.pop()"]),
        _exprs(1).map(lambda e: [f"{pad}return {e}"]),
    )
    if depth == 0:
        return simple
    block = st.lists(_stmts(depth - 1, indent + 1), min_size=1, max_size=3).map(lambda bs: sum(bs, []))
    return st.one_of(
        simple,
        st.tuples(_conds(), block, block).map(lambda t: [f"{pad}if {t[0]}:", *t[1], f"{pad}else:", *t[2]]),
        st.tuples(_conds(), block).map(lambda t: [f"{pad}while {t[0]}:", *t[1]]),
        st.tuples(st.integers(0, 3), block).map(lambda t: [f"{pad}for i{indent} in range({t[0]}, 4):", *t[1]]),
    )


_programs = st.lists(_stmts(2, 1), min_size=1, max_size=4).map(
    lambda bs: "def f(xs: list[int], a: int, b: int, c: int) -> int:\n" + "\n".join(sum(bs, [])) + "\n")


@settings(max_examples=150, deadline=None)
@given(_programs)
def test_pretty_print_round_trip(src):
    unit = parse_unit(src)
    printed = pretty_print(unit)
    again = parse_unit(printed)
    assert again.functions == unit.functions
    assert pretty_print(again) == printed


def test_round_trip_corpus(corpus_dir):
    for path in sorted(corpus_dir.glob("*.py")):
        unit = parse_unit(path.read_text(), str(path))
        assert parse_unit(pretty_print(unit)).functions == unit.functions, path.name
