"""Concrete test inputs decoded from solver models, and their on-disk form.

Artifact files hold one JSON object per line with fields in a fixed order:
``function``, ``file``, ``args``, ``path_id``, ``verdict``. Each argument is
``{"name", "type", "value"}`` where ``type`` is the subset type spelling, so a
record can be read back without the source file.
"""
from __future__ import annotations

import ast
import json
from dataclasses import dataclass
from fractions import Fraction

from .frontend import nodes as n
from .smt.model import ArrayVal, Model
from .smt.script import SmtScript
from .translator import len_name, sort_of, sym_name
from .typeinfer import BOOL, FLOAT, INT, ListOf, Opaque, Scalar, SubsetType, TypeEnv


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class TestInput:
    """Ordered ``(param name, value)`` pairs; lists are stored as tuples."""

    __test__ = False  # not a pytest class

    args: tuple

    def values(self) -> list:
        return [list(v) if isinstance(v, tuple) else v for _, v in self.args]

    def as_dict(self) -> dict:
        return dict(zip([k for k, _ in self.args], self.values()))

    @classmethod
    def of(cls, names, values) -> "TestInput":
        return cls(tuple((k, tuple(v) if isinstance(v, list) else v) for k, v in zip(names, values)))


def _scalar(value, t: Scalar):
    if t is BOOL:
        return bool(value)
    if t is FLOAT:
        return float(Fraction(value))  # nearest double, only at this boundary
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise DecodeError(f"non-integral value {value} for an int")
        value = int(value)
    return int(value)


def decode_model(model: Model, env: TypeEnv, script: SmtScript) -> TestInput:
    """Read each parameter's version-0 symbols; lists come from the array and its length."""
    args = []
    for p in env.params:
        t = env[p]
        if isinstance(t, Opaque):
            raise DecodeError(f"parameter '{p}' has no subset type ({t.construct})")
        names = script.param_map.get(p, (sym_name(p, 0),) + ((len_name(p, 0),) if isinstance(t, ListOf) else ()))
        sort = sort_of(t)
        if isinstance(t, ListOf):
            arr = model.value(names[0], sort)
            length = model.value(names[1], "Int")
            if length < 0:
                raise DecodeError(f"negative length {length} for '{p}'")
            if not isinstance(arr, ArrayVal):
                raise DecodeError(f"'{p}' is not bound to an array")
            args.append((p, tuple(_scalar(arr.get(i), t.elem) for i in range(length))))
        else:
            args.append((p, _scalar(model.value(names[0], sort), t)))
    return TestInput(tuple(args))


# -- rendering ---------------------------------------------------------------


def render_value(v) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(render_value(x) for x in v) + "]"
    return str(v)


def call_snippet(fn_name: str, inp: TestInput) -> str:
    return f"{fn_name}({', '.join(render_value(v) for _, v in inp.args)})"


def type_spelling(t: SubsetType) -> str:
    return f"list[{t.elem}]" if isinstance(t, ListOf) else str(t)


def _json_value(v):
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    return v


def _typed_value(value, spelling: str):
    if spelling.startswith("list["):
        elem = Scalar(spelling[5:-1])
        if not isinstance(value, list):
            raise ValueError(f"expected a list for {spelling}")
        return tuple(_typed_value(x, str(elem)) for x in value)
    t = Scalar(spelling)
    if t is BOOL:
        if not isinstance(value, bool):
            raise ValueError(f"expected bool, got {value!r}")
        return value
    if t is INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"expected int, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"expected float, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class TestArtifact:
    __test__ = False

    function: str
    file: str
    args: tuple  # (name, type spelling, value)
    path_id: str
    verdict: str = ""

    def record(self) -> dict:
        return {
            "function": self.function,
            "file": self.file,
            "args": [{"name": k, "type": t, "value": _json_value(v)} for k, t, v in self.args],
            "path_id": self.path_id,
            "verdict": self.verdict,
        }

    def serialize(self) -> str:
        return json.dumps(self.record(), separators=(", ", ": "))

    @classmethod
    def parse(cls, line: str) -> "TestArtifact":
        rec = json.loads(line)
        args = tuple((a["name"], a["type"], _typed_value(a["value"], a["type"])) for a in rec["args"])
        return cls(rec["function"], rec["file"], args, str(rec["path_id"]), rec.get("verdict", ""))

    def test_input(self) -> TestInput:
        return TestInput(tuple((k, v) for k, _, v in self.args))

    def snippet(self) -> str:
        return call_snippet(self.function, self.test_input())


def emit_artifact(inp: TestInput, fn: n.FunctionDef, path_id: str, env: TypeEnv,
                  file: str = "", verdict: str = "") -> TestArtifact:
    args = tuple((k, type_spelling(env[k]), v) for k, v in inp.args)
    return TestArtifact(fn.name, file, args, str(path_id), verdict)


def write_artifacts(artifacts, stream) -> None:
    for a in artifacts:
        stream.write(a.serialize() + "\n")


def read_artifacts(text: str) -> list[TestArtifact]:
    return [TestArtifact.parse(line) for line in text.splitlines() if line.strip()]


# -- literal argument syntax (CLI, corpus .inputs files) -----------------------


def parse_args_literal(text: str) -> tuple:
    """Parse ``"[1, 2], 3"`` or ``"([1, 2], 3)"`` into a tuple of Python values."""
    text = text.strip()
    if not text:
        return ()
    value = ast.literal_eval(text if text.startswith("(") and text.endswith(")") else f"({text},)")
    if not isinstance(value, tuple):
        value = (value,)
    for v in value:
        _check_literal(v)
    return value


def _check_literal(v, nested: bool = False) -> None:
    if isinstance(v, (bool, int, float)):
        return
    if isinstance(v, list) and not nested:
        for x in v:
            _check_literal(x, True)
        return
    raise ValueError(f"unsupported argument literal {v!r}")


def coerce_args(values, env: TypeEnv) -> TestInput:
    """Bind literal values to parameters, converting ints to floats where declared."""
    if len(values) != len(env.params):
        raise ValueError(f"expected {len(env.params)} arguments, got {len(values)}")
    out = []
    for p, v in zip(env.params, values):
        t = env[p]
        if isinstance(t, ListOf):
            out.append((p, _typed_value(list(v) if isinstance(v, tuple) else v, type_spelling(t))))
        elif isinstance(t, Scalar):
            out.append((p, _typed_value(v, str(t))))
        else:
            out.append((p, v))
    return TestInput(tuple(out))
