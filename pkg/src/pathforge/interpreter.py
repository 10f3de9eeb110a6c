"""Concrete execution of subset functions over their CFG.

Statements are compiled once into Python closures and then run node by node,
so every run yields a step sequence in exactly the form the path enumerator
produces. Python's own operators supply the semantics: floor division and
modulo round toward negative infinity, negative indices wrap, and bad
indices or divisors raise.
"""
from __future__ import annotations

import itertools
import operator
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Union

from .cfg_path import Cfg, EdgeLabel, ExecutionPath, NodeKind, build_cfg, path_from_keys
from .frontend import nodes as n
from .testcase import TestInput
from .typeinfer import BOOL, FLOAT, ListOf, Scalar, TypeEnv

DEFAULT_STEP_LIMIT = 10_000

# Out-of-subset expressions are evaluated by CPython with only these builtins,
# so inputs produced for them (bridge, fallback) can still be replayed.
_FALLBACK_BUILTINS = {
    "abs": abs, "bool": bool, "float": float, "int": int, "len": len, "max": max,
    "min": min, "round": round, "sorted": sorted, "str": str, "sum": sum,
}


class _Unsupported(Exception):
    pass


class StepLimit(Exception):
    pass


_ARITH = {
    "+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv,
    "//": operator.floordiv, "%": operator.mod,
}
_CMP = {
    "==": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le,
    ">": operator.gt, ">=": operator.ge,
}


def _compile_expr(e) -> Callable[[dict], object]:
    if isinstance(e, (n.IntLit, n.FloatLit, n.BoolLit)):
        v = e.value
        return lambda env: v
    if isinstance(e, n.Name):
        name = e.id

        def read(env):
            try:
                return env[name]
            except KeyError:
                raise UnboundLocalError(name) from None
        return read
    if isinstance(e, n.Unary):
        f = _compile_expr(e.operand)
        if e.op == "not":
            return lambda env: not f(env)
        return lambda env: -f(env)
    if isinstance(e, n.Binary):
        lf, rf = _compile_expr(e.left), _compile_expr(e.right)
        if e.op == "and":
            return lambda env: lf(env) and rf(env)
        if e.op == "or":
            return lambda env: lf(env) or rf(env)
        op = _ARITH[e.op]
        return lambda env: op(lf(env), rf(env))
    if isinstance(e, n.Compare):
        lf, rf = _compile_expr(e.left), _compile_expr(e.right)
        op = _CMP[e.op]
        return lambda env: op(lf(env), rf(env))
    if isinstance(e, n.Subscript):
        bf, xf = _compile_expr(e.base), _compile_expr(e.index)
        return lambda env: bf(env)[xf(env)]
    if isinstance(e, n.LenCall):
        f = _compile_expr(e.arg)
        return lambda env: len(f(env))
    if isinstance(e, n.AbsCall):
        f = _compile_expr(e.arg)
        return lambda env: abs(f(env))
    if isinstance(e, n.PopCall):
        f = _compile_expr(e.base)
        return lambda env: f(env).pop()
    if isinstance(e, n.AppendCall):
        bf, vf = _compile_expr(e.base), _compile_expr(e.value)
        return lambda env: bf(env).append(vf(env))
    if isinstance(e, n.ListLit):
        fs = [_compile_expr(x) for x in e.elems]
        return lambda env: [f(env) for f in fs]
    if isinstance(e, n.Unsupported) and e.text:
        try:
            code = compile(e.text, "<expr>", "eval")
        except SyntaxError:
            code = None
        if code is not None:
            return lambda env: eval(code, {"__builtins__": _FALLBACK_BUILTINS}, env)
    construct = getattr(e, "construct", type(e).__name__)

    def unsupported(env):
        raise _Unsupported(construct)
    return unsupported


def _compile_stmt(s) -> Callable[[dict], object]:
    """Closure executing ``s``; returns the value for ``return``, else None."""
    if isinstance(s, n.AugAssign):
        s = n.Assign(s.target, n.Binary(s.op, s.target, s.value, span=s.span), span=s.span)
    if isinstance(s, n.Assign):
        vf = _compile_expr(s.value)
        if isinstance(s.target, n.Name):
            name = s.target.id

            def assign(env):
                env[name] = vf(env)
            return assign
        bf, xf = _compile_expr(s.target.base), _compile_expr(s.target.index)

        def store(env):
            value = vf(env)
            bf(env)[xf(env)] = value
        return store
    if isinstance(s, n.Return):
        if s.value is None:
            return lambda env: None
        return _compile_expr(s.value)
    if isinstance(s, n.ExprStmt):
        f = _compile_expr(s.expr)

        def run_expr(env):
            f(env)
        return run_expr
    if isinstance(s, (n.Break, n.Continue)):
        return lambda env: None
    construct = getattr(s, "construct", type(s).__name__)

    def unsupported(env):
        raise _Unsupported(construct)
    return unsupported


@dataclass(frozen=True)
class _Node:
    kind: NodeKind
    action: Optional[Callable]
    loop_guard: bool
    is_return: bool
    true_edge: object = None
    false_edge: object = None
    next_edge: object = None


class Program:
    """A function compiled for repeated execution."""

    def __init__(self, fn: n.FunctionDef):
        self.fn = fn
        self.cfg: Cfg = build_cfg(fn)
        self.params = fn.param_names()
        self.nodes: dict[int, _Node] = {}
        for node in self.cfg.nodes:
            if node.kind is NodeKind.EXIT:
                continue
            edges = self.cfg.successors(node.id)
            if node.kind is NodeKind.CONDITION:
                t = next(e for e in edges if e.label is EdgeLabel.TRUE)
                f = next(e for e in edges if e.label is EdgeLabel.FALSE)
                self.nodes[node.id] = _Node(node.kind, _compile_expr(node.stmt_ref), node.loop_guard,
                                            False, t, f)
            else:
                action = None if node.kind is NodeKind.ENTER else _compile_stmt(node.stmt_ref)
                self.nodes[node.id] = _Node(node.kind, action, False,
                                            isinstance(node.stmt_ref, n.Return), next_edge=edges[0])


@lru_cache(maxsize=256)
def compile_program(fn: n.FunctionDef) -> Program:
    return Program(fn)


@dataclass(frozen=True)
class Returned:
    value: object = None


@dataclass(frozen=True)
class Raised:
    kind: str  # IndexError | ZeroDivisionError | StepLimit | ...
    detail: str = ""


Outcome = Union[Returned, Raised]


@dataclass
class RunResult:
    outcome: Outcome
    keys: tuple  # PathStep keys of the executed steps
    steps_executed: int
    program: Program = field(repr=False)

    @property
    def trace(self) -> ExecutionPath:
        return path_from_keys(self.program.cfg, self.keys, False)

    @property
    def lines(self) -> list[int]:
        return [self.program.cfg.node(k[0]).line for k in self.keys]

    @property
    def raised(self) -> bool:
        return isinstance(self.outcome, Raised)


def _fresh(values) -> list:
    return [list(v) if isinstance(v, (list, tuple)) else v for v in values]


def run(fn: n.FunctionDef, args, max_steps: int = DEFAULT_STEP_LIMIT,
        observe: Optional[Callable[[dict], None]] = None) -> RunResult:
    """Execute ``fn`` on ``args`` (a TestInput or a sequence of values).

    A step whose statement raises is not part of the trace; the exception
    becomes the outcome. ``observe`` sees the variable bindings after each step.
    """
    prog = compile_program(fn)
    values = args.values() if isinstance(args, TestInput) else _fresh(args)
    if len(values) != len(prog.params):
        raise ValueError(f"{fn.name} takes {len(prog.params)} arguments, got {len(values)}")
    env = dict(zip(prog.params, _fresh(values)))
    cfg = prog.cfg
    exits = cfg.exits
    node_id = cfg.entry
    counts: dict[int, int] = {}
    keys: list = []
    result = None
    try:
        while True:
            if len(keys) >= max_steps:
                raise StepLimit()
            node = prog.nodes[node_id]
            if node.kind is NodeKind.CONDITION:
                taken = bool(node.action(env))
                edge = node.true_edge if taken else node.false_edge
                it = counts.get(node_id, 1) if node.loop_guard else None
                keys.append((node_id, taken, it))
            else:
                if node.action is not None:
                    value = node.action(env)
                    if node.is_return:
                        result = value
                edge = node.next_edge
                keys.append((node_id, None, None))
            if observe is not None:
                observe(env)
            if edge.dst in exits:
                return RunResult(Returned(result), tuple(keys), len(keys), prog)
            counts[edge.dst] = counts.get(edge.dst, 0) + 1 if edge.back else 1
            node_id = edge.dst
    except StepLimit:
        outcome = Raised("StepLimit", f"more than {max_steps} steps")
    except _Unsupported as exc:
        outcome = Raised("Unsupported", str(exc))
    except Exception as exc:  # the program's own runtime errors are data
        outcome = Raised(type(exc).__name__, str(exc))
    return RunResult(outcome, tuple(keys), len(keys), prog)


# -- verdicts ----------------------------------------------------------------


@dataclass(frozen=True)
class PathCorrect:
    pass


@dataclass(frozen=True)
class ExecutionPassOnly:
    pass


@dataclass(frozen=True)
class Failed:
    reason: str


Verdict = Union[PathCorrect, ExecutionPassOnly, Failed]


def verdict_name(v: Verdict) -> str:
    return {PathCorrect: "PathCorrect", ExecutionPassOnly: "ExecutionPassOnly"}.get(type(v), "Failed")


def _matches(keys: tuple, target: ExecutionPath) -> bool:
    want = target.keys()
    if not target.truncated:
        return keys == want
    if len(keys) < len(want):
        return False
    prefix = keys[:len(want)]
    if want and want[-1][1] is None and prefix[-1][1] is not None:
        # the last step of an aligned truncated trace leaves the branch open
        prefix = prefix[:-1] + ((prefix[-1][0], None, prefix[-1][2]),)
    return prefix == want


def path_verdict(fn: n.FunctionDef, inp, target: ExecutionPath,
                 max_steps: int = DEFAULT_STEP_LIMIT) -> Verdict:
    """Replay ``inp``; a truncated target only needs to be a prefix of the run."""
    result = run(fn, inp, max_steps)
    if _matches(result.keys, target):
        return PathCorrect()
    if isinstance(result.outcome, Raised):
        return Failed(result.outcome.kind)
    return ExecutionPassOnly()


# -- brute force ----------------------------------------------------------------


@dataclass(frozen=True)
class Domain:
    int_range: tuple = (-5, 5)
    list_len_max: int = 4
    elem_range: tuple = (-3, 3)
    float_grid: tuple = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)

    def scalars(self, t: Scalar, in_list: bool = False) -> list:
        if t is BOOL:
            return [False, True]
        if t is FLOAT:
            return list(self.float_grid)
        lo, hi = self.elem_range if in_list else self.int_range
        return list(range(lo, hi + 1))

    def values(self, t) -> list:
        """Candidate values of type ``t`` in lexicographic order (lists: by length first)."""
        if isinstance(t, ListOf):
            elems = self.scalars(t.elem, in_list=True)
            out = []
            for k in range(self.list_len_max + 1):
                out.extend(tuple(c) for c in itertools.product(elems, repeat=k))
            return out
        if isinstance(t, Scalar):
            return self.scalars(t)
        raise ValueError(f"no finite domain for {t}")


@dataclass(frozen=True)
class FoundInput:
    input: TestInput


@dataclass(frozen=True)
class ExhaustedNoInput:
    pass


BruteForceResult = Union[FoundInput, ExhaustedNoInput]


def input_space(env: TypeEnv, domain: Domain):
    spaces = [domain.values(env[p]) for p in env.params]
    for combo in itertools.product(*spaces):
        yield TestInput(tuple(zip(env.params, combo)))


def brute_force_many(fn: n.FunctionDef, targets, env: TypeEnv, domain: Domain = Domain(),
                     max_steps: Optional[int] = None) -> list[BruteForceResult]:
    """First input (in enumeration order) driving ``fn`` down each target path.

    One sweep over the input space serves every target, which is what makes
    exhaustive search affordable.
    """
    targets = list(targets)
    results: list[Optional[BruteForceResult]] = [None] * len(targets)
    exact: dict[tuple, list[int]] = {}
    prefixed: dict[int, dict[tuple, list[int]]] = {}
    for i, t in enumerate(targets):
        if t.truncated:
            prefixed.setdefault(len(t.steps), {}).setdefault(t.keys(), []).append(i)
        else:
            exact.setdefault(t.keys(), []).append(i)
    pending = len(targets)
    longest = max((len(t.steps) for t in targets), default=0)
    limit = max_steps or (longest + 1)
    for inp in input_space(env, domain):
        if not pending:
            break
        keys = run(fn, inp, limit).keys
        hits = list(exact.get(keys, ()))
        for length, table in prefixed.items():
            if len(keys) < length:
                continue
            prefix = keys[:length]
            hits += table.get(prefix, ())
            last = prefix[-1]
            if last[1] is not None:
                hits += table.get(prefix[:-1] + ((last[0], None, last[2]),), ())
        for i in hits:
            if results[i] is None:
                results[i] = FoundInput(inp)
                pending -= 1
    return [r if r is not None else ExhaustedNoInput() for r in results]


def brute_force(fn: n.FunctionDef, target: ExecutionPath, env: TypeEnv,
                domain: Domain = Domain()) -> BruteForceResult:
    return brute_force_many(fn, [target], env, domain)[0]
