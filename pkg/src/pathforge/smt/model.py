"""Solver models: parsing ``get-model`` output and evaluating terms under it."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .terms import BOOL, INT, REAL, SexprError, Sort, is_array, parse_sexprs, show, to_term


class ModelParseError(ValueError):
    def __init__(self, message: str, sexpr: str = ""):
        super().__init__(f"{message}: {sexpr}" if sexpr else message)
        self.sexpr = sexpr


@dataclass(frozen=True)
class ArrayVal:
    """An array as a default value plus point updates; later stores win."""

    default: "Value"
    stores: tuple = ()

    def get(self, index: int) -> "Value":
        for i, v in reversed(self.stores):
            if i == index:
                return v
        return self.default

    def store(self, index: int, value: "Value") -> "ArrayVal":
        return ArrayVal(self.default, self.stores + ((index, value),))

    def normalized(self) -> "ArrayVal":
        """Distinct indices in ascending order, stores equal to the default dropped."""
        last: dict[int, Value] = {}
        for i, v in self.stores:
            last[i] = v
        kept = tuple(sorted((i, v) for i, v in last.items() if v != self.default))
        return ArrayVal(self.default, kept)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArrayVal):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        return a.default == b.default and a.stores == b.stores

    def __hash__(self) -> int:
        norm = self.normalized()
        return hash((norm.default, norm.stores))


Value = Union[int, Fraction, bool, ArrayVal]


def default_value(sort: Sort) -> Value:
    if sort == INT:
        return 0
    if sort == REAL:
        return Fraction(0)
    if sort == BOOL:
        return False
    if is_array(sort):
        return ArrayVal(default_value(sort[2]))
    raise ValueError(f"unknown sort {sort!r}")


@dataclass
class Model:
    bindings: dict[str, Value] = field(default_factory=dict)

    def value(self, name: str, sort: Sort) -> Value:
        """Binding for ``name``; symbols the solver left out get the sort's default."""
        if name in self.bindings:
            return self.bindings[name]
        return default_value(sort)


# -- evaluation --------------------------------------------------------------


class EvalError(ValueError):
    pass


def _smt_div(a: int, b: int) -> int:
    # SMT-LIB: a = b*q + r with 0 <= r < |b|
    if b == 0:
        return 0  # unconstrained by the theory; any total choice is valid
    return a // b if b > 0 else -(a // -b)


def _num(x):
    if isinstance(x, bool):
        raise EvalError("boolean used as a number")
    return x


def eval_term(t, env: dict, funs: dict | None = None):
    funs = funs or {}
    if isinstance(t, (bool, int, Fraction)):
        return t
    if isinstance(t, str):
        if t in env:
            return env[t]
        raise EvalError(f"unbound symbol {t}")
    op = t[0]
    if op == "const":
        return ArrayVal(eval_term(t[2], env, funs))
    if op == "as-array":
        if t[1] not in funs:
            raise EvalError(f"unknown function {t[1]}")
        return funs[t[1]]
    if op == "let":
        inner = dict(env)
        for name, v in t[1]:
            inner[name] = eval_term(v, env, funs)
        return eval_term(t[2], inner, funs)
    if op == "ite":
        c = eval_term(t[1], env, funs)
        return eval_term(t[2] if c else t[3], env, funs)
    if op == "and":
        return all(eval_term(a, env, funs) for a in t[1:])
    if op == "or":
        return any(eval_term(a, env, funs) for a in t[1:])
    if op == "=>":
        return (not eval_term(t[1], env, funs)) or eval_term(t[2], env, funs)
    args = [eval_term(a, env, funs) for a in t[1:]]
    if op == "not":
        return not args[0]
    if op == "=":
        return all(a == args[0] for a in args[1:])
    if op == "distinct":
        return len(set(args)) == len(args)
    if op == "xor":
        return bool(args[0]) != bool(args[1])
    if op == "+":
        return sum(_num(a) for a in args)
    if op == "-":
        if len(args) == 1:
            return -_num(args[0])
        out = _num(args[0])
        for a in args[1:]:
            out -= _num(a)
        return out
    if op == "*":
        out = 1
        for a in args:
            out *= _num(a)
        return out
    if op == "/":
        return Fraction(args[0]) / Fraction(args[1]) if args[1] != 0 else Fraction(0)
    if op == "div":
        return _smt_div(args[0], args[1])
    if op == "mod":
        return args[0] - args[1] * _smt_div(args[0], args[1]) if args[1] != 0 else args[0]
    if op == "abs":
        return abs(args[0])
    if op in ("<", "<=", ">", ">="):
        pairs = zip(args, args[1:])
        cmp = {"<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
               ">": lambda a, b: a > b, ">=": lambda a, b: a >= b}[op]
        return all(cmp(a, b) for a, b in pairs)
    if op == "select":
        return args[0].get(args[1])
    if op == "store":
        return args[0].store(args[1], args[2])
    if op == "to_real":
        return Fraction(args[0])
    if op == "to_int":
        return int(Fraction(args[0]).__floor__())
    if op == "is_int":
        return Fraction(args[0]).denominator == 1
    raise EvalError(f"unknown operator {op}")


def eval_model(script, model: Model) -> bool:
    """True iff every assertion of ``script`` holds under ``model``."""
    env = {d.name: model.value(d.name, d.sort) for d in script.decls}
    return all(eval_term(a.term, env) is True for a in script.asserts)


# -- parsing -----------------------------------------------------------------


def _array_from_function(params, body, sort: Sort, consts: dict, funs: dict) -> ArrayVal:
    """Normalize ``lambda x. ite(x = c1, v1, ite(x = c2, v2, ... d))`` into an ArrayVal."""
    if len(params) != 1:
        raise ModelParseError("array function must take one argument", str(params))
    (x, _), = params
    stores = []
    node = body
    while isinstance(node, tuple) and node[0] == "ite":
        cond = node[1]
        idx = None
        if isinstance(cond, tuple) and cond[0] == "=" and len(cond) == 3:
            if cond[1] == x:
                idx = cond[2]
            elif cond[2] == x:
                idx = cond[1]
        if idx is None:
            raise ModelParseError("unsupported array function condition", repr(cond))
        stores.append((eval_term(idx, consts, funs), eval_term(node[2], consts, funs)))
        node = node[3]
    if x in _free(node):
        raise ModelParseError("array default depends on the index", repr(node))
    default = eval_term(node, consts, funs)
    # the first matching ite branch wins, so it must be the last store
    return ArrayVal(default, tuple(reversed(stores))).normalized()


def _free(t) -> set:
    from .terms import symbols_in
    return symbols_in(t)


def parse_model(text: str, decls) -> Model:
    """Parse a ``get-model`` response.

    Handles constant definitions, store chains over constant arrays, and
    arrays given as ``as-array`` references or lambdas over ``ite`` chains.
    """
    try:
        sx = parse_sexprs(text)
    except SexprError as exc:
        raise ModelParseError(str(exc), text[:200]) from exc
    if len(sx) == 1 and isinstance(sx[0], list) and (not sx[0] or sx[0][0] != "define-fun"):
        items = sx[0]
        if items and items[0] == "model":
            items = items[1:]
    else:
        items = sx
    sorts = {d.name: d.sort for d in decls}
    consts: dict[str, Value] = {}
    funs: dict[str, ArrayVal] = {}
    pending = []
    for item in items:
        if not isinstance(item, list) or len(item) != 5 or item[0] != "define-fun":
            raise ModelParseError("expected define-fun", show(item))
        _, name, params, _sort, body = item
        if name.startswith("|") and name.endswith("|"):
            name = name[1:-1]
        try:
            term = to_term(body)
        except SexprError as exc:
            raise ModelParseError(str(exc), show(item)) from exc
        if params:
            ps = tuple((p[0], p[1]) for p in params)
            pending.append(("fun", name, ps, term, item))
        else:
            pending.append(("const", name, None, term, item))
    # functions first: constants may reference them through as-array
    for kind, name, ps, term, item in pending:
        if kind == "fun":
            try:
                funs[name] = _array_from_function(ps, term, None, {}, funs)
            except (EvalError, ModelParseError):
                continue  # helper functions unrelated to arrays are ignored
    for kind, name, ps, term, item in pending:
        if kind != "const":
            continue
        try:
            if isinstance(term, tuple) and term[0] == "lambda":
                value = _array_from_function(term[1], term[2], sorts.get(name), {}, funs)
            else:
                value = eval_term(term, {}, funs)
        except (EvalError, ModelParseError, AttributeError, TypeError) as exc:
            raise ModelParseError(f"cannot evaluate value of {name} ({exc})", show(item)) from exc
        if isinstance(value, ArrayVal):
            value = value.normalized()
        sort = sorts.get(name)
        if sort == REAL and isinstance(value, int) and not isinstance(value, bool):
            value = Fraction(value)
        if sort == INT and isinstance(value, Fraction):
            if value.denominator != 1:
                raise ModelParseError(f"non-integral value for Int symbol {name}", show(item))
            value = int(value)
        consts[name] = value
    return Model(consts)
