"""Path-to-constraint translation in static single assignment form.

Every source variable ``v`` maps to symbols ``_v_k``; lists additionally carry
``_v_k_len``. A step that writes ``v`` declares ``_v_{k+1}`` and relates it to
the previous version, so each symbol is defined exactly once per script.

List indices follow Python: a literal ``-k`` reads ``len - k``; an index the
path proves non-negative is used as-is with ``0 <= e < len``; any other index
is wrapped with ``ite(e >= 0, e, len + e)`` and bounded by ``-len <= e < len``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Union

from .cfg_path import ExecutionPath, NodeKind, PathStep
from .frontend import nodes as n
from .smt.script import SmtScript, SmtSymbol
from .smt.terms import BOOL, INT, REAL, Sort, array_sort
from .typeinfer import ListOf, Opaque, Scalar, SubsetType, TypeEnv

_SCALAR_SORT = {Scalar.INT: INT, Scalar.FLOAT: REAL, Scalar.BOOL: BOOL}


class UnknownVariable(KeyError):
    pass


class Untranslatable(Exception):
    def __init__(self, construct: str):
        super().__init__(construct)
        self.construct = construct


def sym_name(var: str, k: int) -> str:
    return f"_{var}_{k}"


def len_name(var: str, k: int) -> str:
    return f"_{var}_{k}_len"


def sort_of(t: SubsetType) -> Sort:
    if isinstance(t, Opaque):
        raise Untranslatable(t.construct)
    if isinstance(t, ListOf):
        return array_sort(_SCALAR_SORT[t.elem])
    return _SCALAR_SORT[t]


@dataclass(frozen=True)
class SsaEnv:
    index: dict
    types: TypeEnv = field(repr=False)
    # SSA symbols known to be >= 0 on this path; only steers index encoding.
    nonneg: frozenset = frozenset()
    # pairs of list variables bound to the same object; the copy encoding is only sound until one is mutated
    aliases: frozenset = frozenset()

    def defined(self, var: str) -> bool:
        return var in self.index

    def bump(self, var: str) -> tuple["SsaEnv", int]:
        k = self.index.get(var, 0) + 1
        return replace(self, index={**self.index, var: k}), k


def current_symbol(state: SsaEnv, var: str) -> SmtSymbol:
    """Symbol holding ``var``'s latest version. Reads never bump the index."""
    if var not in state.index:
        raise UnknownVariable(var)
    k = state.index[var]
    return SmtSymbol(sym_name(var, k), sort_of(state.types[var]), var, k)


def _declare(var: str, k: int, t: SubsetType) -> list[SmtSymbol]:
    sort = sort_of(t)
    syms = [SmtSymbol(sym_name(var, k), sort, var, k)]
    if isinstance(t, ListOf):
        syms.append(SmtSymbol(len_name(var, k), INT, var, k, is_len=True))
    return syms


def init_state(env: TypeEnv, fn: n.FunctionDef) -> tuple[SsaEnv, SmtScript]:
    """Version-0 symbols for every parameter; lists get ``_p_0_len >= 0``."""
    script = SmtScript()
    for p in fn.param_names():
        t = env[p]
        if isinstance(t, Opaque):
            continue  # only an error if the path actually uses it
        syms = _declare(p, 0, t)
        for s in syms:
            script.declare(s)
        script.param_map[p] = tuple(s.name for s in syms)
        if isinstance(t, ListOf):
            script.add((">=", len_name(p, 0), 0), origin=None, synthetic=True)
    return SsaEnv({p: 0 for p in fn.param_names()}, env), script


# -- expressions -------------------------------------------------------------


def _is_list(state: SsaEnv, e) -> bool:
    if isinstance(e, n.ListLit):
        return True
    return isinstance(e, n.Name) and isinstance(state.types.vars.get(e.id), ListOf)


def provably_nonneg(state: SsaEnv, e) -> bool:
    if isinstance(e, n.IntLit):
        return e.value >= 0
    if isinstance(e, (n.LenCall, n.AbsCall)):
        return True
    if isinstance(e, n.Name):
        k = state.index.get(e.id)
        return k is not None and sym_name(e.id, k) in state.nonneg
    if isinstance(e, n.Binary):
        if e.op in ("+", "*", "//"):
            return provably_nonneg(state, e.left) and provably_nonneg(state, e.right)
        if e.op == "%":
            return provably_nonneg(state, e.right)
    return False


class _ExprTranslator:
    def __init__(self, state: SsaEnv):
        self.state = state
        self.sides: list = []
        self.guards: list = []

    def side(self, term) -> None:
        for g in reversed(self.guards):
            term = ("=>", g, term)
        if term not in self.sides:
            self.sides.append(term)

    def var(self, name: str):
        t = self.state.types.vars.get(name)
        if t is None or name not in self.state.index:
            raise Untranslatable(f"undefined variable {name}")
        if isinstance(t, Opaque):
            raise Untranslatable(t.construct)
        return sym_name(name, self.state.index[name]), t

    def list_terms(self, e) -> tuple:
        """(array term, length term, element sort) for a list-valued expression."""
        if isinstance(e, n.Name):
            sym, t = self.var(e.id)
            if not isinstance(t, ListOf):
                raise Untranslatable(f"'{e.id}' is not a list")
            return sym, len_name(e.id, self.state.index[e.id]), _SCALAR_SORT[t.elem]
        if isinstance(e, n.ListLit):
            items = [self.expr(x) for x in e.elems]
            sort = items[0][1] if items else INT
            if any(s == REAL for _, s in items):
                sort = REAL
            zero = Fraction(0) if sort == REAL else (False if sort == BOOL else 0)
            arr = ("const", array_sort(sort), zero)
            for i, (t, s) in enumerate(items):
                arr = ("store", arr, i, self.coerce(t, s, sort))
            return arr, len(items), sort
        if isinstance(e, n.Unsupported):
            raise Untranslatable(e.construct)
        raise Untranslatable("list-valued expression")

    def index(self, idx, length):
        """Array position for Python index ``idx`` plus the in-bounds side conditions."""
        if isinstance(idx, n.IntLit) and idx.value < 0:
            self.side((">=", idx.value, ("-", length)))
            return ("-", length, -idx.value)
        t, s = self.expr(idx)
        if s != INT:
            raise Untranslatable("non-integer index")
        if isinstance(idx, n.IntLit):
            self.side(("<", t, length))
            return t
        if provably_nonneg(self.state, idx):
            self.side(("<=", 0, t))
            self.side(("<", t, length))
            return t
        self.side(("<=", ("-", length), t))
        self.side(("<", t, length))
        return ("ite", (">=", t, 0), t, ("+", length, t))

    @staticmethod
    def coerce(t, s, want):
        if s == want:
            return t
        if s == INT and want == REAL:
            if isinstance(t, int) and not isinstance(t, bool):
                return Fraction(t)
            return ("to_real", t)
        raise Untranslatable(f"cannot use {s} as {want}")

    def truth(self, e):
        if _is_list(self.state, e):
            _, length, _ = self.list_terms(e)
            return (">", length, 0)
        t, s = self.expr(e)
        if s == BOOL:
            return t
        if s == INT:
            return ("not", ("=", t, 0))
        return ("not", ("=", t, Fraction(0)))

    def numeric(self, a, b):
        (ta, sa), (tb, sb) = self.expr(a), self.expr(b)
        if sa == BOOL or sb == BOOL:
            raise Untranslatable("arithmetic on bool")
        if sa != sb:
            return self.coerce(ta, sa, REAL), self.coerce(tb, sb, REAL), REAL
        return ta, tb, sa

    def nonzero(self, t, s) -> None:
        if isinstance(t, (int, Fraction)) and not isinstance(t, bool):
            if t == 0:
                self.side(False)
            return
        self.side(("not", ("=", t, Fraction(0) if s == REAL else 0)))

    def floordiv(self, ta, tb, s):
        if s == REAL:
            return ("to_real", ("to_int", ("/", ta, tb)))
        if isinstance(tb, int):
            if tb > 0:
                return ("div", ta, tb)
            return ("div", ("-", ta), -tb)
        return ("ite", (">", tb, 0), ("div", ta, tb), ("div", ("-", ta), ("-", tb)))

    def expr(self, e) -> tuple:
        if isinstance(e, n.BoolLit):
            return e.value, BOOL
        if isinstance(e, n.IntLit):
            return e.value, INT
        if isinstance(e, n.FloatLit):
            return Fraction(repr(e.value)), REAL
        if isinstance(e, n.Name):
            sym, t = self.var(e.id)
            if isinstance(t, ListOf):
                raise Untranslatable("list used as a scalar")
            return sym, _SCALAR_SORT[t]
        if isinstance(e, n.Unary):
            if e.op == "not":
                return ("not", self.truth(e.operand)), BOOL
            t, s = self.expr(e.operand)
            if s == BOOL:
                raise Untranslatable("negation of bool")
            return ("-", t), s
        if isinstance(e, n.Binary):
            if e.op in ("and", "or"):
                left = self.truth(e.left)
                self.guards.append(left if e.op == "and" else ("not", left))
                try:
                    right = self.truth(e.right)
                finally:
                    self.guards.pop()
                return (e.op, left, right), BOOL
            ta, tb, s = self.numeric(e.left, e.right)
            if e.op in ("+", "-", "*"):
                return (e.op, ta, tb), s
            if e.op == "/":
                ta, tb = self.coerce(ta, s, REAL), self.coerce(tb, s, REAL)
                self.nonzero(tb, REAL)
                return ("/", ta, tb), REAL
            self.nonzero(tb, s)
            if e.op == "//":
                return self.floordiv(ta, tb, s), s
            if e.op == "%":
                if s == INT and isinstance(tb, int) and tb > 0:
                    return ("mod", ta, tb), s
                return ("-", ta, ("*", tb, self.floordiv(ta, tb, s))), s
            raise Untranslatable(f"operator {e.op}")
        if isinstance(e, n.Compare):
            if _is_list(self.state, e.left) or _is_list(self.state, e.right):
                raise Untranslatable("list comparison")
            (ta, sa), (tb, sb) = self.expr(e.left), self.expr(e.right)
            if sa != sb:
                if BOOL in (sa, sb):
                    raise Untranslatable("comparison between bool and number")
                ta, tb = self.coerce(ta, sa, REAL), self.coerce(tb, sb, REAL)
            if e.op == "==":
                return ("=", ta, tb), BOOL
            if e.op == "!=":
                return ("not", ("=", ta, tb)), BOOL
            if sa == BOOL:
                raise Untranslatable("ordering on bool")
            return (e.op, ta, tb), BOOL
        if isinstance(e, n.Subscript):
            arr, length, elem = self.list_terms(e.base)
            return ("select", arr, self.index(e.index, length)), elem
        if isinstance(e, n.LenCall):
            _, length, _ = self.list_terms(e.arg)
            return length, INT
        if isinstance(e, n.AbsCall):
            t, s = self.expr(e.arg)
            if s == BOOL:
                raise Untranslatable("abs of bool")
            zero = Fraction(0) if s == REAL else 0
            return ("ite", (">=", t, zero), t, ("-", t)), s
        if isinstance(e, n.PopCall):
            raise Untranslatable("pop() inside expression")
        if isinstance(e, n.AppendCall):
            raise Untranslatable("append() used as a value")
        if isinstance(e, n.ListLit):
            raise Untranslatable("list used as a scalar")
        if isinstance(e, n.Unsupported):
            raise Untranslatable(e.construct)
        raise Untranslatable(type(e).__name__)


def _may_raise(e) -> bool:
    for x in n.walk_expr(e):
        if isinstance(x, (n.Subscript, n.PopCall, n.Unsupported)):
            return True
        if isinstance(x, n.Binary) and x.op in ("/", "//", "%"):
            return True
    return False


# -- guard facts ---------------------------------------------------------------

_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}
_MIRROR = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


def _facts(state: SsaEnv, cond, holds: bool) -> set[str]:
    """SSA names that ``cond`` evaluating to ``holds`` proves non-negative."""
    if isinstance(cond, n.Unary) and cond.op == "not":
        return _facts(state, cond.operand, not holds)
    if isinstance(cond, n.Binary) and cond.op in ("and", "or"):
        if (cond.op == "and") == holds:
            return _facts(state, cond.left, holds) | _facts(state, cond.right, holds)
        return set()
    if not isinstance(cond, n.Compare):
        return set()
    op = cond.op if holds else _FLIP[cond.op]
    out = set()
    for var_side, other, rel in ((cond.left, cond.right, op), (cond.right, cond.left, _MIRROR[op])):
        if not isinstance(var_side, n.Name) or var_side.id not in state.index:
            continue
        if not isinstance(state.types.vars.get(var_side.id), Scalar):
            continue
        lower_ok = provably_nonneg(state, other) and rel in (">=", ">", "==")
        above_minus_one = isinstance(other, n.IntLit) and other.value >= -1 and rel == ">"
        if lower_ok or above_minus_one:
            out.add(sym_name(var_side.id, state.index[var_side.id]))
    return out


# -- statements ----------------------------------------------------------------


@dataclass
class StepResult:
    state: SsaEnv
    decls: list = field(default_factory=list)
    asserts: list = field(default_factory=list)  # (term, synthetic)


def _assign_scalar(state: SsaEnv, var: str, value, tr: _ExprTranslator, out: StepResult) -> SsaEnv:
    t = state.types.vars.get(var)
    if t is None or isinstance(t, ListOf):
        raise Untranslatable(f"assignment to {var}")
    want = sort_of(t)
    term, s = tr.expr(value)
    term = tr.coerce(term, s, want)
    nonneg = provably_nonneg(state, value) and want == INT
    state, k = state.bump(var)
    out.decls += _declare(var, k, t)
    out.asserts.append((("=", sym_name(var, k), term), False))
    if nonneg:
        state = replace(state, nonneg=state.nonneg | {sym_name(var, k)})
    return state


def _new_list_version(state: SsaEnv, var: str, out: StepResult) -> tuple[SsaEnv, str, str]:
    t = state.types.vars.get(var)
    if not isinstance(t, ListOf):
        raise Untranslatable(f"'{var}' is not a list")
    state, k = state.bump(var)
    out.decls += _declare(var, k, t)
    return state, sym_name(var, k), len_name(var, k)


def _mutate_list(state: SsaEnv, var: str, out: StepResult) -> tuple[SsaEnv, str, str]:
    if any(var in pair for pair in state.aliases):
        raise Untranslatable(f"mutation of aliased list '{var}'")
    return _new_list_version(state, var, out)


def _rebind_list(state: SsaEnv, var: str, value) -> SsaEnv:
    kept = frozenset(pair for pair in state.aliases if var not in pair)
    if isinstance(value, n.Name) and value.id != var:
        kept |= {frozenset((var, value.id))}
    return replace(state, aliases=kept)


def translate_step(state: SsaEnv, step: PathStep) -> StepResult:
    """Constraints contributed by one path step.

    Raises :class:`Untranslatable` when the step falls outside the rule set.
    """
    out = StepResult(state)
    tr = _ExprTranslator(state)
    ref = step.stmt_ref
    if step.kind is NodeKind.CONDITION:
        cond = tr.truth(ref)
        if step.branch_taken is not None:
            out.asserts.append((cond if step.branch_taken else ("not", cond), False))
            facts = _facts(state, ref, step.branch_taken)
            out.state = replace(state, nonneg=state.nonneg | facts)
        out.asserts += [(s, True) for s in tr.sides]
        return out
    if step.kind is not NodeKind.EXPRESSION:
        return out
    s = ref
    if isinstance(s, n.UnsupportedStmt):
        raise Untranslatable(s.construct)
    if isinstance(s, (n.Break, n.Continue)):
        return out
    if isinstance(s, n.Return):
        # the returned value is unconstrained; only a raising evaluation matters
        if s.value is not None and _may_raise(s.value):
            if isinstance(s.value, n.ListLit):
                tr.list_terms(s.value)
            else:
                tr.expr(s.value)
        out.asserts += [(x, True) for x in tr.sides]
        return out
    if isinstance(s, n.AugAssign):
        s = n.Assign(s.target, n.Binary(s.op, s.target, s.value, span=s.span), span=s.span)
    if isinstance(s, n.Assign):
        target, value = s.target, s.value
        if isinstance(target, n.Name):
            var = target.id
            if isinstance(value, n.PopCall):
                arr, length, elem = tr.list_terms(value.base)
                out.asserts.append(((">", length, 0), True))
                popped = ("select", arr, ("-", length, 1))
                t = state.types.vars.get(var)
                st, k = state.bump(var)
                out.decls += _declare(var, k, t)
                out.asserts.append((("=", sym_name(var, k), tr.coerce(popped, elem, sort_of(t))), False))
                st, new_arr, new_len = _mutate_list(st, value.base.id, out)
                out.asserts.append((("=", new_arr, arr), False))
                out.asserts.append((("=", new_len, ("-", length, 1)), False))
                out.state = st
                return out
            if isinstance(state.types.vars.get(var), ListOf):
                arr, length, _ = tr.list_terms(value)
                st, new_arr, new_len = _new_list_version(_rebind_list(state, var, value), var, out)
                out.asserts.append((("=", new_arr, arr), False))
                out.asserts.append((("=", new_len, length), False))
                out.asserts += [(x, True) for x in tr.sides]
                out.state = st
                return out
            out.state = _assign_scalar(state, var, value, tr, out)
            out.asserts += [(x, True) for x in tr.sides]
            return out
        # subscript store
        base = target.base
        arr, length, elem = tr.list_terms(base)
        pos = tr.index(target.index, length)
        term, vs = tr.expr(value)
        term = tr.coerce(term, vs, elem)
        st, new_arr, new_len = _mutate_list(state, base.id, out)
        out.asserts.append((("=", new_arr, ("store", arr, pos, term)), False))
        out.asserts.append((("=", new_len, length), False))
        out.asserts += [(x, True) for x in tr.sides]
        out.state = st
        return out
    if isinstance(s, n.ExprStmt):
        e = s.expr
        if isinstance(e, n.AppendCall):
            arr, length, elem = tr.list_terms(e.base)
            term, vs = tr.expr(e.value)
            term = tr.coerce(term, vs, elem)
            st, new_arr, new_len = _mutate_list(state, e.base.id, out)
            out.asserts.append((("=", new_arr, ("store", arr, length, term)), False))
            out.asserts.append((("=", new_len, ("+", length, 1)), False))
            out.asserts += [(x, True) for x in tr.sides]
            out.state = st
            return out
        if isinstance(e, n.PopCall):
            arr, length, _ = tr.list_terms(e.base)
            out.asserts.append(((">", length, 0), True))
            st, new_arr, new_len = _mutate_list(state, e.base.id, out)
            out.asserts.append((("=", new_arr, arr), False))
            out.asserts.append((("=", new_len, ("-", length, 1)), False))
            out.state = st
            return out
        if isinstance(e, n.Unsupported):
            raise Untranslatable(e.construct)
        raise Untranslatable("expression statement")
    raise Untranslatable(type(s).__name__)


# -- whole paths -----------------------------------------------------------------


@dataclass
class Translated:
    script: SmtScript
    # SSA indices after each step, for integrity checks
    envs: list = field(default_factory=list, repr=False)


@dataclass
class Unsupported:
    step_index: int
    construct: str
    partial: Optional[SmtScript] = field(default=None, repr=False)
    state: Optional[SsaEnv] = field(default=None, repr=False)


TranslationOutcome = Union[Translated, Unsupported]


def apply_step(script: SmtScript, result: StepResult, origin: int) -> None:
    for d in result.decls:
        script.declare(d)
    for term, synthetic in result.asserts:
        script.add(term, origin=origin, synthetic=synthetic)


def translate_path(path: ExecutionPath, env: TypeEnv, start: int = 0,
                   state: Optional[SsaEnv] = None, script: Optional[SmtScript] = None) -> TranslationOutcome:
    """Fold :func:`translate_step` over ``path``; stop at the first untranslatable step.

    ``start``/``state``/``script`` resume a translation, e.g. after a bridge
    fragment covered an unsupported step.
    """
    steps = path.steps
    envs: list = []
    if state is None:
        if not steps or steps[0].kind is not NodeKind.ENTER:
            raise ValueError("path must start at the function's enter step")
        state, script = init_state(env, steps[0].stmt_ref)
        envs.append(dict(state.index))
        start = 1
    assert script is not None
    for i in range(start, len(steps)):
        try:
            result = translate_step(state, steps[i])
        except Untranslatable as exc:
            return Unsupported(i, exc.construct, script, state)
        apply_step(script, result, i)
        state = result.state
        envs.append(dict(state.index))
    return Translated(script, envs)
