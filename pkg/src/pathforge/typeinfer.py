"""Flow-insensitive type inference under a one-type-per-variable assumption.

Annotations are taken as given. Everything else is solved by propagating
constraints from assignments, operators, subscripts and builtin signatures
until nothing changes.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Union

from .frontend import nodes as n
from .frontend.validate import HIDDEN_PREFIX

log = logging.getLogger(__name__)


class Scalar(enum.Enum):
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ListOf:
    elem: Optional[Scalar]

    def __str__(self) -> str:
        return f"list[{self.elem or '?'}]"


@dataclass(frozen=True)
class Opaque:
    """A value the subset cannot describe; only produced by lenient inference."""

    construct: str

    def __str__(self) -> str:
        return f"opaque({self.construct})"


SubsetType = Union[Scalar, ListOf, Opaque]
INT, FLOAT, BOOL = Scalar.INT, Scalar.FLOAT, Scalar.BOOL
NUMERIC = (INT, FLOAT)


class TypeInferenceError(Exception):
    """Inference failure: ``kind`` is ``Conflict`` or ``Unresolved``."""

    def __init__(self, kind: str, var: str, t1=None, t2=None, detail: str = ""):
        self.kind = kind
        self.var = var
        self.t1 = t1
        self.t2 = t2
        if kind == "Conflict":
            msg = f"Conflict: '{var}' used as both {t1} and {t2}"
        else:
            msg = f"{kind}: '{var}'"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass
class TypeEnv:
    vars: dict[str, SubsetType]
    params: list[str]
    warnings: list[str] = field(default_factory=list)

    def __getitem__(self, name: str) -> SubsetType:
        return self.vars[name]

    def param_types(self) -> list[tuple[str, SubsetType]]:
        return [(p, self.vars[p]) for p in self.params]

    def format(self) -> str:
        return "\n".join(f"{k}: {v}" for k, v in self.vars.items())


def annot_type(annot: n.TypeAnnot) -> SubsetType:
    if annot.unsupported:
        return Opaque(annot.unsupported)
    if annot.base == "list":
        return ListOf(Scalar(annot.elem) if annot.elem else None)
    return Scalar(annot.base)


def hidden_index(var: str) -> str:
    return f"{HIDDEN_PREFIX}{var}"


class _Solver:
    def __init__(self, fn: n.FunctionDef, lenient: bool):
        self.fn = fn
        self.lenient = lenient
        self.env: dict[str, SubsetType] = {}
        self.annotated: set[str] = set()
        self.read: set[str] = set()
        self.order: list[str] = []
        self.changed = False
        for p in fn.params:
            self._note(p.name)
            if p.annot is not None:
                self.env[p.name] = annot_type(p.annot)
                self.annotated.add(p.name)

    def _note(self, name: str) -> None:
        if name not in self.order:
            self.order.append(name)

    # -- constraint primitives

    def merge(self, var: str, t: Optional[SubsetType]) -> None:
        self._note(var)
        if t is None:
            return
        cur = self.env.get(var)
        if cur is None:
            self.env[var] = t
            self.changed = True
            return
        if cur == t or isinstance(cur, Opaque) or isinstance(t, Opaque):
            return
        if isinstance(cur, ListOf) and isinstance(t, ListOf):
            if t.elem is None:
                return
            if cur.elem is None:
                self.env[var] = t
                self.changed = True
                return
        detail = "annotation" if var in self.annotated else ""
        raise TypeInferenceError("Conflict", var, cur, t, detail)

    def push(self, e, t: Optional[SubsetType]) -> None:
        """Propagate an expected type ``t`` into expression ``e``."""
        if t is None:
            return
        if isinstance(e, n.Name):
            self.merge(e.id, t)
        elif isinstance(e, (n.Subscript, n.PopCall)) and isinstance(t, Scalar):
            self.push(e.base, ListOf(t))
        elif isinstance(e, n.ListLit) and isinstance(t, ListOf):
            for x in e.elems:
                self.push(x, t.elem)
        elif isinstance(e, n.AbsCall):
            self.push(e.arg, t)
        elif isinstance(e, n.Unary) and e.op == "neg":
            self.push(e.operand, t)
        elif isinstance(e, n.Binary) and e.op in ("+", "-", "*", "//", "%") and t is INT:
            self.push(e.left, INT)
            self.push(e.right, INT)

    # -- expressions

    def ty(self, e, ctx: str = "value") -> Optional[SubsetType]:
        if isinstance(e, n.IntLit):
            return INT
        if isinstance(e, n.FloatLit):
            return FLOAT
        if isinstance(e, n.BoolLit):
            return BOOL
        if isinstance(e, n.Name):
            self.read.add(e.id)
            self._note(e.id)
            return self.env.get(e.id)
        if isinstance(e, n.Unsupported):
            return None
        if isinstance(e, n.Unary):
            if e.op == "not":
                self.ty(e.operand, "test")
                return BOOL
            t = self.ty(e.operand)
            self._need_numeric(t, e, "negation")
            return t
        if isinstance(e, n.Binary):
            if e.op in ("and", "or"):
                sub = "test" if ctx == "test" else "value"
                for side in (e.left, e.right):
                    t = self.ty(side, sub)
                    if sub == "value":
                        self.push(side, BOOL)
                        if t is not None and t != BOOL:
                            raise TypeInferenceError("Conflict", _describe(side), t, BOOL,
                                             f"'{e.op}' used as a value needs bool operands")
                return BOOL
            return self.arith(e)
        if isinstance(e, n.Compare):
            lt, rt = self.ty(e.left), self.ty(e.right)
            for t in (lt, rt):
                if isinstance(t, ListOf):
                    raise TypeInferenceError("Conflict", _describe(e), t, "scalar", "list comparison")
            if lt is None and rt is not None:
                self.push(e.left, rt)
            elif rt is None and lt is not None:
                self.push(e.right, lt)
            elif lt is not None and rt is not None:
                if (lt in NUMERIC) != (rt in NUMERIC):
                    raise TypeInferenceError("Conflict", _describe(e), lt, rt, "comparison operands")
            return BOOL
        if isinstance(e, n.Subscript):
            self.push(e.index, INT)
            it = self.ty(e.index)
            if it is not None and it != INT:
                raise TypeInferenceError("Conflict", _describe(e.index), it, INT, "list index")
            bt = self.ty(e.base)
            if bt is None:
                self.push(e.base, ListOf(None))
                return None
            if not isinstance(bt, ListOf):
                if isinstance(bt, Opaque):
                    return None
                raise TypeInferenceError("Conflict", _describe(e.base), bt, "list", "subscript")
            return bt.elem
        if isinstance(e, n.LenCall):
            t = self.ty(e.arg)
            if t is None:
                self.push(e.arg, ListOf(None))
            elif not isinstance(t, (ListOf, Opaque)):
                raise TypeInferenceError("Conflict", _describe(e.arg), t, "list", "len()")
            return INT
        if isinstance(e, n.AbsCall):
            t = self.ty(e.arg)
            self._need_numeric(t, e, "abs()")
            return t
        if isinstance(e, n.PopCall):
            t = self.ty(e.base)
            if t is None:
                self.push(e.base, ListOf(None))
                return None
            return t.elem if isinstance(t, ListOf) else None
        if isinstance(e, n.AppendCall):
            return None
        if isinstance(e, n.ListLit):
            elem = None
            for x in e.elems:
                t = self.ty(x)
                if isinstance(t, ListOf):
                    raise TypeInferenceError("Conflict", _describe(e), t, "scalar", "nested list")
                if t is not None:
                    if elem is not None and t != elem:
                        raise TypeInferenceError("Conflict", _describe(e), elem, t, "heterogeneous list literal")
                    elem = t
            if elem is not None:
                for x in e.elems:
                    self.push(x, elem)
            return ListOf(elem)
        raise AssertionError(f"unexpected expression {e!r}")

    def _need_numeric(self, t, e, what: str) -> None:
        if t is not None and t not in NUMERIC and not isinstance(t, Opaque):
            raise TypeInferenceError("Conflict", _describe(e), t, "number", what)

    def arith(self, e: n.Binary) -> Optional[SubsetType]:
        lt, rt = self.ty(e.left), self.ty(e.right)
        for t, side in ((lt, e.left), (rt, e.right)):
            if isinstance(t, ListOf):
                raise TypeInferenceError("Conflict", _describe(side), t, "number", f"operator {e.op}")
            self._need_numeric(t, side, f"operator {e.op}")
        if e.op == "/":
            if lt == INT and rt == INT:
                raise TypeInferenceError("Conflict", _describe(e), INT, FLOAT, "'/' between ints; use '//'")
            if lt is None and rt == INT:
                self.push(e.left, FLOAT)
            if rt is None and lt == INT:
                self.push(e.right, FLOAT)
            return FLOAT
        if lt is None and rt is not None:
            self.push(e.left, rt)
            return None
        if rt is None and lt is not None:
            self.push(e.right, lt)
            return None
        if lt is None or rt is None or isinstance(lt, Opaque) or isinstance(rt, Opaque):
            return None
        return FLOAT if FLOAT in (lt, rt) else INT

    # -- statements

    def target_type(self, target) -> Optional[SubsetType]:
        if isinstance(target, n.Name):
            return self.env.get(target.id)
        bt = self.env.get(target.base.id)
        return bt.elem if isinstance(bt, ListOf) else None

    def assign_to(self, target, value_t: Optional[SubsetType], value_expr) -> None:
        if isinstance(target, n.Name):
            self.merge(target.id, value_t)
            cur = self.env.get(target.id)
            if value_t is None:
                self.push(value_expr, cur)
            return
        base = target.base.id
        self._note(base)
        self.push(target.index, INT)
        self.ty(target.index)
        if value_t is not None:
            if isinstance(value_t, ListOf):
                raise TypeInferenceError("Conflict", base, ListOf(value_t), "list", "nested list")
            self.merge(base, ListOf(value_t))
        else:
            bt = self.env.get(base)
            if bt is None:
                self.merge(base, ListOf(None))
            elif isinstance(bt, ListOf):
                self.push(value_expr, bt.elem)

    def stmt(self, s) -> None:
        if isinstance(s, n.Assign):
            self.assign_to(s.target, self.ty(s.value), s.value)
        elif isinstance(s, n.AugAssign):
            if isinstance(s.target, n.Subscript):
                self.ty(s.target.base)
            combined = n.Binary(s.op, s.target, s.value, span=s.span)
            self.assign_to(s.target, self.ty(combined), combined)
        elif isinstance(s, n.If):
            self.ty(s.cond, "test")
            for x in s.body + s.orelse:
                self.stmt(x)
        elif isinstance(s, n.While):
            self.ty(s.cond, "test")
            for x in s.body:
                self.stmt(x)
        elif isinstance(s, n.ForRange):
            self.merge(s.var, INT)
            for bound in (s.start, s.stop, s.step):
                self.push(bound, INT)
                t = self.ty(bound)
                if t is not None and t != INT and not isinstance(t, Opaque):
                    raise TypeInferenceError("Conflict", _describe(bound), t, INT, "range bound")
            for x in s.body:
                self.stmt(x)
        elif isinstance(s, n.ForEach):
            self.merge(hidden_index(s.var), INT)
            it = self.ty(s.iterable)
            if isinstance(it, ListOf):
                self.merge(s.var, it.elem)
            elif it is not None and not isinstance(it, Opaque):
                raise TypeInferenceError("Conflict", _describe(s.iterable), it, "list", "for-each")
            vt = self.env.get(s.var)
            if isinstance(vt, Scalar):
                self.push(s.iterable, ListOf(vt))
            elif it is None:
                self.push(s.iterable, ListOf(None))
            self._note(s.var)
            for x in s.body:
                self.stmt(x)
        elif isinstance(s, n.Return):
            if s.value is not None:
                t = self.ty(s.value)
                if self.fn.return_annot is not None and not self.fn.return_annot.unsupported:
                    want = annot_type(self.fn.return_annot)
                    if t is None:
                        self.push(s.value, want)
                    elif t != want and not (isinstance(t, ListOf) and isinstance(want, ListOf)
                                            and None in (t.elem, want.elem)):
                        raise TypeInferenceError("Conflict", "return", t, want, "return annotation")
        elif isinstance(s, n.ExprStmt):
            e = s.expr
            if isinstance(e, n.AppendCall):
                vt = self.ty(e.value)
                self.ty(e.base)
                if isinstance(vt, ListOf):
                    raise TypeInferenceError("Conflict", _describe(e.base), vt, "scalar", "nested list")
                self.merge(e.base.id, ListOf(vt) if vt is not None else ListOf(None))
                bt = self.env.get(e.base.id)
                if isinstance(bt, ListOf):
                    self.push(e.value, bt.elem)
            else:
                self.ty(e)

    def solve(self) -> TypeEnv:
        for _ in range(100):
            self.changed = False
            for s in self.fn.body:
                self.stmt(s)
            if not self.changed:
                break
        warnings = []
        result: dict[str, SubsetType] = {}
        for name in self.order:
            t = self.env.get(name)
            if t is None:
                if name in self.read:
                    if not self.lenient:
                        raise TypeInferenceError("Unresolved", name)
                    t = Opaque("unresolved type")
                else:
                    warnings.append(f"'{name}' is never constrained; defaulting to int")
                    t = INT
            elif isinstance(t, ListOf) and t.elem is None:
                warnings.append(f"elements of '{name}' are never constrained; defaulting to list[int]")
                t = ListOf(INT)
            result[name] = t
        for w in warnings:
            log.warning("%s: %s", self.fn.name, w)
        return TypeEnv(result, [p.name for p in self.fn.params], warnings)


def _describe(e) -> str:
    from .frontend.printer import expr_text
    try:
        return expr_text(e)
    except Exception:
        return repr(e)


def infer_types(fn: n.FunctionDef, lenient: bool = False) -> TypeEnv:
    """Assign one :data:`SubsetType` to every parameter and variable of ``fn``.

    Raises :class:`TypeInferenceError` (``Conflict`` or ``Unresolved``). With
    ``lenient`` set, names that cannot be typed become :class:`Opaque` rather
    than failing, so functions containing unsupported constructs can still be
    translated up to the first offending step.
    """
    return _Solver(fn, lenient).solve()
