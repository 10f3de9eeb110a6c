"""Abstract syntax tree for the analyzable Python subset.

Nodes are frozen dataclasses. Spans never take part in equality, so two
trees compare equal when they have the same structure regardless of layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int = 0
    length: int = 0

    def __post_init__(self):
        if self.line < 1:
            raise ValueError(f"line must be >= 1, got {self.line}")


NO_SPAN = SourceSpan(1, 0, 0)


@dataclass(frozen=True)
class Node:
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False, kw_only=True)


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class FloatLit(Node):
    value: float


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class Name(Node):
    id: str


@dataclass(frozen=True)
class Unary(Node):
    op: str  # "neg" | "not"
    operand: "Expr"


@dataclass(frozen=True)
class Binary(Node):
    op: str  # + - * / // % and or
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Compare(Node):
    op: str  # == != < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Subscript(Node):
    base: "Expr"
    index: "Expr"


@dataclass(frozen=True)
class LenCall(Node):
    arg: "Expr"


@dataclass(frozen=True)
class AbsCall(Node):
    arg: "Expr"


@dataclass(frozen=True)
class PopCall(Node):
    base: "Expr"


@dataclass(frozen=True)
class AppendCall(Node):
    base: "Expr"
    value: "Expr"


@dataclass(frozen=True)
class ListLit(Node):
    elems: tuple


@dataclass(frozen=True)
class Unsupported(Node):
    """Placeholder left where the source used something outside the subset."""

    construct: str
    text: str = ""


Expr = Union[
    IntLit, FloatLit, BoolLit, Name, Unary, Binary, Compare, Subscript,
    LenCall, AbsCall, PopCall, AppendCall, ListLit, Unsupported,
]

ARITH_OPS = ("+", "-", "*", "/", "//", "%")
BOOL_OPS = ("and", "or")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")


# -- statements --------------------------------------------------------------


@dataclass(frozen=True)
class Assign(Node):
    target: Union[Name, Subscript]
    value: Expr


@dataclass(frozen=True)
class AugAssign(Node):
    target: Union[Name, Subscript]
    op: str
    value: Expr


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    body: tuple
    orelse: tuple = ()


@dataclass(frozen=True)
class While(Node):
    cond: Expr
    body: tuple


@dataclass(frozen=True)
class ForRange(Node):
    var: str
    start: Expr
    stop: Expr
    step: Expr
    body: tuple


@dataclass(frozen=True)
class ForEach(Node):
    var: str
    iterable: Expr
    body: tuple


@dataclass(frozen=True)
class Return(Node):
    value: Optional[Expr] = None


@dataclass(frozen=True)
class ExprStmt(Node):
    expr: Expr


@dataclass(frozen=True)
class Break(Node):
    pass


@dataclass(frozen=True)
class Continue(Node):
    pass


@dataclass(frozen=True)
class UnsupportedStmt(Node):
    construct: str
    text: str = ""


Stmt = Union[
    Assign, AugAssign, If, While, ForRange, ForEach, Return, ExprStmt,
    Break, Continue, UnsupportedStmt,
]


# -- definitions -------------------------------------------------------------


@dataclass(frozen=True)
class TypeAnnot(Node):
    """A parameter or return annotation: ``int``, ``float``, ``bool`` or a list of them.

    ``base`` is one of ``int``/``float``/``bool``/``list``; ``elem`` is set for
    subscripted list annotations. ``spelling`` keeps ``List`` vs ``list`` so the
    printer reproduces the source. Anything else is recorded with
    ``unsupported`` naming the construct.
    """

    base: str
    elem: Optional[str] = None
    spelling: str = ""
    unsupported: Optional[str] = None

    def __str__(self) -> str:
        if self.unsupported is not None:
            return self.spelling or self.unsupported
        if self.base == "list":
            head = self.spelling or "List"
            return f"{head}[{self.elem}]" if self.elem else head
        return self.base


@dataclass(frozen=True)
class Param(Node):
    name: str
    annot: Optional[TypeAnnot] = None


@dataclass(frozen=True)
class FunctionDef(Node):
    name: str
    params: tuple
    body: tuple
    return_annot: Optional[TypeAnnot] = None
    is_method: bool = False

    def param_names(self) -> list[str]:
        return [p.name for p in self.params]

    def signature(self) -> str:
        parts = []
        for p in self.params:
            parts.append(f"{p.name}: {p.annot}" if p.annot else p.name)
        return f"{self.name}({', '.join(parts)})"


@dataclass(frozen=True)
class SourceUnit:
    functions: tuple
    source_text: str = field(default="", compare=False, repr=False)
    path: str = field(default="<string>", compare=False)
    enclosing_class_name: Optional[str] = None
    # Out-of-subset module-level items, kept for diagnostics.
    extras: tuple = field(default=(), compare=False, repr=False)

    def function(self, name: str) -> FunctionDef:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)


def iter_stmts(body):
    """Yield every statement in ``body`` depth-first, nested ones included."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            yield from iter_stmts(stmt.body)
            yield from iter_stmts(stmt.orelse)
        elif isinstance(stmt, (While, ForRange, ForEach)):
            yield from iter_stmts(stmt.body)


def child_exprs(node):
    """Direct expression children of an expression or statement."""
    if isinstance(node, Unary):
        return (node.operand,)
    if isinstance(node, (Binary, Compare)):
        return (node.left, node.right)
    if isinstance(node, Subscript):
        return (node.base, node.index)
    if isinstance(node, (LenCall, AbsCall)):
        return (node.arg,)
    if isinstance(node, PopCall):
        return (node.base,)
    if isinstance(node, AppendCall):
        return (node.base, node.value)
    if isinstance(node, ListLit):
        return node.elems
    if isinstance(node, (Assign, AugAssign)):
        return (node.target, node.value)
    if isinstance(node, (If, While)):
        return (node.cond,)
    if isinstance(node, ForRange):
        return (node.start, node.stop, node.step)
    if isinstance(node, ForEach):
        return (node.iterable,)
    if isinstance(node, Return):
        return (node.value,) if node.value is not None else ()
    if isinstance(node, ExprStmt):
        return (node.expr,)
    return ()


def walk_expr(expr):
    yield expr
    for child in child_exprs(expr):
        yield from walk_expr(child)


def names_in(expr) -> set[str]:
    return {e.id for e in walk_expr(expr) if isinstance(e, Name)}
