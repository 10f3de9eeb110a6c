"""Parse subset source into :mod:`pathforge.frontend.nodes` trees.

CPython's own ``ast`` module does the tokenizing and grammar work; this module
maps its output onto the much smaller subset tree, replacing everything else
with :class:`Unsupported` placeholders that ``validate_subset`` reports.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass

from . import nodes as n

_ARITH = {
    ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/",
    ast.FloorDiv: "//", ast.Mod: "%",
}
_CMP = {
    ast.Eq: "==", ast.NotEq: "!=", ast.Lt: "<", ast.LtE: "<=",
    ast.Gt: ">", ast.GtE: ">=",
}
_EXPR_NAMES = {
    ast.Dict: "dictionary", ast.Set: "set", ast.ListComp: "list comprehension",
    ast.SetComp: "set comprehension", ast.DictComp: "dictionary comprehension",
    ast.GeneratorExp: "generator expression", ast.Lambda: "lambda",
    ast.IfExp: "conditional expression", ast.Tuple: "tuple",
    ast.JoinedStr: "string formatting", ast.Attribute: "attribute access",
    ast.Starred: "starred expression", ast.Await: "await", ast.Yield: "yield",
    ast.YieldFrom: "yield", ast.NamedExpr: "assignment expression",
    ast.Slice: "slice",
}
_STMT_NAMES = {
    ast.Pass: "pass", ast.Import: "import", ast.ImportFrom: "import",
    ast.Try: "exception handling", ast.Raise: "raise", ast.With: "with statement",
    ast.Global: "global", ast.Nonlocal: "nonlocal", ast.Delete: "del",
    ast.Assert: "assert", ast.AnnAssign: "annotated assignment",
    ast.FunctionDef: "nested function definition",
    ast.AsyncFunctionDef: "async function", ast.ClassDef: "nested class",
}


class ParseError(Exception):
    """Syntax error in the input text."""

    def __init__(self, message: str, line: int, column: int, path: str = "<string>"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.path = path

    def __str__(self) -> str:
        return f"{self.path}:{self.line}:{self.column}: ParseError: {self.message}"


class UnsupportedConstruct(Exception):
    """Valid Python that falls outside the analyzable subset."""

    def __init__(self, construct: str, span: n.SourceSpan | None = None, path: str = "<string>"):
        super().__init__(construct)
        self.construct = construct
        self.span = span or n.NO_SPAN
        self.path = path

    def __str__(self) -> str:
        return (f"{self.path}:{self.span.line}:{self.span.column}: "
                f"UnsupportedConstruct: {self.construct}")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: n.SourceSpan

    def format(self, path: str) -> str:
        return f"{path}:{self.span.line}:{self.span.column}: {self.code}: {self.message}"


def _span(node: ast.AST) -> n.SourceSpan:
    line = getattr(node, "lineno", 1) or 1
    col = getattr(node, "col_offset", 0) or 0
    end_line = getattr(node, "end_lineno", line) or line
    end_col = getattr(node, "end_col_offset", col) or col
    length = end_col - col if end_line == line else 0
    return n.SourceSpan(line, col, max(length, 0))


class _Converter:
    def __init__(self, source: str):
        self.source = source

    def text(self, node: ast.AST) -> str:
        return ast.get_source_segment(self.source, node) or ""

    def unsupported(self, construct: str, node: ast.AST) -> n.Unsupported:
        return n.Unsupported(construct, self.text(node), span=_span(node))

    def unsupported_stmt(self, construct: str, node: ast.AST) -> n.UnsupportedStmt:
        return n.UnsupportedStmt(construct, self.text(node), span=_span(node))

    # -- annotations

    def annot(self, node: ast.AST | None) -> n.TypeAnnot | None:
        if node is None:
            return None
        sp = _span(node)
        text = self.text(node)
        if isinstance(node, ast.Name) and node.id in ("int", "float", "bool"):
            return n.TypeAnnot(node.id, span=sp)
        if isinstance(node, ast.Name) and node.id in ("list", "List"):
            return n.TypeAnnot("list", None, node.id, span=sp)
        if (isinstance(node, ast.Subscript) and isinstance(node.value, ast.Name)
                and node.value.id in ("list", "List")):
            inner = node.slice
            if isinstance(inner, ast.Name) and inner.id in ("int", "float", "bool"):
                return n.TypeAnnot("list", inner.id, node.value.id, span=sp)
            return n.TypeAnnot("list", None, text, unsupported="nested list type", span=sp)
        if isinstance(node, ast.Name) and node.id == "str":
            return n.TypeAnnot("str", None, text, unsupported="string type", span=sp)
        return n.TypeAnnot("?", None, text, unsupported=f"type annotation {text}", span=sp)

    # -- expressions

    def expr(self, node: ast.AST) -> n.Expr:
        sp = _span(node)
        if isinstance(node, ast.Constant):
            v = node.value
            if isinstance(v, bool):
                return n.BoolLit(v, span=sp)
            if isinstance(v, int):
                return n.IntLit(v, span=sp)
            if isinstance(v, float):
                return n.FloatLit(v, span=sp)
            if isinstance(v, str):
                return self.unsupported("string literal", node)
            if v is None:
                return self.unsupported("None", node)
            return self.unsupported(f"{type(v).__name__} literal", node)
        if isinstance(node, ast.Name):
            return n.Name(node.id, span=sp)
        if isinstance(node, ast.UnaryOp):
            operand = self.expr(node.operand)
            if isinstance(node.op, ast.USub):
                # Fold negative numeric literals so `-2` is a literal index.
                if isinstance(operand, n.IntLit):
                    return n.IntLit(-operand.value, span=sp)
                if isinstance(operand, n.FloatLit):
                    return n.FloatLit(-operand.value, span=sp)
                return n.Unary("neg", operand, span=sp)
            if isinstance(node.op, ast.Not):
                return n.Unary("not", operand, span=sp)
            return self.unsupported(f"unary {type(node.op).__name__}", node)
        if isinstance(node, ast.BinOp):
            op = _ARITH.get(type(node.op))
            if op is None:
                return self.unsupported(f"operator {type(node.op).__name__}", node)
            return n.Binary(op, self.expr(node.left), self.expr(node.right), span=sp)
        if isinstance(node, ast.BoolOp):
            op = "and" if isinstance(node.op, ast.And) else "or"
            values = [self.expr(v) for v in node.values]
            acc = values[0]
            for v in values[1:]:
                acc = n.Binary(op, acc, v, span=sp)
            return acc
        if isinstance(node, ast.Compare):
            return self.compare(node)
        if isinstance(node, ast.Subscript):
            if isinstance(node.slice, ast.Slice):
                return self.unsupported("slice", node)
            return n.Subscript(self.expr(node.value), self.expr(node.slice), span=sp)
        if isinstance(node, ast.Call):
            return self.call(node)
        if isinstance(node, ast.List):
            elems = []
            for e in node.elts:
                if isinstance(e, ast.List):
                    return self.unsupported("nested list", node)
                elems.append(self.expr(e))
            return n.ListLit(tuple(elems), span=sp)
        name = _EXPR_NAMES.get(type(node), type(node).__name__)
        return self.unsupported(name, node)

    def compare(self, node: ast.Compare) -> n.Expr:
        sp = _span(node)
        operands = [self.expr(node.left)] + [self.expr(c) for c in node.comparators]
        parts = []
        for i, op_node in enumerate(node.ops):
            op = _CMP.get(type(op_node))
            if op is None:
                return self.unsupported(f"comparison {type(op_node).__name__}", node)
            parts.append(n.Compare(op, operands[i], operands[i + 1], span=sp))
        acc = parts[0]
        for part in parts[1:]:
            acc = n.Binary("and", acc, part, span=sp)
        return acc

    def call(self, node: ast.Call) -> n.Expr:
        sp = _span(node)
        if node.keywords:
            return self.unsupported("keyword arguments", node)
        func = node.func
        if isinstance(func, ast.Name):
            if func.id == "len" and len(node.args) == 1:
                return n.LenCall(self.expr(node.args[0]), span=sp)
            if func.id == "abs" and len(node.args) == 1:
                return n.AbsCall(self.expr(node.args[0]), span=sp)
            if func.id == "str":
                return self.unsupported("str conversion", node)
            if func.id == "range":
                return self.unsupported("range outside for loop", node)
            return self.unsupported(f"call to {func.id}", node)
        if isinstance(func, ast.Attribute):
            base = self.expr(func.value)
            if func.attr == "pop" and not node.args:
                return n.PopCall(base, span=sp)
            if func.attr == "append" and len(node.args) == 1:
                return n.AppendCall(base, self.expr(node.args[0]), span=sp)
            return self.unsupported(f"method call .{func.attr}()", node)
        return self.unsupported("indirect call", node)

    # -- statements

    def target(self, node: ast.AST):
        if isinstance(node, ast.Name):
            return n.Name(node.id, span=_span(node))
        if isinstance(node, ast.Subscript) and isinstance(node.value, ast.Name):
            if isinstance(node.slice, ast.Slice):
                return None
            return n.Subscript(n.Name(node.value.id, span=_span(node.value)),
                               self.expr(node.slice), span=_span(node))
        return None

    def body(self, stmts: list[ast.stmt], allow_docstring: bool = False) -> tuple:
        out = []
        for i, s in enumerate(stmts):
            if (allow_docstring and i == 0 and isinstance(s, ast.Expr)
                    and isinstance(s.value, ast.Constant) and isinstance(s.value.value, str)):
                continue
            out.append(self.stmt(s))
        return tuple(out)

    def stmt(self, node: ast.stmt) -> n.Stmt:
        sp = _span(node)
        if isinstance(node, ast.Assign):
            if len(node.targets) != 1 or isinstance(node.targets[0], (ast.Tuple, ast.List)):
                return self.unsupported_stmt("multiple assignment targets", node)
            target = self.target(node.targets[0])
            if target is None:
                return self.unsupported_stmt("assignment target", node)
            value = self.expr(node.value)
            if isinstance(value, n.AppendCall):
                value = self.unsupported("append() used as a value", node.value)
            if isinstance(value, n.PopCall) and not isinstance(target, n.Name):
                value = self.unsupported("pop() inside expression", node.value)
            return n.Assign(target, self._no_nested_effects(value, top_ok=True), span=sp)
        if isinstance(node, ast.AugAssign):
            op = _ARITH.get(type(node.op))
            target = self.target(node.target)
            if op is None or target is None:
                return self.unsupported_stmt("augmented assignment", node)
            return n.AugAssign(target, op, self._no_nested_effects(self.expr(node.value)), span=sp)
        if isinstance(node, ast.If):
            return n.If(self._no_nested_effects(self.expr(node.test)),
                        self.body(node.body), self.body(node.orelse), span=sp)
        if isinstance(node, ast.While):
            if node.orelse:
                return self.unsupported_stmt("loop else clause", node)
            return n.While(self._no_nested_effects(self.expr(node.test)), self.body(node.body), span=sp)
        if isinstance(node, ast.For):
            return self.for_stmt(node)
        if isinstance(node, ast.Return):
            value = None if node.value is None else self._no_nested_effects(self.expr(node.value))
            return n.Return(value, span=sp)
        if isinstance(node, ast.Expr):
            value = self.expr(node.value)
            if isinstance(value, (n.AppendCall, n.PopCall)):
                return n.ExprStmt(self._no_nested_effects(value, top_ok=True), span=sp)
            if isinstance(value, n.Unsupported):
                return n.ExprStmt(value, span=sp)
            return self.unsupported_stmt("expression statement", node)
        if isinstance(node, ast.Break):
            return n.Break(span=sp)
        if isinstance(node, ast.Continue):
            return n.Continue(span=sp)
        return self.unsupported_stmt(_STMT_NAMES.get(type(node), type(node).__name__), node)

    def _no_nested_effects(self, expr: n.Expr, top_ok: bool = False) -> n.Expr:
        """Replace append/pop calls nested inside larger expressions."""
        if top_ok and isinstance(expr, (n.PopCall, n.AppendCall)):
            if isinstance(expr, n.AppendCall):
                return n.AppendCall(expr.base, self._no_nested_effects(expr.value), span=expr.span)
            return expr
        if isinstance(expr, n.PopCall):
            return n.Unsupported("pop() inside expression", "", span=expr.span)
        if isinstance(expr, n.AppendCall):
            return n.Unsupported("append() used as a value", "", span=expr.span)
        kids = n.child_exprs(expr)
        if not kids:
            return expr
        new = tuple(self._no_nested_effects(k) for k in kids)
        if all(a is b for a, b in zip(kids, new)):
            return expr
        return _rebuild(expr, new)

    def for_stmt(self, node: ast.For) -> n.Stmt:
        sp = _span(node)
        if node.orelse:
            return self.unsupported_stmt("loop else clause", node)
        if not isinstance(node.target, ast.Name):
            return self.unsupported_stmt("tuple unpacking in for loop", node)
        var = node.target.id
        body = self.body(node.body)
        it = node.iter
        if isinstance(it, ast.Call) and isinstance(it.func, ast.Name) and it.func.id == "range":
            args = [self.expr(a) for a in it.args]
            if not 1 <= len(args) <= 3 or it.keywords:
                return self.unsupported_stmt("range with unsupported arguments", node)
            if len(args) == 1:
                start, stop, step = n.IntLit(0, span=sp), args[0], n.IntLit(1, span=sp)
            elif len(args) == 2:
                start, stop, step = args[0], args[1], n.IntLit(1, span=sp)
            else:
                start, stop, step = args
            if not isinstance(step, n.IntLit) or step.value == 0:
                step = n.Unsupported("non-literal range step", self.text(it), span=_span(it))
            return n.ForRange(var, self._no_nested_effects(start), self._no_nested_effects(stop),
                              step, body, span=sp)
        return n.ForEach(var, self._no_nested_effects(self.expr(it)), body, span=sp)

    # -- definitions

    def function(self, node: ast.AST, in_class: bool) -> n.FunctionDef | n.UnsupportedStmt:
        if isinstance(node, ast.AsyncFunctionDef):
            return self.unsupported_stmt("async function", node)
        assert isinstance(node, ast.FunctionDef)
        sp = _span(node)
        a = node.args
        if a.vararg or a.kwarg or a.kwonlyargs or a.posonlyargs or a.defaults:
            return self.unsupported_stmt("parameter kinds beyond plain positional", node)
        if node.decorator_list:
            return self.unsupported_stmt("decorator", node)
        args = list(a.args)
        is_method = False
        if in_class:
            if not args or args[0].arg != "self":
                return self.unsupported_stmt("method without self", node)
            args = args[1:]
            is_method = True
        params = tuple(n.Param(p.arg, self.annot(p.annotation), span=_span(p)) for p in args)
        body = self.body(node.body, allow_docstring=True)
        if is_method and any(isinstance(x, ast.Name) and x.id == "self" for x in ast.walk(node)):
            body = (n.UnsupportedStmt("self reference", "self", span=sp),) + body
        return n.FunctionDef(node.name, params, body, self.annot(node.returns), is_method, span=sp)


def _rebuild(expr, kids):
    if isinstance(expr, n.Unary):
        return n.Unary(expr.op, kids[0], span=expr.span)
    if isinstance(expr, n.Binary):
        return n.Binary(expr.op, kids[0], kids[1], span=expr.span)
    if isinstance(expr, n.Compare):
        return n.Compare(expr.op, kids[0], kids[1], span=expr.span)
    if isinstance(expr, n.Subscript):
        return n.Subscript(kids[0], kids[1], span=expr.span)
    if isinstance(expr, n.LenCall):
        return n.LenCall(kids[0], span=expr.span)
    if isinstance(expr, n.AbsCall):
        return n.AbsCall(kids[0], span=expr.span)
    if isinstance(expr, n.ListLit):
        return n.ListLit(tuple(kids), span=expr.span)
    return expr


def build_unit(source: str, path: str = "<string>") -> n.SourceUnit:
    """Convert ``source`` without rejecting anything; out-of-subset parts become placeholders."""
    try:
        tree = ast.parse(source, filename=path)
    except SyntaxError as exc:
        raise ParseError(exc.msg or "invalid syntax", exc.lineno or 1,
                         max((exc.offset or 1) - 1, 0), path) from None
    conv = _Converter(source)
    functions = []
    extras = []
    class_name = None
    for i, item in enumerate(tree.body):
        if isinstance(item, ast.FunctionDef):
            functions.append(conv.function(item, in_class=False))
        elif isinstance(item, ast.ClassDef):
            if class_name is not None:
                extras.append(conv.unsupported_stmt("multiple classes", item))
                continue
            class_name = item.name
            if item.bases or item.keywords or item.decorator_list:
                extras.append(conv.unsupported_stmt("class inheritance", item))
            for j, member in enumerate(item.body):
                if isinstance(member, (ast.FunctionDef, ast.AsyncFunctionDef)):
                    functions.append(conv.function(member, in_class=True))
                elif (j == 0 and isinstance(member, ast.Expr)
                      and isinstance(member.value, ast.Constant)
                      and isinstance(member.value.value, str)):
                    continue
                else:
                    extras.append(conv.unsupported_stmt("class attribute", member))
        elif isinstance(item, ast.ImportFrom) and item.module == "typing":
            continue
        elif (i == 0 and isinstance(item, ast.Expr) and isinstance(item.value, ast.Constant)
              and isinstance(item.value.value, str)):
            continue
        else:
            extras.append(conv.unsupported_stmt(
                _STMT_NAMES.get(type(item), "module-level statement"), item))
    fns = tuple(f for f in functions if isinstance(f, n.FunctionDef))
    extras.extend(f for f in functions if not isinstance(f, n.FunctionDef))
    return n.SourceUnit(fns, source, path, class_name, tuple(extras))


def parse_unit(source: str, path: str = "<string>", strict: bool = True) -> n.SourceUnit:
    """Parse ``source`` into a :class:`SourceUnit`.

    With ``strict`` (the default) the first subset violation is raised as
    :class:`UnsupportedConstruct`. Non-strict parsing keeps placeholders in the
    tree so downstream stages can report the offending path step instead.
    """
    from .validate import validate_subset

    unit = build_unit(source, path)
    if strict:
        diags = validate_subset(unit)
        if diags:
            d = diags[0]
            raise UnsupportedConstruct(d.message, d.span, path)
    return unit


def parse_function(source: str, name: str | None = None, strict: bool = True) -> n.FunctionDef:
    unit = parse_unit(source, strict=strict)
    if name is None:
        return unit.functions[0]
    return unit.function(name)
