"""Render subset trees back to source text.

Operands that are not atoms are always parenthesized, which keeps the output
unambiguous and makes ``parse(print(tree)) == tree`` hold by construction.
"""
from __future__ import annotations

from . import nodes as n

INDENT = "    "


def _operand(e) -> str:
    text = expr_text(e)
    if isinstance(e, (n.Binary, n.Compare, n.Unary)):
        return f"({text})"
    if isinstance(e, (n.IntLit, n.FloatLit)) and e.value < 0:
        return f"({text})"
    return text


def expr_text(e) -> str:
    if isinstance(e, n.BoolLit):
        return "True" if e.value else "False"
    if isinstance(e, (n.IntLit, n.FloatLit)):
        return repr(e.value)
    if isinstance(e, n.Name):
        return e.id
    if isinstance(e, n.Unary):
        if e.op == "neg":
            return f"-{_operand(e.operand)}"
        return f"not {_operand(e.operand)}"
    if isinstance(e, (n.Binary, n.Compare)):
        return f"{_operand(e.left)} {e.op} {_operand(e.right)}"
    if isinstance(e, n.Subscript):
        return f"{_operand(e.base)}[{expr_text(e.index)}]"
    if isinstance(e, n.LenCall):
        return f"len({expr_text(e.arg)})"
    if isinstance(e, n.AbsCall):
        return f"abs({expr_text(e.arg)})"
    if isinstance(e, n.PopCall):
        return f"{_operand(e.base)}.pop()"
    if isinstance(e, n.AppendCall):
        return f"{_operand(e.base)}.append({expr_text(e.value)})"
    if isinstance(e, n.ListLit):
        return "[" + ", ".join(expr_text(x) for x in e.elems) + "]"
    if isinstance(e, n.Unsupported):
        return e.text or f"<{e.construct}>"
    raise TypeError(f"not an expression: {e!r}")


def stmt_header(s) -> str:
    """One-line text for a statement; compound statements give their header."""
    if isinstance(s, n.Assign):
        return f"{expr_text(s.target)} = {expr_text(s.value)}"
    if isinstance(s, n.AugAssign):
        return f"{expr_text(s.target)} {s.op}= {expr_text(s.value)}"
    if isinstance(s, n.Return):
        return "return" if s.value is None else f"return {expr_text(s.value)}"
    if isinstance(s, n.ExprStmt):
        return expr_text(s.expr)
    if isinstance(s, n.Break):
        return "break"
    if isinstance(s, n.Continue):
        return "continue"
    if isinstance(s, n.If):
        return f"if {expr_text(s.cond)}:"
    if isinstance(s, n.While):
        return f"while {expr_text(s.cond)}:"
    if isinstance(s, n.ForRange):
        args = [expr_text(s.start), expr_text(s.stop)]
        if not (isinstance(s.step, n.IntLit) and s.step.value == 1):
            args.append(expr_text(s.step))
        return f"for {s.var} in range({', '.join(args)}):"
    if isinstance(s, n.ForEach):
        return f"for {s.var} in {expr_text(s.iterable)}:"
    if isinstance(s, n.UnsupportedStmt):
        return s.text or f"<{s.construct}>"
    raise TypeError(f"not a statement: {s!r}")


def _block(body, depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    for s in body:
        out.append(pad + stmt_header(s))
        if isinstance(s, n.If):
            _block(s.body, depth + 1, out)
            if s.orelse:
                out.append(pad + "else:")
                _block(s.orelse, depth + 1, out)
        elif isinstance(s, (n.While, n.ForRange, n.ForEach)):
            _block(s.body, depth + 1, out)


def function_text(fn: n.FunctionDef, depth: int = 0) -> str:
    params = [f"{p.name}: {p.annot}" if p.annot else p.name for p in fn.params]
    if fn.is_method:
        params.insert(0, "self")
    ret = f" -> {fn.return_annot}" if fn.return_annot else ""
    out = [INDENT * depth + f"def {fn.name}({', '.join(params)}){ret}:"]
    _block(fn.body, depth + 1, out)
    return "\n".join(out)


def pretty_print(unit: n.SourceUnit) -> str:
    chunks = []
    top = [f for f in unit.functions if not f.is_method]
    methods = [f for f in unit.functions if f.is_method]
    for fn in top:
        chunks.append(function_text(fn))
    if unit.enclosing_class_name is not None:
        body = "\n\n".join(function_text(f, 1) for f in methods) or "    pass"
        chunks.append(f"class {unit.enclosing_class_name}:\n{body}")
    return "\n\n".join(chunks) + "\n"
