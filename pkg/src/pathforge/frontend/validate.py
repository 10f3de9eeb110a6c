from __future__ import annotations

from . import nodes as n
from .parser import Diagnostic

UNSUPPORTED = "UnsupportedConstruct"
VIOLATION = "SubsetViolation"

HIDDEN_PREFIX = "_idx_"


def _assigned_names(body) -> set[str]:
    out = set()
    for s in n.iter_stmts(body):
        if isinstance(s, (n.Assign, n.AugAssign)) and isinstance(s.target, n.Name):
            out.add(s.target.id)
        elif isinstance(s, (n.ForRange, n.ForEach)):
            out.add(s.var)
    return out


def _mutated_lists(body) -> tuple[set[str], set[str]]:
    """Lists whose length (append/pop) or contents (subscript store) change in ``body``."""
    resized, stored = set(), set()
    for s in n.iter_stmts(body):
        for e in n.child_exprs(s):
            for sub in n.walk_expr(e):
                if isinstance(sub, (n.AppendCall, n.PopCall)) and isinstance(sub.base, n.Name):
                    resized.add(sub.base.id)
        if isinstance(s, (n.Assign, n.AugAssign)) and isinstance(s.target, n.Subscript):
            if isinstance(s.target.base, n.Name):
                stored.add(s.target.base.id)
    return resized, stored


def _check_range_bounds(loop: n.ForRange, diags: list[Diagnostic]) -> None:
    # range() evaluates its bounds once; the desugared guard re-reads them,
    # so the body must leave them unchanged.
    rebound = _assigned_names(loop.body)
    resized, stored = _mutated_lists(loop.body)
    if loop.var in rebound:
        diags.append(Diagnostic(VIOLATION, f"loop variable '{loop.var}' reassigned in body", loop.span))
    for bound in (loop.stop, loop.step):
        for e in n.walk_expr(bound):
            if isinstance(e, n.Name):
                if e.id in rebound or e.id in resized:
                    diags.append(Diagnostic(
                        VIOLATION, f"range bound '{e.id}' modified inside the loop", loop.span))
            if isinstance(e, n.Subscript) and isinstance(e.base, n.Name) and e.base.id in stored:
                diags.append(Diagnostic(
                    VIOLATION, f"range bound reads '{e.base.id}' which the loop modifies", loop.span))


def _check_foreach(loop: n.ForEach, diags: list[Diagnostic]) -> None:
    if loop.var in _assigned_names(loop.body):
        diags.append(Diagnostic(VIOLATION, f"loop variable '{loop.var}' reassigned in body", loop.span))
    if not isinstance(loop.iterable, (n.Name, n.Unsupported)):
        diags.append(Diagnostic(UNSUPPORTED, "for-each over a non-variable iterable", loop.span))


def _check_expr(expr, diags: list[Diagnostic]) -> None:
    for e in n.walk_expr(expr):
        if isinstance(e, n.Unsupported):
            diags.append(Diagnostic(UNSUPPORTED, e.construct, e.span))
        elif isinstance(e, n.Name) and e.id.startswith(HIDDEN_PREFIX):
            diags.append(Diagnostic(VIOLATION, f"reserved identifier '{e.id}'", e.span))
        elif isinstance(e, (n.PopCall, n.AppendCall)) and not isinstance(e.base, n.Name):
            diags.append(Diagnostic(UNSUPPORTED, "method call on a non-variable", e.span))


def _check_function(fn: n.FunctionDef, diags: list[Diagnostic]) -> None:
    names = [p.name for p in fn.params]
    if len(set(names)) != len(names):
        diags.append(Diagnostic(VIOLATION, f"duplicate parameter in '{fn.name}'", fn.span))
    for p in fn.params:
        if p.annot is not None and p.annot.unsupported:
            diags.append(Diagnostic(UNSUPPORTED, p.annot.unsupported, p.annot.span))
    if fn.return_annot is not None and fn.return_annot.unsupported:
        diags.append(Diagnostic(UNSUPPORTED, fn.return_annot.unsupported, fn.return_annot.span))
    if not fn.body:
        diags.append(Diagnostic(VIOLATION, f"function '{fn.name}' has an empty body", fn.span))
    for s in n.iter_stmts(fn.body):
        if isinstance(s, n.UnsupportedStmt):
            diags.append(Diagnostic(UNSUPPORTED, s.construct, s.span))
            continue
        if isinstance(s, n.ForRange):
            _check_range_bounds(s, diags)
            if s.var.startswith(HIDDEN_PREFIX):
                diags.append(Diagnostic(VIOLATION, f"reserved identifier '{s.var}'", s.span))
        elif isinstance(s, n.ForEach):
            _check_foreach(s, diags)
        elif isinstance(s, (n.Assign, n.AugAssign)):
            t = s.target
            tname = t.id if isinstance(t, n.Name) else getattr(t.base, "id", "")
            if tname.startswith(HIDDEN_PREFIX):
                diags.append(Diagnostic(VIOLATION, f"reserved identifier '{tname}'", s.span))
        for e in n.child_exprs(s):
            _check_expr(e, diags)


def validate_subset(unit: n.SourceUnit) -> list[Diagnostic]:
    """Return one diagnostic per out-of-subset construct; an empty list means the unit is clean."""
    diags: list[Diagnostic] = []
    for extra in unit.extras:
        diags.append(Diagnostic(UNSUPPORTED, extra.construct, extra.span))
    seen = set()
    for fn in unit.functions:
        if fn.name in seen:
            diags.append(Diagnostic(VIOLATION, f"duplicate function '{fn.name}'", fn.span))
        seen.add(fn.name)
        _check_function(fn, diags)
    diags.sort(key=lambda d: (d.span.line, d.span.column))
    return diags
