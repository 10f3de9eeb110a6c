from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .terms import Sort, Term, is_array, render, render_sort, symbols_in


@dataclass(frozen=True)
class SmtSymbol:
    """A declared constant. ``var``/``index`` tie it back to a source variable."""

    name: str
    sort: Sort
    var: Optional[str] = None
    index: Optional[int] = None
    is_len: bool = False


@dataclass(frozen=True)
class Assertion:
    term: Term
    origin: Optional[int] = None  # index of the path step that produced it
    synthetic: bool = False  # length/bounds/divisor side condition


@dataclass
class SmtScript:
    decls: list[SmtSymbol] = field(default_factory=list)
    asserts: list[Assertion] = field(default_factory=list)
    param_map: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def declare(self, sym: SmtSymbol) -> None:
        if any(d.name == sym.name for d in self.decls):
            raise ValueError(f"symbol {sym.name} declared twice")
        self.decls.append(sym)

    def add(self, term: Term, origin: Optional[int] = None, synthetic: bool = False) -> None:
        self.asserts.append(Assertion(term, origin, synthetic))

    def symbol(self, name: str) -> SmtSymbol:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    def copy(self) -> "SmtScript":
        return SmtScript(list(self.decls), list(self.asserts), dict(self.param_map))

    def check_well_formed(self) -> None:
        """Every symbol must be declared before the first assertion using it."""
        declared = {d.name for d in self.decls}
        for i, a in enumerate(self.asserts):
            missing = symbols_in(a.term) - declared
            if missing:
                raise ValueError(f"assertion {i} uses undeclared {sorted(missing)}")
        arrays = [d for d in self.decls if is_array(d.sort)]
        names = {d.name for d in self.decls}
        for d in arrays:
            if f"{d.name}_len" not in names:
                raise ValueError(f"array {d.name} has no length symbol")

    def origin_lines(self) -> str:
        """Sidecar mapping ``assert-index<TAB>step-index``; unattributed asserts are skipped."""
        return "".join(f"{k}\t{a.origin}\n" for k, a in enumerate(self.asserts) if a.origin is not None)


def emit_smtlib(script: SmtScript, logic: str = "ALL", extra: tuple = ()) -> str:
    """Render ``script`` as SMT-LIB 2 text. Output is a pure function of the script."""
    lines = [f"(set-logic {logic})", "(set-option :produce-models true)"]
    for d in script.decls:
        lines.append(f"(declare-const {d.name} {render_sort(d.sort)})")
    for a in script.asserts:
        lines.append(f"(assert {render(a.term)})")
    for t in extra:
        lines.append(f"(assert {render(t)})")
    lines.append("(check-sat)")
    if script.decls:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"
