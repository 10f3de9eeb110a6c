"""Template knowledge base and similarity retrieval.

Chunks and template keys are compared as bags of tokens: identifiers are
split on underscores and case changes and lowercased, numbers and operator
characters are kept as tokens, and line numbers are dropped. Ranking is by
cosine similarity of the count vectors, ties broken by template id.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from ..cfg_path import PathChunk, PathStep
from ..smt.terms import SexprError, parse_sexprs

_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|\d+|==|!=|<=|>=|//|->|\S")
_CAMEL = re.compile(r"[A-Z]?[a-z0-9]+|[A-Z]+(?![a-z])")


def step_text(step: PathStep) -> str:
    """A step without its line number: ``kind<TAB>statement[ markers]``."""
    text = f"{step.kind.value}\t{step.stmt_text}"
    if step.loop_iteration is not None:
        text += f" @iter={step.loop_iteration}"
    if step.branch_taken is not None:
        text += " ->taken" if step.branch_taken else " ->not-taken"
    return text


def chunk_text(chunk: PathChunk) -> str:
    return "\n".join(step_text(s) for s in chunk.steps)


def tokens(text: str) -> list[str]:
    out = []
    for tok in _TOKEN.findall(text):
        if tok[0].isalpha() or tok[0] == "_":
            parts = [p for p in tok.split("_") if p]
            for part in parts:
                out.extend(w.lower() for w in _CAMEL.findall(part))
        else:
            out.append(tok)
    return out


def vectorize(text: str) -> Counter:
    return Counter(tokens(text))


def cosine(a: Counter, b: Counter) -> float:
    dot = sum(v * b[k] for k, v in a.items() if k in b)
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)


@dataclass(frozen=True)
class Template:
    id: str
    name: str
    key_chunk: str
    ssa_env_in: dict
    target_constraints: str
    ssa_env_out: dict
    notes: str = ""

    def validate(self) -> None:
        try:
            cmds = parse_sexprs(self.target_constraints)
        except SexprError as exc:
            raise ValueError(f"template {self.id}: {exc}") from exc
        for c in cmds:
            if not isinstance(c, list) or not c or c[0] not in ("declare-const", "assert"):
                raise ValueError(f"template {self.id}: unexpected command {c!r}")
        for var, k in self.ssa_env_in.items():
            if self.ssa_env_out.get(var, -1) < k:
                raise ValueError(f"template {self.id}: index of {var} decreases")


class TemplateStore:
    def __init__(self, templates):
        self.templates = list(templates)
        ids = [t.id for t in self.templates]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate template ids")
        for t in self.templates:
            t.validate()
        self.vectors = {t.id: vectorize(t.key_chunk) for t in self.templates}
        self.vocabulary = sorted(set().union(*self.vectors.values())) if self.vectors else []

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "TemplateStore":
        if path is None:
            text = resources.files(__package__).joinpath("templates.json").read_text()
        else:
            text = Path(path).read_text()
        return cls(Template(**rec) for rec in json.loads(text))

    def __len__(self) -> int:
        return len(self.templates)

    def get(self, template_id: str) -> Template:
        for t in self.templates:
            if t.id == template_id:
                return t
        raise KeyError(template_id)


def retrieve(query, store: TemplateStore, k: int = 2) -> list[tuple[Template, float]]:
    """Top-``k`` templates for a chunk (or raw chunk text), best first."""
    if k < 1:
        raise ValueError("k must be >= 1")
    text = chunk_text(query) if isinstance(query, PathChunk) else str(query)
    qv = vectorize(text)
    scored = [(t, cosine(qv, store.vectors[t.id])) for t in store.templates]
    scored.sort(key=lambda pair: (-pair[1], pair[0].id))
    return scored[:k]
