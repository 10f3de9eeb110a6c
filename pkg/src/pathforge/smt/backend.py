"""Run an external SMT-LIB solver on a script and classify its answer."""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .model import Model, ModelParseError, parse_model
from .script import SmtScript, emit_smtlib
from .terms import SexprError, parse_sexprs

DEFAULT_SOLVER = "z3"
SOLVER_ENV = "PATHFORGE_SOLVER"


@dataclass(frozen=True)
class SolverConfig:
    command: tuple = (DEFAULT_SOLVER,)
    timeout: float = 10.0
    logic: str = "ALL"

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if isinstance(self.command, str):
            object.__setattr__(self, "command", tuple(shlex.split(self.command)))

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        env = os.environ.get(SOLVER_ENV)
        if env and "command" not in overrides:
            overrides["command"] = tuple(shlex.split(env))
        return cls(**overrides)


@dataclass(frozen=True)
class Sat:
    model: Model
    raw: str = field(default="", compare=False, repr=False)


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str


@dataclass(frozen=True)
class SolverFailure:
    exit_info: str
    stderr: str = ""

    @property
    def missing_solver(self) -> bool:
        return self.exit_info == "not-found"


SolverVerdict = Union[Sat, Unsat, Unknown, SolverFailure]


def _classify(stdout: str, returncode: int, stderr: str, decls) -> SolverVerdict:
    try:
        items = parse_sexprs(stdout)
    except SexprError as exc:
        return SolverFailure(f"exit {returncode}", f"unreadable output ({exc}): {stdout[:300]}")
    for pos, item in enumerate(items):
        if isinstance(item, list) and item and item[0] == "error":
            return SolverFailure(f"exit {returncode}", " ".join(map(str, item[1:]))[:500])
        if item == "unsat":
            return Unsat()
        if item == "unknown":
            return Unknown("solver returned unknown")
        if item == "sat":
            rest = items[pos + 1:]
            if not decls:
                return Sat(Model(), "")
            if not rest:
                return SolverFailure(f"exit {returncode}", "sat without a model")
            model_sx = rest[0]
            if isinstance(model_sx, list) and model_sx and model_sx[0] == "error":
                return SolverFailure(f"exit {returncode}", " ".join(map(str, model_sx[1:]))[:500])
            from .terms import show
            text = show(model_sx)
            try:
                return Sat(parse_model(text, decls), text)
            except ModelParseError as exc:
                return SolverFailure("model-parse", str(exc)[:500])
    return SolverFailure(f"exit {returncode}", (stderr or stdout)[:500])


def solve_text(text: str, decls, cfg: SolverConfig = SolverConfig(), keep_dir: Optional[Path] = None,
               stem: str = "query") -> SolverVerdict:
    """Solve SMT-LIB ``text``; ``decls`` drive model parsing and defaults."""
    with tempfile.TemporaryDirectory(prefix="pathforge-") as tmp:
        query = Path(tmp) / f"{stem}.smt2"
        query.write_text(text)
        try:
            proc = subprocess.run([*cfg.command, str(query)], capture_output=True, text=True,
                                  timeout=cfg.timeout)
        except FileNotFoundError:
            return SolverFailure("not-found", f"solver executable {cfg.command[0]!r} not found")
        except subprocess.TimeoutExpired:
            verdict: SolverVerdict = Unknown("timeout")
            raw = ""
        else:
            verdict = _classify(proc.stdout, proc.returncode, proc.stderr, decls)
            raw = proc.stdout
    if keep_dir is not None:
        keep_dir.mkdir(parents=True, exist_ok=True)
        (keep_dir / f"{stem}.smt2").write_text(text)
        (keep_dir / f"{stem}.out").write_text(raw)
    return verdict


def solve(script: SmtScript, cfg: SolverConfig = SolverConfig(), keep_dir: Optional[Path] = None,
          stem: str = "query", extra: tuple = ()) -> SolverVerdict:
    return solve_text(emit_smtlib(script, cfg.logic, extra), script.decls, cfg, keep_dir, stem)


def solver_available(cfg: SolverConfig = SolverConfig()) -> bool:
    from shutil import which
    return bool(cfg.command) and which(cfg.command[0]) is not None
