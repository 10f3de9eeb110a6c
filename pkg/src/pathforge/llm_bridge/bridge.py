"""Generative translation of chunks the rule translator rejects, and the direct-solve fallback.

Nothing an endpoint returns is trusted. A fragment is accepted only after it
parses, declares fresh SSA symbols consistent with its claimed ``env``, and the
prior script plus the fragment goes through the solver without an error. A
fallback input is accepted only after the interpreter replays it.
"""
from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from ..cfg_path import ChunkStrategy, ExecutionPath, PathChunk
from ..frontend import nodes as n
from ..interpreter import DEFAULT_STEP_LIMIT, Verdict, path_verdict
from ..smt.backend import SolverConfig, SolverFailure, solve
from ..smt.script import SmtScript, SmtSymbol
from ..smt.terms import SexprError, parse_sexprs, render, to_sort, to_term
from ..testcase import TestInput, coerce_args, type_spelling
from ..typeinfer import Opaque, TypeEnv
from .knowledge import Template, chunk_text
from .transport import KEY_ENV, LiveTransport, ReplayTransport

PRIOR_TAIL = 8  # trailing prior assertions shown to the endpoint

_SYMBOL = re.compile(r"^_(.+)_(\d+)(_len)?$")
_JSON_BLOCK = re.compile(r"\{.*\}", re.S)

TRANSLATE_SYSTEM = (
    "You translate steps of a Python execution path into SMT-LIB 2 constraints. "
    "Variables are in SSA form: version k of variable v is the constant _v_k, and a list v "
    "is an (Array Int T) constant _v_k with an Int length _v_k_len. A step that writes v "
    "declares the next version. Use only declare-const and assert commands. "
    'Reply with one JSON object: {"smt": "<commands>", "env": {"<var>": <index>, ...}} '
    "where env is the SSA environment after the chunk."
)

SOLVE_SYSTEM = (
    "You are given a Python function and one execution path through it. Find argument "
    "values that make the function follow exactly this path. "
    'Reply with one JSON object: {"args": [<value per parameter, in order>]}, or '
    '{"unsat": true} if no input can follow the path.'
)


class BridgeMode(enum.Enum):
    OFF = "off"
    REPLAY = "replay"
    LIVE = "live"


@dataclass(frozen=True)
class BridgeConfig:
    endpoint: Optional[str] = None
    model: str = "default"
    api_key_env: str = KEY_ENV
    k: int = 2
    max_refine: int = 3
    chunking: ChunkStrategy = ChunkStrategy.BY_LINE
    mode: BridgeMode = BridgeMode.OFF
    fixture_dir: Optional[Path] = None
    max_inflight: int = 4
    log_dir: Optional[Path] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_refine < 0:
            raise ValueError("max_refine must be >= 0")
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", BridgeMode(self.mode))
        if isinstance(self.chunking, str):
            object.__setattr__(self, "chunking", ChunkStrategy(self.chunking))
        if self.mode is BridgeMode.REPLAY and self.fixture_dir is None:
            raise ValueError("replay mode needs a fixture directory")

    @property
    def attempts(self) -> int:
        # every request counts, so max_refine=0 still makes one
        return max(self.max_refine, 1)


def make_transport(cfg: BridgeConfig):
    if cfg.mode is BridgeMode.OFF:
        raise ValueError("bridge is off")
    if cfg.mode is BridgeMode.REPLAY:
        return ReplayTransport(cfg.fixture_dir)
    return LiveTransport(cfg.endpoint, cfg.model, cfg.api_key_env, cfg.log_dir, cfg.max_inflight)


@dataclass(frozen=True)
class Fragment:
    text: str
    env_out: dict
    attempts: int
    decls: tuple = field(default=(), repr=False)
    asserts: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class FallbackInput:
    input: TestInput
    verdict: Verdict


@dataclass(frozen=True)
class FallbackUnsat:
    pass


@dataclass(frozen=True)
class BridgeFailed:
    reason: str
    attempts: int


BridgeOutcome = Union[Fragment, FallbackInput, FallbackUnsat, BridgeFailed]


class FragmentRejected(ValueError):
    pass


class SolverMissing(RuntimeError):
    pass


# -- response handling -------------------------------------------------------------


def extract_json(content: str) -> dict:
    """The JSON object in a reply, tolerating surrounding prose or code fences."""
    try:
        value = json.loads(content)
    except ValueError:
        match = _JSON_BLOCK.search(content)
        if not match:
            raise FragmentRejected("reply contains no JSON object")
        try:
            value = json.loads(match.group(0))
        except ValueError as exc:
            raise FragmentRejected(f"reply JSON does not parse: {exc}") from exc
    if not isinstance(value, dict):
        raise FragmentRejected("reply JSON is not an object")
    return value


def _symbol_info(name: str, sort) -> SmtSymbol:
    m = _SYMBOL.match(name)
    if not m:
        raise FragmentRejected(f"symbol {name} is not an SSA name _<var>_<k>")
    return SmtSymbol(name, sort, m.group(1), int(m.group(2)), bool(m.group(3)))


def parse_fragment(smt: str, env_in: dict, env_out: dict) -> tuple[tuple, tuple]:
    """Declarations and assertion terms of a fragment, checked against the SSA environments."""
    try:
        commands = parse_sexprs(smt)
    except SexprError as exc:
        raise FragmentRejected(f"fragment does not parse: {exc}") from exc
    decls, asserts = [], []
    for cmd in commands:
        if not isinstance(cmd, list) or not cmd or not isinstance(cmd[0], str):
            raise FragmentRejected(f"not a command: {cmd!r}")
        try:
            if cmd[0] == "declare-const" and len(cmd) == 3 and isinstance(cmd[1], str):
                decls.append(_symbol_info(cmd[1], to_sort(cmd[2])))
            elif cmd[0] == "assert" and len(cmd) == 2:
                asserts.append(to_term(cmd[1]))
            else:
                raise FragmentRejected(f"only declare-const and assert are allowed, got ({cmd[0]} ...)")
        except SexprError as exc:
            raise FragmentRejected(str(exc)) from exc
    for var, k in env_in.items():
        if env_out.get(var, k) < k:
            raise FragmentRejected(f"env lowers the index of {var} from {k}")
    for d in decls:
        lo, hi = env_in.get(d.var, -1), env_out.get(d.var, env_in.get(d.var, -1))
        if not lo < d.index <= hi:
            raise FragmentRejected(
                f"{d.name} is not a fresh version of {d.var} (env in {lo}, out {hi})")
    declared = {d.name for d in decls}
    for var, k in env_out.items():
        if k > env_in.get(var, -1) and f"_{var}_{k}" not in declared:
            raise FragmentRejected(f"env sets {var} to version {k} but _{var}_{k} is not declared")
    return tuple(decls), tuple(asserts)


def _check_fragment(reply: str, env_in: dict, prior: SmtScript, solver_cfg: SolverConfig,
                    origin: Optional[int]) -> tuple[str, dict, tuple, tuple]:
    obj = extract_json(reply)
    smt, env = obj.get("smt"), obj.get("env")
    if not isinstance(smt, str):
        raise FragmentRejected('reply has no "smt" string')
    if not isinstance(env, dict) or not all(
            isinstance(k, str) and isinstance(v, int) and not isinstance(v, bool) for k, v in env.items()):
        raise FragmentRejected('"env" must map variable names to integer indices')
    env_out = {**env_in, **env}
    decls, asserts = parse_fragment(smt, env_in, env_out)
    combined = prior.copy()
    try:
        for d in decls:
            combined.declare(d)
        for t in asserts:
            combined.add(t, origin=origin)
        combined.check_well_formed()
    except ValueError as exc:
        raise FragmentRejected(str(exc)) from exc
    verdict = solve(combined, solver_cfg)
    if isinstance(verdict, SolverFailure):
        if verdict.missing_solver:
            raise SolverMissing(verdict.stderr)
        raise FragmentRejected(f"solver error: {verdict.stderr.strip() or verdict.exit_info}")
    return smt, env_out, decls, asserts


# -- requests ------------------------------------------------------------------------


def _template_example(t: Template) -> str:
    return (f"### example {t.id}: {t.name}\nchunk:\n{t.key_chunk}\n"
            f"env in: {json.dumps(t.ssa_env_in, sort_keys=True)}\n"
            f"constraints:\n{t.target_constraints}\n"
            f"env out: {json.dumps(t.ssa_env_out, sort_keys=True)}")


def translate_request(chunk: PathChunk, env_in: dict, prior: SmtScript, templates) -> dict:
    """The semantic content of a translation request; its hash keys replay fixtures."""
    return {
        "task": "translate",
        "chunk": chunk_text(chunk),
        "env_in": dict(sorted(env_in.items())),
        "prior_tail": [render(a.term) for a in prior.asserts[-PRIOR_TAIL:]],
        "templates": [t.id for t in templates],
    }


def _translate_messages(request: dict, templates) -> list[dict]:
    examples = "\n\n".join(_template_example(t) for t in templates)
    prior = "\n".join(f"(assert {a})" for a in request["prior_tail"]) or "(none)"
    user = (f"{examples}\n\n### task\nprior constraints (tail):\n{prior}\n"
            f"chunk:\n{request['chunk']}\nenv in: {json.dumps(request['env_in'])}")
    return [{"role": "system", "content": TRANSLATE_SYSTEM}, {"role": "user", "content": user}]


def _templates(ranked) -> list[Template]:
    return [r[0] if isinstance(r, tuple) else r for r in ranked]


def generate_fragment(chunk: PathChunk, env_in: dict, prior: SmtScript, templates, cfg: BridgeConfig,
                      transport=None, solver_cfg: Optional[SolverConfig] = None) -> Union[Fragment, BridgeFailed]:
    """Ask the endpoint for the chunk's constraints, feeding rejections back up to ``cfg.attempts`` times.

    ``templates`` is a retrieval result (templates or ``(template, score)`` pairs).
    Transport problems raise :class:`TransportError` rather than counting as attempts.
    """
    if cfg.mode is BridgeMode.OFF:
        raise ValueError("bridge is off")
    transport = transport or make_transport(cfg)
    solver_cfg = solver_cfg or SolverConfig.from_env()
    templates = _templates(templates)
    request = translate_request(chunk, env_in, prior, templates)
    conversation = transport.conversation(request)
    messages = _translate_messages(request, templates)
    reason = ""
    for attempt in range(1, cfg.attempts + 1):
        reply = conversation.send(messages)
        try:
            smt, env_out, decls, asserts = _check_fragment(reply, dict(env_in), prior, solver_cfg, chunk.start)
        except SolverMissing as exc:
            return BridgeFailed(f"solver not available: {exc}", attempt)
        except FragmentRejected as exc:
            reason = str(exc)
            messages = messages + [
                {"role": "assistant", "content": reply},
                {"role": "user", "content": f"The fragment was rejected: {reason}\nReturn a corrected JSON object."},
            ]
            continue
        return Fragment(smt, env_out, attempt, decls, asserts)
    return BridgeFailed(f"no valid fragment after {cfg.attempts} attempts; last error: {reason}", cfg.attempts)


def solve_request(source: str, fn: n.FunctionDef, path: ExecutionPath, env: TypeEnv) -> dict:
    params = [f"{p}: {'unknown' if isinstance(env[p], Opaque) else type_spelling(env[p])}" for p in env.params]
    return {"task": "solve", "source": source, "function": fn.name, "params": params, "path": path.format()}


def _solve_messages(request: dict) -> list[dict]:
    user = (f"source:\n{request['source']}\nfunction: {request['function']}({', '.join(request['params'])})\n"
            f"path (line, kind, statement, branch outcome):\n{request['path']}")
    return [{"role": "system", "content": SOLVE_SYSTEM}, {"role": "user", "content": user}]


def _read_solution(reply: str, env: TypeEnv):
    obj = extract_json(reply)
    if obj.get("unsat") is True:
        return FallbackUnsat()
    args = obj.get("args")
    if not isinstance(args, list):
        raise FragmentRejected('reply has neither "args" nor "unsat": true')
    try:
        return coerce_args(args, env)
    except (TypeError, ValueError) as exc:
        raise FragmentRejected(f"bad arguments: {exc}") from exc


def llm_solve(source: str, fn: n.FunctionDef, path: ExecutionPath, env: TypeEnv, cfg: BridgeConfig,
              transport=None, max_steps: int = DEFAULT_STEP_LIMIT) -> BridgeOutcome:
    """Ask for inputs that follow ``path`` directly; proposed inputs are replayed before reporting.

    An unsatisfiability claim is returned as :class:`FallbackUnsat` without any check.
    """
    if cfg.mode is BridgeMode.OFF:
        raise ValueError("bridge is off")
    transport = transport or make_transport(cfg)
    request = solve_request(source, fn, path, env)
    conversation = transport.conversation(request)
    messages = _solve_messages(request)
    reason = ""
    for attempt in (1, 2):
        reply = conversation.send(messages)
        try:
            result = _read_solution(reply, env)
        except FragmentRejected as exc:
            reason = str(exc)
            messages = messages + [
                {"role": "assistant", "content": reply},
                {"role": "user", "content": f"Unreadable reply: {reason}\nAnswer with the JSON object only."},
            ]
            continue
        if isinstance(result, FallbackUnsat):
            return result
        return FallbackInput(result, path_verdict(fn, result, path, max_steps))
    return BridgeFailed(f"malformed reply after re-prompt: {reason}", 2)
