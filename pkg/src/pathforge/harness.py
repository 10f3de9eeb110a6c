"""Corpus runner: parse, type, align example traces, translate, solve, decode and replay.

A bench run writes ``report.json`` plus one artifact file per program under the
output directory. Records are ordered by (file, function, path index) no matter
how many workers ran them.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

from .cfg_path import (
    AlignError, Bounds, ChunkStrategy, ExecutionPath, PathChunk, align_trace, build_cfg, chunk_path,
)
from .frontend import nodes as n
from .frontend.parser import ParseError, UnsupportedConstruct, parse_unit
from .interpreter import DEFAULT_STEP_LIMIT, Failed, Verdict, path_verdict, run, verdict_name
from .llm_bridge import (
    BridgeConfig, BridgeFailed, BridgeMode, FallbackInput, FallbackUnsat, TemplateStore,
    generate_fragment, llm_solve, make_transport, retrieve,
)
from .smt.backend import Sat, SolverConfig, SolverFailure, Unknown, Unsat, solve
from .smt.model import eval_model
from .smt.script import SmtScript
from .testcase import DecodeError, TestInput, coerce_args, decode_model, emit_artifact, parse_args_literal
from .translator import Translated, Unsupported, translate_path
from .typeinfer import TypeEnv, TypeInferenceError, infer_types

TRACE_LIMIT = 20
REPORT_VERSION = 1

# translation sources
RULES, BRIDGE, FALLBACK = "rules", "bridge", "fallback"


@dataclass(frozen=True)
class HarnessConfig:
    bounds: Bounds = Bounds()
    solver: SolverConfig = SolverConfig()
    bridge: BridgeConfig = BridgeConfig()
    corpus_dir: Optional[Path] = None
    out_dir: Optional[Path] = None
    jobs: int = 1
    keep_smt: bool = False
    interpreter_steps: int = DEFAULT_STEP_LIMIT

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.corpus_dir is not None and not Path(self.corpus_dir).is_dir():
            raise ValueError(f"corpus directory {self.corpus_dir} does not exist")


# -- config file -------------------------------------------------------------------

CONFIG_KEYS = {
    "solver_cmd": "solver command line (default: z3, or $PATHFORGE_SOLVER)",
    "timeout": "seconds per solver query (default 10)",
    "logic": "SMT-LIB logic name (default ALL)",
    "max_steps": "path length bound and trace truncation length (default 20)",
    "max_loop_iterations": "loop unrolling bound for path enumeration (default 3)",
    "max_paths": "paths enumerated per function (default 256)",
    "jobs": "parallel per-path workers (default 1)",
    "keep_smt": "keep every query and raw solver output under <out>/smt (default false)",
    "bridge": "off | replay | live (default off)",
    "fixture_dir": "replay fixture directory (required for replay)",
    "endpoint": "completion endpoint URL for live mode (default $PATHFORGE_LLM_ENDPOINT)",
    "model": "model name sent to the endpoint",
    "templates_k": "templates retrieved per chunk (default 2)",
    "max_refine": "fragment attempts per chunk (default 3)",
    "chunking": "line | condition (default line)",
    "corpus": "corpus directory for bench",
    "out": "output directory",
}


def load_config_file(path: Path) -> dict:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return data


def config_from_settings(s: dict) -> HarnessConfig:
    """Build a config from flat settings (config-file keys); absent keys take defaults."""
    solver = SolverConfig.from_env(**({"command": s["solver_cmd"]} if s.get("solver_cmd") else {}),
                                   timeout=float(s.get("timeout", 10.0)), logic=s.get("logic", "ALL"))
    bounds = Bounds(int(s.get("max_steps", 20)), int(s.get("max_loop_iterations", 3)), int(s.get("max_paths", 256)))
    out = Path(s["out"]) if s.get("out") else None
    bridge = BridgeConfig(
        endpoint=s.get("endpoint"), model=s.get("model", "default"), k=int(s.get("templates_k", 2)),
        max_refine=int(s.get("max_refine", 3)), chunking=s.get("chunking", "line"), mode=s.get("bridge", "off"),
        fixture_dir=Path(s["fixture_dir"]) if s.get("fixture_dir") else None,
        log_dir=out / "transcripts" if out else None)
    return HarnessConfig(bounds, solver, bridge, Path(s["corpus"]) if s.get("corpus") else None, out,
                         int(s.get("jobs", 1)), bool(s.get("keep_smt", False)))


# -- single path pipeline ------------------------------------------------------------


@dataclass
class PathResult:
    source: str  # rules | bridge | fallback
    solver: str  # sat | unsat | unknown | failure | unsupported | missing-solver
    verdict: Optional[Verdict] = None
    input: Optional[TestInput] = None
    script: Optional[SmtScript] = field(default=None, repr=False)
    detail: str = ""
    fragments: int = 0


@dataclass
class Context:
    """Per-run shared state; everything here is read-only once built."""

    config: HarnessConfig
    store: Optional[TemplateStore] = None
    transport: object = None

    @classmethod
    def build(cls, config: HarnessConfig, transport=None) -> "Context":
        if config.bridge.mode is BridgeMode.OFF:
            return cls(config)
        return cls(config, TemplateStore.load(), transport or make_transport(config.bridge))


def _chunk_from(path: ExecutionPath, i: int, strategy: ChunkStrategy) -> PathChunk:
    """The chunk covering step ``i``, starting at ``i`` (earlier steps are already translated)."""
    for chunk in chunk_path(path, strategy):
        end = chunk.start + len(chunk.steps)
        if chunk.start <= i < end:
            return PathChunk(path.steps[i:end], strategy, i)
    raise IndexError(i)


def _translate_with_bridge(path: ExecutionPath, env: TypeEnv, ctx: Context):
    """Rules first; each unsupported chunk goes to the bridge and translation resumes after it."""
    outcome = translate_path(path, env)
    fragments = 0
    bcfg = ctx.config.bridge
    while isinstance(outcome, Unsupported) and bcfg.mode is not BridgeMode.OFF:
        chunk = _chunk_from(path, outcome.step_index, bcfg.chunking)
        ranked = retrieve(chunk, ctx.store, bcfg.k)
        state = outcome.state
        frag = generate_fragment(chunk, dict(state.index), outcome.partial, ranked, bcfg,
                                 ctx.transport, ctx.config.solver)
        if isinstance(frag, BridgeFailed):
            return outcome, fragments, frag.reason
        fragments += 1
        script = outcome.partial.copy()
        for d in frag.decls:
            script.declare(d)
        for t in frag.asserts:
            script.add(t, origin=chunk.start)
        state = replace(state, index=dict(frag.env_out))
        outcome = translate_path(path, env, chunk.start + len(chunk.steps), state, script)
    return outcome, fragments, ""


def solve_path(fn: n.FunctionDef, env: TypeEnv, path: ExecutionPath, ctx: Context,
               source_text: str = "", stem: str = "query") -> PathResult:
    cfg = ctx.config
    outcome, fragments, bridge_error = _translate_with_bridge(path, env, ctx)
    if isinstance(outcome, Unsupported):
        detail = f"step {outcome.step_index}: {outcome.construct}"
        if cfg.bridge.mode is BridgeMode.OFF:
            return PathResult(RULES, "unsupported", detail=detail)
        fb = llm_solve(source_text, fn, path, env, cfg.bridge, ctx.transport, cfg.interpreter_steps)
        detail += f"; bridge: {bridge_error}" if bridge_error else ""
        if isinstance(fb, FallbackInput):
            return PathResult(FALLBACK, "sat", fb.verdict, fb.input, detail=detail, fragments=fragments)
        if isinstance(fb, FallbackUnsat):
            return PathResult(FALLBACK, "unsat", detail=detail + "; unsat claim (unverified)", fragments=fragments)
        return PathResult(FALLBACK, "unsupported", detail=f"{detail}; fallback: {fb.reason}", fragments=fragments)

    assert isinstance(outcome, Translated)
    script = outcome.script
    source = BRIDGE if fragments else RULES
    keep = cfg.out_dir / "smt" if cfg.keep_smt and cfg.out_dir else None
    verdict = solve(script, cfg.solver, keep, stem)
    if isinstance(verdict, Unsat):
        return PathResult(source, "unsat", script=script, fragments=fragments)
    if isinstance(verdict, Unknown):
        return PathResult(source, "unknown", script=script, detail=verdict.reason, fragments=fragments)
    if isinstance(verdict, SolverFailure):
        state = "missing-solver" if verdict.missing_solver else "failure"
        return PathResult(source, state, script=script, detail=verdict.stderr, fragments=fragments)
    assert isinstance(verdict, Sat)
    if not eval_model(script, verdict.model):
        return PathResult(source, "sat", Failed("model does not satisfy the script"), script=script,
                          fragments=fragments)
    try:
        inp = decode_model(verdict.model, env, script)
    except DecodeError as exc:
        return PathResult(source, "sat", Failed(f"decode: {exc}"), script=script, fragments=fragments)
    return PathResult(source, "sat", path_verdict(fn, inp, path, cfg.interpreter_steps), inp, script,
                      fragments=fragments)


# -- reports -------------------------------------------------------------------------


@dataclass
class PathRecord:
    file: str
    function: str
    path_id: str
    source: str
    solver: str
    test: str  # PathCorrect | ExecutionPassOnly | Failed | ""
    time_ms: float
    detail: str = ""
    artifact: str = ""

    @property
    def has_input(self) -> bool:
        return self.test != ""


def aggregate(records) -> dict:
    records = list(records)
    total = len(records)
    return {
        "paths": total,
        "sat": sum(r.solver == "sat" and r.has_input for r in records),
        "execution_pass": sum(r.test in ("PathCorrect", "ExecutionPassOnly") for r in records),
        "path_correct": sum(r.test == "PathCorrect" for r in records),
        "unsat": sum(r.solver == "unsat" for r in records),
        "unknown": sum(r.solver in ("unknown", "failure", "missing-solver") for r in records),
        "unsupported": sum(r.solver == "unsupported" for r in records),
        "mean_ms": round(sum(r.time_ms for r in records) / total, 1) if total else 0.0,
    }


@dataclass
class RunReport:
    records: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)  # per-program failures

    @property
    def aggregates(self) -> dict:
        return aggregate(self.records)

    def to_json(self) -> str:
        return json.dumps({"version": REPORT_VERSION, "settings": self.settings, "errors": self.errors,
                           "records": [asdict(r) for r in self.records], "aggregates": self.aggregates},
                          indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        if not isinstance(data, dict) or data.get("version") != REPORT_VERSION:
            raise ValueError("not a report file")
        records = [PathRecord(**r) for r in data["records"]]
        return cls(records, data.get("settings", {}), data.get("errors", []))


def cell(count: int, total: int) -> str:
    return f"{count} ({100.0 * count / total if total else 0.0:.1f}%)"


def summary_row(agg: dict) -> str:
    total = agg["paths"]
    return " ".join(cell(agg[k], total) for k in ("sat", "execution_pass", "path_correct"))


def render_report(report: RunReport) -> str:
    agg = report.aggregates
    total = agg["paths"]
    head = ["paths", "SAT", "Execution pass", "Path correct", "Unsat", "Unsupported", "mean ms"]
    row = [str(total), cell(agg["sat"], total), cell(agg["execution_pass"], total),
           cell(agg["path_correct"], total), str(agg["unsat"]), str(agg["unsupported"]), f"{agg['mean_ms']:.1f}"]
    return _table([head, row])


def render_k_sweep(reports) -> str:
    """One row per retrieval k, in the same three columns."""
    rows = [["k", "paths", "SAT", "Execution pass", "Path correct"]]
    for rep in sorted(reports, key=lambda r: r.settings.get("templates_k", 0)):
        agg = rep.aggregates
        total = agg["paths"]
        rows.append([str(rep.settings.get("templates_k", "?")), str(total), cell(agg["sat"], total),
                     cell(agg["execution_pass"], total), cell(agg["path_correct"], total)])
    return _table(rows)


def _table(rows) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


# -- bench ---------------------------------------------------------------------------


def load_program(path: Path):
    """Strict parse and typing when possible; otherwise keep placeholders so paths report Unsupported."""
    source = Path(path).read_text()
    try:
        unit = parse_unit(source, str(path))
        strict = True
    except UnsupportedConstruct:
        unit = parse_unit(source, str(path), strict=False)
        strict = False
    envs = {}
    for fn in unit.functions:
        try:
            envs[fn.name] = infer_types(fn, lenient=not strict)
        except TypeInferenceError:
            envs[fn.name] = infer_types(fn, lenient=True)
    return unit, envs


def read_inputs(path: Path) -> list[tuple]:
    if not path.is_file():
        return []
    return [parse_args_literal(line) for line in path.read_text().splitlines()
            if line.strip() and not line.lstrip().startswith("#")]


def example_paths(fn: n.FunctionDef, env: TypeEnv, inputs, limit: int = TRACE_LIMIT,
                  interpreter_steps: int = DEFAULT_STEP_LIMIT) -> list[ExecutionPath]:
    """Distinct aligned traces of the example inputs, truncated to ``limit`` steps."""
    cfg = build_cfg(fn)
    seen, paths = set(), []
    for args in inputs:
        result = run(fn, coerce_args(args, env), interpreter_steps)
        path = align_trace(cfg, result.lines)
        if result.raised:
            # the raising statement is not in the trace, so only its prefix is a target
            path = ExecutionPath(path.function, path.steps, True)
        path = path.truncate(limit)
        if path.keys() + (path.truncated,) not in seen:
            seen.add(path.keys() + (path.truncated,))
            paths.append(path)
    return paths


def bench(config: HarnessConfig, transport=None) -> RunReport:
    """Run the pipeline over every ``*.py`` in the corpus directory."""
    ctx = Context.build(config, transport)
    corpus = Path(config.corpus_dir)
    out = Path(config.out_dir) if config.out_dir else None
    tasks, errors, artifacts_for = [], [], {}
    for file in sorted(corpus.glob("*.py")):
        try:
            unit, envs = load_program(file)
            inputs = read_inputs(file.with_suffix(".inputs"))
            for fn in unit.functions:
                env = envs[fn.name]
                for i, path in enumerate(example_paths(fn, env, inputs, config.bounds.max_steps,
                                                       config.interpreter_steps)):
                    tasks.append((file, unit.source_text, fn, env, i, path))
        except (ParseError, UnsupportedConstruct, TypeInferenceError, AlignError, ValueError, SyntaxError) as exc:
            errors.append({"file": file.name, "error": f"{type(exc).__name__}: {exc}"})

    def work(task):
        file, source, fn, env, i, path = task
        started = time.perf_counter()
        res = solve_path(fn, env, path, ctx, source, f"{file.stem}.{fn.name}.{i}")
        ms = (time.perf_counter() - started) * 1000
        return task, res, ms

    if config.jobs > 1:
        with ThreadPoolExecutor(config.jobs) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    records = []
    for (file, _, fn, env, i, _), res, ms in results:
        artifact = ""
        if res.input is not None and out is not None:
            rel = f"tests/{file.stem}.jsonl"
            art = emit_artifact(res.input, fn, str(i), env, file.name, verdict_name(res.verdict))
            artifacts_for.setdefault(rel, []).append(art.serialize())
            artifact = rel
        records.append(PathRecord(file.name, fn.name, str(i), res.source, res.solver,
                                  verdict_name(res.verdict) if res.verdict is not None else "",
                                  round(ms, 1), res.detail, artifact))
    report = RunReport(records, _settings(config), errors)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        for rel, lines in artifacts_for.items():
            (out / rel).parent.mkdir(parents=True, exist_ok=True)
            (out / rel).write_text("\n".join(lines) + "\n")
        (out / "report.json").write_text(report.to_json())
    return report


def _settings(config: HarnessConfig) -> dict:
    return {
        "max_steps": config.bounds.max_steps,
        "max_loop_iterations": config.bounds.max_loop_iterations,
        "max_paths": config.bounds.max_paths,
        "solver_cmd": " ".join(config.solver.command),
        "timeout": config.solver.timeout,
        "bridge": config.bridge.mode.value,
        "templates_k": config.bridge.k,
        "chunking": config.bridge.chunking.value,
    }
