"""Command-line interface: ``pathforge <subcommand> ...``.

Exit codes: 0 success (``solve-path``: path correct), 1 solved but the input
took another path, 2 unsat or unknown, 3 unsupported with the bridge off,
64 usage error, 65 unreadable input data, 69 solver missing.
"""
from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .cfg_path import AlignError, align_trace, build_cfg, enumerate_paths, format_cfg
from .frontend import ParseError, UnsupportedConstruct, parse_unit, pretty_print
from .harness import (
    Context, RunReport, bench, config_from_settings, load_config_file, load_program, render_k_sweep,
    render_report, solve_path,
)
from .interpreter import Raised, run, verdict_name
from .llm_bridge import TransportError
from .smt import emit_smtlib, solver_available
from .testcase import coerce_args, emit_artifact, parse_args_literal
from .translator import Unsupported, translate_path
from .typeinfer import TypeInferenceError, infer_types

EX_OK, EX_WRONG_PATH, EX_NO_MODEL, EX_UNSUPPORTED = 0, 1, 2, 3
EX_USAGE, EX_DATAERR, EX_UNAVAILABLE = 64, 65, 69

DEFAULT_OUT = "pathforge-out"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="JSON config file; flags override its keys")
    g.add_argument("--solver-cmd", dest="solver_cmd", help="solver command line (default z3)")
    g.add_argument("--timeout", type=float, help="seconds per solver query")
    g.add_argument("--max-steps", dest="max_steps", type=int, help="path length bound (default 20)")
    g.add_argument("--max-loop-iterations", dest="max_loop_iterations", type=int, help="loop bound (default 3)")
    g.add_argument("--max-paths", dest="max_paths", type=int, help="paths per function (default 256)")
    g.add_argument("--jobs", type=int, help="parallel workers for bench")
    g.add_argument("--keep-smt", dest="keep_smt", action="store_true", help="keep queries and solver output")
    g.add_argument("--bridge", choices=["off", "replay", "live"], help="generative bridge mode")
    g.add_argument("--fixture-dir", dest="fixture_dir", help="replay fixtures for --bridge replay")
    g.add_argument("--templates-k", dest="templates_k", type=int, help="templates retrieved per chunk")
    g.add_argument("--chunking", choices=["line", "condition"], help="bridge chunking strategy")
    g.add_argument("--out", help="output directory")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="pathforge", description=__doc__.split("\n")[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    for name, text in (("parse", "check a file and print it back in normalized form"),
                       ("types", "print inferred variable types"),
                       ("cfg", "print the control-flow graph"),
                       ("paths", "list bounded paths")):
        p = add(name, text)
        p.add_argument("file")
        p.add_argument("function", nargs="?", help="restrict to one function")

    p = add("run", "execute a function on concrete arguments")
    p.add_argument("file")
    p.add_argument("function")
    p.add_argument("--args", default="", help="argument literals, e.g. '[1, 2], 3'")

    for name, text in (("translate", "print the SMT-LIB script for one path"),
                       ("solve-path", "solve one path and replay the decoded input")):
        p = add(name, text)
        p.add_argument("file")
        p.add_argument("function")
        sel = p.add_mutually_exclusive_group(required=True)
        sel.add_argument("--path", type=int, help="index from the 'paths' listing")
        sel.add_argument("--trace", help="file of executed line numbers to align")
        if name == "translate":
            p.add_argument("--sidecar", help="write the assert-to-step mapping here")

    p = add("bench", "run the pipeline over a corpus directory")
    p.add_argument("corpus", nargs="?", help="directory of <name>.py + <name>.inputs (default: bundled)")

    p = add("report", "render saved report files")
    p.add_argument("reports", nargs="+")
    return parser


def _settings(args) -> dict:
    settings = {}
    if getattr(args, "config", None):
        try:
            settings.update(load_config_file(Path(args.config)))
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad config file: {exc}") from exc
    for key in ("solver_cmd", "timeout", "max_steps", "max_loop_iterations", "max_paths", "jobs", "keep_smt",
                "bridge", "fixture_dir", "templates_k", "chunking", "out"):
        if hasattr(args, key):
            settings[key] = getattr(args, key)
    return settings


def _config(settings: dict):
    try:
        return config_from_settings(settings)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load(path: str, strict: bool = True):
    source = Path(path).read_text()
    return parse_unit(source, path, strict=strict)


def _functions(unit, name):
    if name is None:
        return list(unit.functions)
    try:
        return [unit.function(name)]
    except KeyError:
        raise UsageError(f"no function named {name!r}") from None


def cmd_parse(args) -> int:
    print(pretty_print(_load(args.file)), end="")
    return EX_OK


def cmd_types(args) -> int:
    unit = _load(args.file)
    for fn in _functions(unit, args.function):
        env = infer_types(fn)
        print(f"{fn.name}:")
        for line in env.format().splitlines():
            print(f"  {line}")
        for w in env.warnings:
            print(f"  warning: {w}")
    return EX_OK


def cmd_cfg(args) -> int:
    unit = _load(args.file)
    print("\n\n".join(format_cfg(build_cfg(fn)) for fn in _functions(unit, args.function)))
    return EX_OK


def cmd_paths(args) -> int:
    cfg = _config(_settings(args))
    unit = _load(args.file)
    for fn in _functions(unit, args.function):
        for i, path in enumerate(enumerate_paths(build_cfg(fn), cfg.bounds)):
            note = ", truncated" if path.truncated else ""
            print(f"{fn.name} path {i} ({len(path)} steps{note})")
            for line in path.format().splitlines():
                if not line.startswith("#"):
                    print(f"  {line}")
    return EX_OK


def cmd_run(args) -> int:
    unit = _load(args.file)
    fn = _functions(unit, args.function)[0]
    env = infer_types(fn)
    try:
        inp = coerce_args(parse_args_literal(args.args), env)
    except (ValueError, SyntaxError) as exc:
        raise UsageError(f"bad --args: {exc}") from exc
    result = run(fn, inp)
    if isinstance(result.outcome, Raised):
        print(f"raised {result.outcome.kind}: {result.outcome.detail}")
    else:
        print(f"returned {result.outcome.value!r}")
    print(result.trace.format())
    return EX_OK


def _select_path(args, fn, bounds):
    cfg = build_cfg(fn)
    if args.trace is not None:
        try:
            lines = [int(tok) for tok in Path(args.trace).read_text().split()]
            return align_trace(cfg, lines).truncate(bounds.max_steps), f"trace-{Path(args.trace).stem}"
        except (OSError, ValueError, AlignError) as exc:
            raise UsageError(f"cannot use trace {args.trace}: {exc}") from exc
    paths = list(enumerate_paths(cfg, bounds))
    if not 0 <= args.path < len(paths):
        raise UsageError(f"path {args.path} out of range; {fn.name} has {len(paths)} paths")
    return paths[args.path], str(args.path)


def cmd_translate(args) -> int:
    config = _config(_settings(args))
    unit, envs = load_program(Path(args.file))
    fn = _functions(unit, args.function)[0]
    path, sel = _select_path(args, fn, config.bounds)
    outcome = translate_path(path, envs[fn.name])
    if isinstance(outcome, Unsupported):
        print(f"unsupported at step {outcome.step_index}: {outcome.construct}", file=sys.stderr)
        return EX_UNSUPPORTED
    text = emit_smtlib(outcome.script, config.solver.logic)
    mapping = outcome.script.origin_lines()
    sys.stdout.write(text)
    if args.sidecar:
        Path(args.sidecar).write_text(mapping)
    if config.out_dir:
        config.out_dir.mkdir(parents=True, exist_ok=True)
        (config.out_dir / f"{fn.name}.{sel}.smt2").write_text(text)
        (config.out_dir / f"{fn.name}.{sel}.map").write_text(mapping)
    return EX_OK


def cmd_solve_path(args) -> int:
    settings = _settings(args)
    settings.setdefault("out", DEFAULT_OUT)
    settings["keep_smt"] = True
    config = _config(settings)
    unit, envs = load_program(Path(args.file))
    fn = _functions(unit, args.function)[0]
    env = envs[fn.name]
    path, sel = _select_path(args, fn, config.bounds)
    if not solver_available(config.solver):
        print(f"solver {config.solver.command[0]!r} not found", file=sys.stderr)
        return EX_UNAVAILABLE
    ctx = Context.build(config)
    stem = f"{fn.name}.{sel}"
    res = solve_path(fn, env, path, ctx, unit.source_text, stem)
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    test = verdict_name(res.verdict) if res.verdict is not None else "-"
    summary = f"source: {res.source}\nsolver: {res.solver}\ntest: {test}\n"
    if res.detail:
        summary += f"detail: {res.detail}\n"
    if res.input is not None:
        art = emit_artifact(res.input, fn, sel, env, Path(args.file).name, test)
        (out / f"{stem}.test.jsonl").write_text(art.serialize() + "\n")
        summary += f"input: {art.snippet()}\n"
    (out / f"{stem}.verdict").write_text(summary)
    sys.stdout.write(summary)
    if res.solver == "missing-solver":
        return EX_UNAVAILABLE
    if res.solver == "unsupported":
        return EX_UNSUPPORTED
    if res.input is None:
        return EX_NO_MODEL
    return EX_OK if test == "PathCorrect" else EX_WRONG_PATH


def cmd_bench(args) -> int:
    settings = _settings(args)
    settings.setdefault("out", DEFAULT_OUT)
    if args.corpus:
        settings["corpus"] = args.corpus
    if "corpus" in settings:
        return _run_bench(_config(settings))
    with resources.as_file(resources.files("pathforge") / "corpus") as corpus:
        return _run_bench(_config({**settings, "corpus": str(corpus)}))


def _run_bench(config) -> int:
    if not solver_available(config.solver):
        print(f"solver {config.solver.command[0]!r} not found", file=sys.stderr)
        return EX_UNAVAILABLE
    report = bench(config)
    print(render_report(report))
    for err in report.errors:
        print(f"error: {err['file']}: {err['error']}", file=sys.stderr)
    if config.out_dir:
        print(f"report written to {config.out_dir / 'report.json'}")
    return EX_OK


def cmd_report(args) -> int:
    reports = []
    for name in args.reports:
        try:
            reports.append(RunReport.from_json(Path(name).read_text()))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            print(f"cannot read report {name}: {exc}", file=sys.stderr)
            return EX_DATAERR
    if len(reports) == 1:
        print(render_report(reports[0]))
    else:
        print(render_k_sweep(reports))
    return EX_OK


COMMANDS = {
    "parse": cmd_parse, "types": cmd_types, "cfg": cmd_cfg, "paths": cmd_paths, "run": cmd_run,
    "translate": cmd_translate, "solve-path": cmd_solve_path, "bench": cmd_bench, "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pathforge: {exc}", file=sys.stderr)
        return EX_USAGE
    except OSError as exc:
        print(f"pathforge: {exc}", file=sys.stderr)
        return EX_USAGE if isinstance(exc, FileNotFoundError) else EX_DATAERR
    except (ParseError, UnsupportedConstruct, TypeInferenceError) as exc:
        print(str(exc), file=sys.stderr)
        return EX_DATAERR
    except TransportError as exc:
        print(f"pathforge: bridge transport: {exc}", file=sys.stderr)
        return EX_UNAVAILABLE


if __name__ == "__main__":
    sys.exit(main())
