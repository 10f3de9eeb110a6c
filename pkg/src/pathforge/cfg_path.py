"""Control-flow graphs over subset functions and bounded path enumeration.

Every CFG node is one statement of kind enter, condition or expression.
``for`` loops are desugared into an init expression, a guard condition, and
an increment expression, all carrying the loop's line number, so every loop
guard is an ordinary condition node with a back edge.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

from .frontend import nodes as n
from .frontend.printer import expr_text, stmt_header
from .frontend.validate import HIDDEN_PREFIX


class NodeKind(enum.Enum):
    ENTER = "enter"
    CONDITION = "condition"
    EXPRESSION = "expression"
    EXIT = "exit"


class EdgeLabel(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    FALLTHROUGH = "fallthrough"


class ChunkStrategy(enum.Enum):
    BY_LINE = "line"
    BY_CONDITION = "condition"


@dataclass(frozen=True)
class CfgNode:
    id: int
    line: int
    kind: NodeKind
    stmt_text: str
    stmt_ref: object = field(default=None, compare=False, repr=False)
    loop_guard: bool = False


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    label: EdgeLabel
    back: bool = False


@dataclass
class Cfg:
    function: n.FunctionDef
    nodes: list[CfgNode]
    edges: list[Edge]
    entry: int
    exits: frozenset

    def __post_init__(self):
        self._succ: dict[int, list[Edge]] = {node.id: [] for node in self.nodes}
        for e in self.edges:
            self._succ[e.src].append(e)
        self._by_id = {node.id: node for node in self.nodes}

    def node(self, node_id: int) -> CfgNode:
        return self._by_id[node_id]

    def successors(self, node_id: int) -> list[Edge]:
        return self._succ[node_id]

    def conditions(self) -> list[CfgNode]:
        return [x for x in self.nodes if x.kind is NodeKind.CONDITION]


@dataclass(frozen=True)
class PathStep:
    node_id: int
    line: int
    kind: NodeKind
    stmt_text: str
    branch_taken: Optional[bool] = None
    loop_iteration: Optional[int] = None
    stmt_ref: object = field(default=None, compare=False, repr=False)

    def key(self) -> tuple:
        return (self.node_id, self.branch_taken, self.loop_iteration)

    def format(self) -> str:
        text = f"{self.line}\t{self.kind.value}\t{self.stmt_text}"
        if self.loop_iteration is not None:
            text += f" @iter={self.loop_iteration}"
        if self.branch_taken is not None:
            text += " ->taken" if self.branch_taken else " ->not-taken"
        return text


@dataclass(frozen=True)
class ExecutionPath:
    function: str
    steps: tuple
    truncated: bool = False

    def keys(self) -> tuple:
        return tuple(s.key() for s in self.steps)

    def format(self) -> str:
        lines = [s.format() for s in self.steps]
        if self.truncated:
            lines.append("# truncated")
        return "\n".join(lines)

    def truncate(self, max_steps: int) -> "ExecutionPath":
        if len(self.steps) <= max_steps:
            return self
        return ExecutionPath(self.function, self.steps[:max_steps], True)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class PathChunk:
    steps: tuple
    strategy: ChunkStrategy
    start: int = 0

    def text(self) -> str:
        return "\n".join(s.format() for s in self.steps)


@dataclass(frozen=True)
class Bounds:
    max_steps: int = 20
    max_loop_iterations: int = 3
    max_paths: int = 256

    def __post_init__(self):
        if min(self.max_steps, self.max_loop_iterations, self.max_paths) < 1:
            raise ValueError("bounds must all be >= 1")


class AlignError(Exception):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason  # "NoMatch" | "Ambiguous"


# -- construction ------------------------------------------------------------


def _hidden_index(var: str) -> str:
    return f"{HIDDEN_PREFIX}{var}"


class _Builder:
    def __init__(self, fn: n.FunctionDef):
        self.fn = fn
        self.nodes: list[CfgNode] = []
        self.edges: list[Edge] = []
        self.loops: list[dict] = []

    def add(self, line: int, kind: NodeKind, text: str, ref, loop_guard=False) -> int:
        nid = len(self.nodes)
        self.nodes.append(CfgNode(nid, line, kind, text, ref, loop_guard))
        return nid

    def link(self, preds, dst: int, back: bool = False) -> None:
        for src, label in preds:
            self.edges.append(Edge(src, dst, label, back))

    def expression(self, preds, stmt, line: int) -> list:
        nid = self.add(line, NodeKind.EXPRESSION, stmt_header(stmt), stmt)
        self.link(preds, nid)
        return [(nid, EdgeLabel.FALLTHROUGH)]

    def block(self, body, preds) -> list:
        for stmt in body:
            if not preds:
                break  # unreachable tail after return/break/continue
            preds = self.stmt(stmt, preds)
        return preds

    def loop(self, guard: int, continue_to: Optional[int], body, body_preds) -> tuple[list, list]:
        ctx = {"guard": guard, "continue": continue_to, "breaks": [], "continues": []}
        self.loops.append(ctx)
        end = self.block(body, body_preds)
        self.loops.pop()
        return end, ctx

    def stmt(self, s, preds) -> list:
        line = s.span.line
        if isinstance(s, n.If):
            cid = self.add(line, NodeKind.CONDITION, expr_text(s.cond), s.cond)
            self.link(preds, cid)
            out = self.block(s.body, [(cid, EdgeLabel.TRUE)])
            if s.orelse:
                out = out + self.block(s.orelse, [(cid, EdgeLabel.FALSE)])
            else:
                out = out + [(cid, EdgeLabel.FALSE)]
            return out
        if isinstance(s, n.While):
            gid = self.add(line, NodeKind.CONDITION, expr_text(s.cond), s.cond, loop_guard=True)
            self.link(preds, gid)
            end, ctx = self.loop(gid, None, s.body, [(gid, EdgeLabel.TRUE)])
            self.link(end + ctx["continues"], gid, back=True)
            return [(gid, EdgeLabel.FALSE)] + ctx["breaks"]
        if isinstance(s, n.ForRange):
            var = n.Name(s.var, span=s.span)
            init = n.Assign(var, s.start, span=s.span)
            preds = self.expression(preds, init, line)
            cmp_op = ">" if s.step.value < 0 else "<"
            guard = n.Compare(cmp_op, var, s.stop, span=s.span)
            gid = self.add(line, NodeKind.CONDITION, expr_text(guard), guard, loop_guard=True)
            self.link(preds, gid)
            if s.step.value < 0:
                inc_value = n.Binary("-", var, n.IntLit(-s.step.value, span=s.span), span=s.span)
            else:
                inc_value = n.Binary("+", var, s.step, span=s.span)
            inc = n.Assign(var, inc_value, span=s.span)
            iid = self.add(line, NodeKind.EXPRESSION, stmt_header(inc), inc)
            end, ctx = self.loop(gid, iid, s.body, [(gid, EdgeLabel.TRUE)])
            self.link(end + ctx["continues"], iid)
            self.edges.append(Edge(iid, gid, EdgeLabel.FALLTHROUGH, back=True))
            return [(gid, EdgeLabel.FALSE)] + ctx["breaks"]
        if isinstance(s, n.ForEach):
            idx = n.Name(_hidden_index(s.var), span=s.span)
            init = n.Assign(idx, n.IntLit(0, span=s.span), span=s.span)
            preds = self.expression(preds, init, line)
            guard = n.Compare("<", idx, n.LenCall(s.iterable, span=s.span), span=s.span)
            gid = self.add(line, NodeKind.CONDITION, expr_text(guard), guard, loop_guard=True)
            self.link(preds, gid)
            bind = n.Assign(n.Name(s.var, span=s.span), n.Subscript(s.iterable, idx, span=s.span),
                            span=s.span)
            body_preds = self.expression([(gid, EdgeLabel.TRUE)], bind, line)
            inc = n.Assign(idx, n.Binary("+", idx, n.IntLit(1, span=s.span), span=s.span), span=s.span)
            iid = self.add(line, NodeKind.EXPRESSION, stmt_header(inc), inc)
            end, ctx = self.loop(gid, iid, s.body, body_preds)
            self.link(end + ctx["continues"], iid)
            self.edges.append(Edge(iid, gid, EdgeLabel.FALLTHROUGH, back=True))
            return [(gid, EdgeLabel.FALSE)] + ctx["breaks"]
        if isinstance(s, n.Return):
            nid = self.add(line, NodeKind.EXPRESSION, stmt_header(s), s)
            self.link(preds, nid)
            self.returns.append((nid, EdgeLabel.FALLTHROUGH))
            return []
        if isinstance(s, n.Break):
            nid = self.add(line, NodeKind.EXPRESSION, "break", s)
            self.link(preds, nid)
            self.loops[-1]["breaks"].append((nid, EdgeLabel.FALLTHROUGH))
            return []
        if isinstance(s, n.Continue):
            nid = self.add(line, NodeKind.EXPRESSION, "continue", s)
            self.link(preds, nid)
            ctx = self.loops[-1]
            if ctx["continue"] is None:
                self.edges.append(Edge(nid, ctx["guard"], EdgeLabel.FALLTHROUGH, back=True))
            else:
                ctx["continues"].append((nid, EdgeLabel.FALLTHROUGH))
            return []
        return self.expression(preds, s, line)

    def build(self) -> Cfg:
        self.returns: list = []
        fn = self.fn
        entry = self.add(fn.span.line, NodeKind.ENTER, fn.signature(), fn)
        end = self.block(fn.body, [(entry, EdgeLabel.FALLTHROUGH)])
        exit_id = self.add(fn.span.line, NodeKind.EXIT, "<exit>", None)
        self.link(end + self.returns, exit_id)
        cfg = Cfg(fn, self.nodes, self.edges, entry, frozenset({exit_id}))
        return _prune_unreachable(cfg)


def _prune_unreachable(cfg: Cfg) -> Cfg:
    seen = {cfg.entry}
    todo = [cfg.entry]
    while todo:
        for e in cfg.successors(todo.pop()):
            if e.dst not in seen:
                seen.add(e.dst)
                todo.append(e.dst)
    if len(seen) == len(cfg.nodes):
        return cfg
    remap = {}
    nodes = []
    for node in cfg.nodes:
        if node.id in seen:
            remap[node.id] = len(nodes)
            nodes.append(replace(node, id=len(nodes)))
    edges = [Edge(remap[e.src], remap[e.dst], e.label, e.back)
             for e in cfg.edges if e.src in seen and e.dst in seen]
    exits = frozenset(remap[x] for x in cfg.exits if x in seen)
    return Cfg(cfg.function, nodes, edges, remap[cfg.entry], exits)


def build_cfg(fn: n.FunctionDef) -> Cfg:
    return _Builder(fn).build()


# -- walking -----------------------------------------------------------------


def make_step(node: CfgNode, edge: Edge, iteration: Optional[int]) -> PathStep:
    taken = None
    if node.kind is NodeKind.CONDITION:
        taken = edge.label is EdgeLabel.TRUE
    return PathStep(node.id, node.line, node.kind, node.stmt_text, taken,
                    iteration if node.loop_guard else None, node.stmt_ref)


def next_iteration(counts: dict, edge: Edge) -> dict:
    """Loop visit counters after traversing ``edge`` (back edges increment, others reset)."""
    counts = dict(counts)
    counts[edge.dst] = counts.get(edge.dst, 0) + 1 if edge.back else 1
    return counts


def enumerate_paths(cfg: Cfg, bounds: Bounds = Bounds()) -> Iterator[ExecutionPath]:
    """Breadth-first enumeration of bounded paths from the entry node.

    A loop guard may take its true branch at most ``max_loop_iterations``
    times per activation; walks reaching ``max_steps`` steps are emitted as
    truncated prefixes.
    """
    fname = cfg.function.name
    queue = deque([((), cfg.entry, {cfg.entry: 1})])
    emitted = 0
    while queue and emitted < bounds.max_paths:
        steps, node_id, counts = queue.popleft()
        node = cfg.node(node_id)
        for edge in cfg.successors(node_id):
            iteration = counts.get(node_id, 1)
            if node.loop_guard and edge.label is EdgeLabel.TRUE and iteration > bounds.max_loop_iterations:
                continue
            new_steps = steps + (make_step(node, edge, iteration),)
            if edge.dst in cfg.exits:
                yield ExecutionPath(fname, new_steps, False)
            elif len(new_steps) >= bounds.max_steps:
                yield ExecutionPath(fname, new_steps, True)
            else:
                queue.append((new_steps, edge.dst, next_iteration(counts, edge)))
                continue
            emitted += 1
            if emitted >= bounds.max_paths:
                return


def align_trace(cfg: Cfg, line_trace) -> ExecutionPath:
    """Recover the unique CFG walk whose visited lines equal ``line_trace``."""
    lines = list(line_trace)
    if not lines:
        raise AlignError("NoMatch", "empty trace")
    if cfg.node(cfg.entry).line != lines[0]:
        raise AlignError("NoMatch", f"trace starts at line {lines[0]}, function at {cfg.node(cfg.entry).line}")
    # frontier: node id -> (number of walks, one predecessor edge chain)
    frontier = {cfg.entry: (1, None)}
    for pos in range(1, len(lines)):
        nxt: dict = {}
        for node_id, (count, chain) in frontier.items():
            for edge in cfg.successors(node_id):
                dst = cfg.node(edge.dst)
                if dst.kind is NodeKind.EXIT or dst.line != lines[pos]:
                    continue
                prev = nxt.get(edge.dst)
                if prev is None:
                    nxt[edge.dst] = (count, (chain, edge))
                else:
                    nxt[edge.dst] = (prev[0] + count, prev[1])
        if not nxt:
            raise AlignError("NoMatch", f"no CFG successor on line {lines[pos]} at trace position {pos}")
        frontier = nxt
    # A walk that can still continue to the exit is preferred as "complete".
    total = sum(c for c, _ in frontier.values())
    if total != 1:
        raise AlignError("Ambiguous", f"{total} walks reproduce the trace")
    (last_id, (_, chain)), = frontier.items()
    edges = []
    while chain is not None:
        chain, edge = chain
        edges.append(edge)
    edges.reverse()
    return _path_from_walk(cfg, edges, last_id)


def _path_from_walk(cfg: Cfg, edges: list[Edge], last_id: int) -> ExecutionPath:
    counts = {cfg.entry: 1}
    steps = []
    for edge in edges:
        node = cfg.node(edge.src)
        steps.append(make_step(node, edge, counts.get(edge.src, 1)))
        counts = next_iteration(counts, edge)
    last = cfg.node(last_id)
    exit_edges = [e for e in cfg.successors(last_id) if e.dst in cfg.exits]
    if exit_edges:
        steps.append(make_step(last, exit_edges[0], counts.get(last_id, 1)))
        return ExecutionPath(cfg.function.name, tuple(steps), False)
    # The trace stops mid-function; the last step's branch is unknown unless forced.
    outs = cfg.successors(last_id)
    if last.kind is NodeKind.CONDITION or len(outs) != 1:
        steps.append(PathStep(last.id, last.line, last.kind, last.stmt_text, None,
                              counts.get(last_id, 1) if last.loop_guard else None, last.stmt_ref))
    else:
        steps.append(make_step(last, outs[0], counts.get(last_id, 1)))
    return ExecutionPath(cfg.function.name, tuple(steps), True)


def path_from_keys(cfg: Cfg, keys, truncated: bool) -> ExecutionPath:
    steps = []
    for node_id, taken, iteration in keys:
        node = cfg.node(node_id)
        steps.append(PathStep(node.id, node.line, node.kind, node.stmt_text, taken, iteration, node.stmt_ref))
    return ExecutionPath(cfg.function.name, tuple(steps), truncated)


def chunk_path(path: ExecutionPath, strategy: ChunkStrategy = ChunkStrategy.BY_LINE) -> list[PathChunk]:
    if not path.steps:
        raise ValueError("cannot chunk an empty path")
    if strategy is ChunkStrategy.BY_LINE:
        return [PathChunk((s,), strategy, i) for i, s in enumerate(path.steps)]
    chunks, current, start = [], [], 0
    for i, s in enumerate(path.steps):
        current.append(s)
        if s.kind is NodeKind.CONDITION:
            chunks.append(PathChunk(tuple(current), strategy, start))
            current, start = [], i + 1
    if current:
        chunks.append(PathChunk(tuple(current), strategy, start))
    return chunks


def format_cfg(cfg: Cfg) -> str:
    lines = [f"function {cfg.function.name}: entry={cfg.entry} exits={sorted(cfg.exits)}"]
    for node in cfg.nodes:
        outs = ", ".join(
            f"{e.dst}{'' if e.label is EdgeLabel.FALLTHROUGH else ':' + e.label.value}{' (back)' if e.back else ''}"
            for e in cfg.successors(node.id))
        lines.append(f"  [{node.id}] line {node.line} {node.kind.value}: {node.stmt_text} -> {outs}")
    return "\n".join(lines)
