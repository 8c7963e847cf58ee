"""Worklist-driven symbolic execution over an exploded graph.

Nodes pair a :class:`ProgramPoint` with a :class:`State`; a node is created
once per distinct pair, so re-reaching a known pair only adds an edge. Each
top-level function gets its own graph. Calls to small, non-recursive,
defined functions are inlined (the caller's statement is suspended and
re-evaluated after the callee returns, with the call's value memoized in the
environment). All other calls are evaluated conservatively.
"""
from __future__ import annotations

import heapq
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from . import checkers as ck
from .cfg import Branch, Cfg, Goto, LoopInfo, NoReturn, ReturnTerm, assigned_vars, build_call_graph, build_cfg, top_level_order
from .frontend.ast import (
    VOID_PTR, ArrayType, Ast, Binary, Call, DeclRef, DeclStmt, Expr, ExprStmt, FunctionDecl, If, Index,
    IntLiteral, Member, PointerType, Return, SourceLoc, Stmt, Unary, VarDecl, VoidType, While, walk,
)
from .frontend.usr import compute_usr
from .memmodel import GLOBALS, HEAP, UNKNOWN_SPACE, AllocRegion, MemRegion, RegionManager, StackFrame, SymRegion
from .pmap import PMap
from .solver import ConstraintManager
from .symstate import (
    NULL, UNDEFINED, UNKNOWN, ConcreteInt, LocVal, State, SymbolManager, SymVal, SVal, UndefinedVal,
    UnknownVal, eval_binop, eval_unary, invalidate, pointee_region, reachable_regions,
    remove_dead_bindings, to_condition,
)

STRATEGIES = ("dfs", "bfs", "unexplored-first")


@dataclass
class AnalysisOptions:
    strategy: str = "unexplored-first"
    max_nodes: int = 100_000
    max_inline_depth: int = 5
    max_inline_size: int = 50
    max_block_visits: int = 4
    unroll_limit: int = 3
    max_full_unroll: int = 128
    widen_loops: bool = False
    inline: bool = True
    invalidate_on_calls: bool = True
    inline_defensive: bool = True
    force_top_level: frozenset = frozenset()
    checkers: Optional[frozenset] = None

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown exploration strategy '{self.strategy}'")


@dataclass(frozen=True)
class ProgramPoint:
    """Where execution is; ``index`` is the last statement executed in ``block`` (-1: none)."""

    kind: str  # entrance | stmt | call_enter | call_exit | exit | sink
    frame: StackFrame
    block: int
    index: int
    loc: Optional[SourceLoc] = field(default=None, compare=True)


@dataclass(frozen=True)
class AssumeTag:
    expr: Expr
    cond: SVal
    truth: bool
    split: bool


class ExplodedEdge:
    __slots__ = ("src", "dst", "tag")

    def __init__(self, src: "ExplodedNode", dst: "ExplodedNode", tag: Optional[AssumeTag]):
        self.src, self.dst, self.tag = src, dst, tag


class ExplodedNode:
    __slots__ = ("id", "point", "state", "preds", "succs", "sink")

    def __init__(self, nid: int, point: ProgramPoint, state: State):
        self.id = nid
        self.point = point
        self.state = state
        self.preds: list[ExplodedEdge] = []
        self.succs: list[ExplodedEdge] = []
        self.sink = False

    def __repr__(self) -> str:
        p = self.point
        return f"N{self.id}<{p.kind} B{p.block}:{p.index}>"


class ExplodedGraph:
    def __init__(self) -> None:
        self.nodes: list[ExplodedNode] = []
        self._index: dict[tuple, ExplodedNode] = {}
        self.call_locs: dict[tuple, SourceLoc] = {}

    def get_or_create(self, point: ProgramPoint, state: State) -> tuple[ExplodedNode, bool]:
        key = (point, state)
        got = self._index.get(key)
        if got is not None:
            return got, False
        n = ExplodedNode(len(self.nodes), point, state)
        self.nodes.append(n)
        self._index[key] = n
        return n, True

    def add_edge(self, src: Optional[ExplodedNode], dst: ExplodedNode, tag: Optional[AssumeTag] = None) -> None:
        if src is None:
            return
        for e in dst.preds:
            if e.src is src and e.tag == tag:
                return
        e = ExplodedEdge(src, dst, tag)
        src.succs.append(e)
        dst.preds.append(e)

    @property
    def root(self) -> ExplodedNode:
        return self.nodes[0]

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class WorkItem:
    node: ExplodedNode
    visits: PMap  # (frame key, block id) -> visits of that block on this path


class Worklist:
    """DFS, BFS or unexplored-first (fewest global visits of the target block)."""

    def __init__(self, strategy: str):
        self.strategy = strategy
        self._stack: list[WorkItem] = []
        self._queue: deque[WorkItem] = deque()
        self._heap: list[tuple[int, int, WorkItem]] = []
        self._seq = 0
        self.block_visits: Counter[tuple] = Counter()

    @staticmethod
    def _key(item: WorkItem) -> tuple:
        p = item.node.point
        return (p.frame.skey, p.block)

    def push(self, item: WorkItem) -> None:
        if self.strategy == "dfs":
            self._stack.append(item)
        elif self.strategy == "bfs":
            self._queue.append(item)
        else:
            self._seq += 1
            heapq.heappush(self._heap, (self.block_visits[self._key(item)], self._seq, item))

    def pop(self) -> WorkItem:
        if self.strategy == "dfs":
            item = self._stack.pop()
        elif self.strategy == "bfs":
            item = self._queue.popleft()
        else:
            while True:
                count, seq, item = heapq.heappop(self._heap)
                cur = self.block_visits[self._key(item)]
                if cur > count:
                    heapq.heappush(self._heap, (cur, seq, item))
                    continue
                break
        self.block_visits[self._key(item)] += 1
        return item

    def __len__(self) -> int:
        return len(self._stack) + len(self._queue) + len(self._heap)


class Suspend(Exception):
    """An inlinable call was reached; the statement resumes after the callee returns."""

    def __init__(self, call: Call, fn: FunctionDecl, usr: str, args: list[SVal]):
        super().__init__(call.callee)
        self.call, self.fn, self.usr, self.args = call, fn, usr, args


class _BudgetExhausted(Exception):
    pass


@dataclass
class AnalysisResult:
    reports: list
    coverage: dict[str, Counter]
    stats: Counter


# --------------------------------------------------------------------------
# Expression evaluation
# --------------------------------------------------------------------------


class Evaluator(ck.CheckerContext):
    """Evaluates one statement (or terminator expression) of one frame."""

    def __init__(self, engine: "Engine", state: State, frame: StackFrame, count: int):
        self.engine = engine
        self.state = state
        self.frame = frame
        self.count = count
        self.cm = engine.cm
        self.pending: list[ck.BugReport] = []
        self.loaded: dict[int, MemRegion] = {}

    # CheckerContext
    def make_report(self, checker: str, message: str, loc: SourceLoc) -> ck.BugReport:
        return ck.BugReport(checker, message, loc, fn_usr=self.frame.usr, depth=self.frame.depth)

    def add_report(self, report: ck.BugReport) -> None:
        self.pending.append(report)

    # statements
    def exec_stmt(self, s: Stmt) -> None:
        if isinstance(s, DeclStmt):
            for d in s.decls:
                if d.init is not None:
                    v = self.coerce(self.rvalue(d.init), d.type)
                    self.bind(self.engine.regions.var(d, self.frame), v)
        elif isinstance(s, ExprStmt):
            self.rvalue(s.expr)
        else:  # pragma: no cover - the CFG only places these two kinds in blocks
            raise TypeError(f"unexpected statement {type(s).__name__}")

    # values
    def rvalue(self, e: Expr) -> SVal:
        key = (e.node_id, self.frame.skey)
        memo = self.state.env.get(key)
        if memo is not None:
            return memo
        v = self._rvalue(e)
        self.state = self.state.bind_expr(key, v)
        return v

    def _rvalue(self, e: Expr) -> SVal:
        syms = self.engine.syms
        if isinstance(e, IntLiteral):
            return ConcreteInt(e.value)
        if isinstance(e, (DeclRef, Member, Index)):
            return self.load(e, self.lvalue(e))
        if isinstance(e, Unary):
            if e.op == "*":
                return self.load(e, self.lvalue(e))
            if e.op == "&":
                r = self.lvalue(e.operand)
                if r is None:
                    return UNKNOWN
                return SymVal(r.symbol) if isinstance(r, SymRegion) else LocVal(r)
            return eval_unary(e.op, self.rvalue(e.operand), syms)
        if isinstance(e, Binary):
            if e.op == "=":
                r = self.lvalue(e.lhs)
                v = self.coerce(self.rvalue(e.rhs), e.lhs.type)
                if r is not None:
                    self.bind(r, v)
                return v
            if e.op in ("&&", "||"):
                raise TypeError("logical operators are only lowered in conditions")
            lhs = self.rvalue(e.lhs)
            rhs = self.rvalue(e.rhs)
            if e.op in ("/", "%"):
                self.state = self.engine.checkers.check_division(
                    self, rhs, e, e.rhs, origin_region=self.loaded.get(e.rhs.node_id))
            return eval_binop(e.op, lhs, rhs, syms)
        if isinstance(e, Call):
            return self.call(e)
        raise TypeError(f"cannot evaluate {type(e).__name__}")

    def load(self, e: Expr, r: Optional[MemRegion]) -> SVal:
        if r is None:
            return UNKNOWN
        if isinstance(e.type, ArrayType):
            return LocVal(r)
        self.loaded[e.node_id] = r
        return self.state.lookup_loc(r, e.type, self.engine.syms)

    def lvalue(self, e: Expr) -> Optional[MemRegion]:
        regions = self.engine.regions
        if isinstance(e, DeclRef):
            assert e.decl is not None, f"unresolved reference to '{e.name}'"
            return regions.var(e.decl, self.frame)
        if isinstance(e, Unary) and e.op == "*":
            return self.deref(e.operand, e.loc)
        if isinstance(e, Member):
            base = self.deref(e.base, e.loc) if e.arrow else self.lvalue(e.base)
            return None if base is None else regions.field(e.field_name, base, e.type)
        if isinstance(e, Index):
            if isinstance(e.base.type, ArrayType):
                base = self.lvalue(e.base)
            else:
                base = self.deref(e.base, e.loc)
            idx = self.rvalue(e.index)
            if base is None or isinstance(idx, (UndefinedVal, UnknownVal)):
                return None
            return regions.element(idx, base, e.type)
        return None

    def deref(self, ptr_expr: Expr, loc: SourceLoc) -> Optional[MemRegion]:
        p = self.rvalue(ptr_expr)
        self.state = self.engine.checkers.check_deref(
            self, p, ptr_expr, loc, origin_region=self.loaded.get(ptr_expr.node_id))
        return pointee_region(p, self.engine.syms)

    def coerce(self, v: SVal, ty: Any) -> SVal:
        if isinstance(ty, PointerType) and isinstance(v, ConcreteInt) and v.value == 0:
            return NULL
        return v

    def bind(self, r: MemRegion, v: SVal) -> None:
        self.state = self.state.bind_loc(r, v)
        if isinstance(v, LocVal) and r.space() in (GLOBALS, HEAP, UNKNOWN_SPACE):
            self.state = self.engine.checkers.on_escape(self.state, _alloc_syms(v.region))

    # calls
    def call(self, e: Call) -> SVal:
        eng = self.engine
        args = [self.rvalue(a) for a in e.args]
        if e.callee == "malloc":
            sym = eng.syms.conjured(e.node_id, self.frame.skey, self.count, VOID_PTR, tag="malloc")
            self.state = eng.checkers.on_malloc(self, sym, e.loc)
            return LocVal(eng.regions.alloc(sym))
        if e.callee == "free":
            self.state = eng.checkers.on_free(self, args[0], e.loc)
            return UNKNOWN
        if e.callee == "abort":
            raise ck.Sink(None, self.state)
        fn, usr, ret_type = eng.resolve(e.callee, self.frame.fn)
        if fn is not None and eng.can_inline(fn, usr, self.frame):
            raise Suspend(e, fn, usr, args)
        return self.conservative_call(e, args, ret_type)

    def conservative_call(self, e: Call, args: list[SVal], ret_type: Any) -> SVal:
        eng = self.engine
        eng.stats["conservative_calls"] += 1
        roots = [r for r in (pointee_region(a, eng.syms) for a in args) if r is not None]
        reach = reachable_regions(self.state, roots, eng.syms)
        escaped = [s for r in reach for s in _alloc_syms(r)]
        self.state = eng.checkers.on_escape(self.state, escaped)
        if eng.options.invalidate_on_calls:
            self.state = invalidate(self.state, reach + [GLOBALS], e.node_id, self.frame, self.count, eng.syms)
        if isinstance(ret_type, VoidType):
            return UNKNOWN
        return SymVal(eng.syms.conjured(e.node_id, self.frame.skey, self.count, ret_type, tag="call"))


def _alloc_syms(r: Optional[MemRegion]) -> list:
    out = []
    while r is not None:
        if isinstance(r, AllocRegion):
            out.append(r.symbol)
        r = r.parent
    return out


# --------------------------------------------------------------------------
# Loops eligible for full unrolling
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _CountedLoop:
    var: VarDecl
    op: str  # < or <=
    bound: int
    step: int
    blocks: frozenset


def _counted_loop(cfg: Cfg, loop: LoopInfo) -> Optional[_CountedLoop]:
    """``while (v < K)`` whose straight-line body only does ``v = v + c``."""
    cond = loop.stmt.cond
    if not (isinstance(cond, Binary) and cond.op in ("<", "<=") and isinstance(cond.lhs, DeclRef)
            and isinstance(cond.rhs, IntLiteral)):
        return None
    var = cond.lhs.decl
    if var is None or var.storage == "global" or isinstance(var.type, (PointerType, ArrayType)):
        return None
    step = 0
    for n in walk(loop.stmt.body):
        if isinstance(n, (If, While, Return, Call)):
            return None
        if isinstance(n, Binary) and n.op == "=" and isinstance(n.lhs, DeclRef) and n.lhs.decl_id == var.node_id:
            r = n.rhs
            if not (isinstance(r, Binary) and r.op == "+" and isinstance(r.lhs, DeclRef)
                    and r.lhs.decl_id == var.node_id and isinstance(r.rhs, IntLiteral) and r.rhs.value > 0):
                return None
            step += r.rhs.value
    if step == 0:
        return None
    for n in walk(cfg.fn.body):
        if isinstance(n, Unary) and n.op == "&" and isinstance(n.operand, DeclRef) and n.operand.decl_id == var.node_id:
            return None
    blocks = {loop.head}
    todo = [loop.body_entry]
    while todo:
        b = todo.pop()
        if b in blocks:
            continue
        blocks.add(b)
        todo.extend(cfg.block(b).succs)
    return _CountedLoop(var, cond.op, cond.rhs.value, step, frozenset(blocks))


class _FnInfo:
    """Per-function data derived once from the CFG."""

    def __init__(self, fn: FunctionDecl):
        self.fn = fn
        self.cfg = build_cfg(fn)
        self.call_sites: dict[int, tuple[int, int]] = {}
        for b in self.cfg.blocks:
            for i, s in enumerate(b.stmts):
                for n in walk(s):
                    if isinstance(n, Call):
                        self.call_sites[n.node_id] = (b.id, i)
            t = b.terminator
            root = t.cond if isinstance(t, Branch) else t.stmt if isinstance(t, ReturnTerm) else None
            if root is not None:
                for n in walk(root):
                    if isinstance(n, Call):
                        self.call_sites[n.node_id] = (b.id, len(b.stmts))
        self.body_entries: dict[int, LoopInfo] = {l.body_entry: l for l in self.cfg.loops.values()}
        self.counted: dict[int, Optional[_CountedLoop]] = {h: _counted_loop(self.cfg, l) for h, l in self.cfg.loops.items()}
        self.vars: dict[int, VarDecl] = {p.node_id: p for p in fn.params}
        for n in walk(fn.body):
            if isinstance(n, VarDecl):
                self.vars[n.node_id] = n

    def block_loc(self, bid: int) -> Optional[SourceLoc]:
        b = self.cfg.block(bid)
        if b.stmts:
            return b.stmts[0].loc
        t = b.terminator
        if isinstance(t, Branch):
            return t.cond.loc
        if isinstance(t, ReturnTerm) and t.stmt is not None:
            return t.stmt.loc
        return None


# --------------------------------------------------------------------------
# The engine
# --------------------------------------------------------------------------


class Engine:
    def __init__(self, ast: Ast, options: Optional[AnalysisOptions] = None, ctu: Any = None,
                 stats: Optional[Counter] = None):
        self.ast = ast
        self.options = options or AnalysisOptions()
        self.ctu = ctu
        self.stats: Counter = stats if stats is not None else Counter()
        self.regions = RegionManager()
        self.syms = SymbolManager(self.regions)
        self.cm = ConstraintManager(self.syms)
        self.checkers = ck.Checkers()
        if self.options.checkers is not None:
            self.checkers.enabled = set(self.options.checkers)
        self.local_defs, self.decls = self._tables(ast)
        self._tu_tables: dict[int, tuple[dict, dict]] = {id(ast): (self.local_defs, self.decls)}
        self._info: dict[int, _FnInfo] = {}
        self._resolved: dict[tuple, tuple] = {}
        self.inlined_analyzed: set[str] = set()
        self.coverage: dict[str, Counter] = {}
        self.reports: list[ck.BugReport] = []
        self.graph = ExplodedGraph()

    # -- lookup -----------------------------------------------------------------

    def info(self, fn: FunctionDecl) -> _FnInfo:
        got = self._info.get(id(fn))
        if got is None:
            got = self._info[id(fn)] = _FnInfo(fn)
        return got

    @staticmethod
    def _tables(ast: Ast) -> tuple[dict[str, FunctionDecl], dict[str, FunctionDecl]]:
        defs: dict[str, FunctionDecl] = {}
        decls: dict[str, FunctionDecl] = {}
        for fn in ast.functions():
            decls.setdefault(fn.name, fn)
            if fn.body is not None:
                defs[fn.name] = fn
        return defs, decls

    def resolve(self, name: str, caller: FunctionDecl) -> tuple[Optional[FunctionDecl], str, Any]:
        """Definition (same TU as the caller, else imported), USR and return type of a callee."""
        ast = self.ast
        if caller is not self.local_defs.get(caller.name) and self.ctu is not None:
            ast = self.ctu.ast_of(caller) or self.ast
        key = (id(ast), name)
        got = self._resolved.get(key)
        if got is None:
            tables = self._tu_tables.get(id(ast))
            if tables is None:
                tables = self._tu_tables[id(ast)] = self._tables(ast)
            defs, decls = tables
            fn = defs.get(name)
            decl = decls[name]
            usr = compute_usr(decl)
            if fn is None and self.ctu is not None and self.options.inline:
                fn = self.ctu.load(usr)
            got = self._resolved[key] = (fn, usr, decl.return_type)
        return got

    def can_inline(self, fn: FunctionDecl, usr: str, frame: StackFrame) -> bool:
        o = self.options
        if not o.inline or frame.depth >= o.max_inline_depth:
            return False
        if any(f.usr == usr for f in frame.chain()):
            return False
        return len(self.info(fn).cfg) <= o.max_inline_size

    # -- driver -----------------------------------------------------------------

    def run(self) -> AnalysisResult:
        order = top_level_order(build_call_graph(self.ast.functions()))
        by_usr = {compute_usr(fn): fn for fn in self.local_defs.values()}
        forced = self.options.force_top_level
        for usr in order:
            fn = by_usr[usr]
            if usr in self.inlined_analyzed and usr not in forced and fn.name not in forced:
                self.stats["functions_skipped_inlined"] += 1
                continue
            self.analyze_function(fn)
        reports = ck.dedup_reports(self.reports)
        self.stats["suppressed_reports"] += sum(1 for r in reports if r.suppressed)
        self.stats["emitted_reports"] += sum(1 for r in reports if not r.suppressed)
        self.stats["unsupported_assumptions"] += self.cm.stats["unsupported_assumptions"]
        return AnalysisResult(reports, self.coverage, self.stats)

    def analyze_function(self, fn: FunctionDecl) -> ExplodedGraph:
        """Explore ``fn`` as a top-level entry; reports are appended to ``self.reports``."""
        self.stats["functions_analyzed"] += 1
        info = self.info(fn)
        frame = self.regions.frame(None, compute_usr(fn), -1, fn)
        self.graph = graph = ExplodedGraph()
        self._wl = Worklist(self.options.strategy)
        self._found: list[ck.BugReport] = []
        root = ProgramPoint("entrance", frame, info.cfg.entry, -1, fn.loc)
        visits = PMap().set((frame.skey, info.cfg.entry), 1)
        try:
            self._add(None, root, State(), None, visits)
            while len(self._wl):
                self.step(self._wl.pop())
        except _BudgetExhausted:
            self.stats["node_budget_exhausted"] += 1
        self.stats["nodes_created"] += len(graph)
        for r in self._found:
            ck.run_visitors(r, graph, self.cm, inline_defensive=self.options.inline_defensive)
            r.end_node = None
            self.reports.append(r)
        return graph

    def _add(self, src: Optional[ExplodedNode], point: ProgramPoint, state: State,
             tag: Optional[AssumeTag], visits: PMap, enqueue: bool = True) -> ExplodedNode:
        node, new = self.graph.get_or_create(point, state)
        self.graph.add_edge(src, node, tag)
        if new:
            self.cover(point.loc)
            if enqueue:
                self._wl.push(WorkItem(node, visits))
            if len(self.graph) >= self.options.max_nodes:
                raise _BudgetExhausted()
        return node

    def cover(self, loc: Optional[SourceLoc]) -> None:
        if loc is not None:
            self.coverage.setdefault(loc.file, Counter())[loc.line] += 1

    # -- stepping ---------------------------------------------------------------

    def step(self, item: WorkItem) -> None:
        p = item.node.point
        if p.kind in ("exit", "sink"):
            return
        info = self.info(p.frame.fn)
        block = info.cfg.block(p.block)
        j = p.index + 1
        count = item.visits.get((p.frame.skey, p.block), 1)
        ev = Evaluator(self, item.node.state, p.frame, count)
        if j < len(block.stmts):
            stmt = block.stmts[j]
            try:
                ev.exec_stmt(stmt)
            except Suspend as s:
                self.enter_call(item, ev.state, s)
                return
            except ck.Sink as s:
                self.sink(item, ProgramPoint("sink", p.frame, block.id, j, stmt.loc), s)
                return
            ev.state = ev.state.clear_env_frame(p.frame.skey)
            self.collect_garbage(ev, p.frame.chain(), stmt.loc)
            node = self._add(item.node, ProgramPoint("stmt", p.frame, block.id, j, stmt.loc), ev.state, None, item.visits)
            self._attach(ev, node)
            return
        t = block.terminator
        try:
            if isinstance(t, Goto):
                self.goto(item, item.node.state, p.frame, t.succ, None)
            elif isinstance(t, Branch):
                if block.stmts:
                    # the condition shares this node with the block's last statement
                    self.cover(t.cond.loc)
                self.branch(item, ev, info, block.id, t)
            elif isinstance(t, ReturnTerm):
                self.ret(item, ev, t)
            elif isinstance(t, NoReturn):
                pass
        except Suspend as s:
            self.enter_call(item, ev.state, s)
        except ck.Sink as s:
            loc = t.cond.loc if isinstance(t, Branch) else (t.stmt.loc if isinstance(t, ReturnTerm) and t.stmt else None)
            self.sink(item, ProgramPoint("sink", p.frame, block.id, len(block.stmts), loc), s)

    def _attach(self, ev: Evaluator, node: ExplodedNode) -> None:
        for r in ev.pending:
            r.end_node = node
            self._found.append(r)
        ev.pending = []

    def sink(self, item: WorkItem, point: ProgramPoint, s: ck.Sink) -> None:
        node = self._add(item.node, point, s.state, None, item.visits, enqueue=False)
        node.sink = True
        self.stats["sink_nodes"] += 1
        if s.report is not None:
            s.report.end_node = node
            self._found.append(s.report)

    def collect_garbage(self, ev: Evaluator, live: Iterable[StackFrame], anchor: Optional[SourceLoc]) -> None:
        state, reaper = remove_dead_bindings(ev.state, live)
        ev.state = state
        if anchor is not None:
            ev.state = self.checkers.on_dead_symbols(ev, reaper, anchor)

    def goto(self, item: WorkItem, state: State, frame: StackFrame, target: int,
             tag: Optional[AssumeTag], visits: Optional[PMap] = None, src: Optional[ExplodedNode] = None) -> None:
        visits = item.visits if visits is None else visits
        key = (frame.skey, target)
        n = visits.get(key, 0) + 1
        if n > self.options.max_block_visits:
            self.stats["paths_cut_block_visits"] += 1
            return
        info = self.info(frame.fn)
        self._add(src or item.node, ProgramPoint("entrance", frame, target, -1, info.block_loc(target)),
                  state, tag, visits.set(key, n))

    def branch(self, item: WorkItem, ev: Evaluator, info: _FnInfo, bid: int, t: Branch) -> None:
        frame = ev.frame
        v = ev.rvalue(t.cond)
        state = ev.state.clear_env_frame(frame.skey)
        cond = to_condition(v, self.syms)
        st_true = self.cm.assume(state, cond, True)
        st_false = self.cm.assume(state, cond, False)
        split = st_true is not None and st_false is not None
        symbolic = isinstance(cond, SymVal)
        loop = info.cfg.loops.get(bid)
        visits = item.visits
        o = self.options
        for truth, st, succ in ((True, st_true, t.true_succ), (False, st_false, t.false_succ)):
            if st is None:
                continue
            body_of = info.body_entries.get(succ)
            if body_of is not None and succ != body_of.exit:
                head_visits = visits.get((frame.skey, body_of.head), 0)
                counted = info.counted.get(body_of.head)
                if counted is not None and self._fully_unrollable(counted, st, frame):
                    self.stats["full_unroll_iterations"] += 1
                    cleared = visits
                    for b in counted.blocks:
                        cleared = cleared.remove((frame.skey, b))
                    tag = AssumeTag(t.cond, cond, truth, split) if symbolic else None
                    self.goto(item, st, frame, succ, tag, visits=cleared)
                    continue
                if head_visits > o.unroll_limit:
                    self.stats["loop_unroll_limit_hits"] += 1
                    continue
            tag = AssumeTag(t.cond, cond, truth, split) if symbolic else None
            self.goto(item, st, frame, succ, tag)
        if loop is not None and o.widen_loops and visits.get((frame.skey, bid), 0) > o.unroll_limit:
            self.widen(item, info, loop, state, frame, t)

    def _fully_unrollable(self, c: _CountedLoop, state: State, frame: StackFrame) -> bool:
        v = state.lookup_loc(self.regions.var(c.var, frame), c.var.type, self.syms)
        if not isinstance(v, ConcreteInt):
            return False
        limit = c.bound + (1 if c.op == "<=" else 0)
        remaining = -(-(limit - v.value) // c.step)
        return remaining <= self.options.max_full_unroll

    def widen(self, item: WorkItem, info: _FnInfo, loop: LoopInfo, state: State, frame: StackFrame, t: Branch) -> None:
        """Forget what the loop may change, then leave it with the condition false."""
        ids, indirect, calls = assigned_vars(loop.stmt)
        ids |= {n.decl_id for n in walk(loop.stmt.cond) if isinstance(n, DeclRef)}
        if any(isinstance(n, Call) for n in walk(t.cond)):
            return
        targets: list[MemRegion] = []
        decls = [info.vars[i] for i in sorted(ids) if i in info.vars]
        if indirect or calls:
            decls = list(info.vars.values())
            targets.append(GLOBALS)
        for d in decls:
            targets.append(self.regions.var(d, frame))
        for n in walk(loop.stmt):
            if isinstance(n, DeclRef) and n.decl is not None and n.decl.storage == "global" and n.decl_id in ids:
                targets.append(self.regions.var(n.decl, frame))
        count = item.visits.get((frame.skey, loop.head), 0)
        state = invalidate(state, targets, loop.stmt.node_id, frame, count, self.syms)
        ev = Evaluator(self, state, frame, count)
        cond = to_condition(ev.rvalue(t.cond), self.syms)
        out = self.cm.assume(ev.state.clear_env_frame(frame.skey), cond, False)
        if out is None:
            return
        self.stats["loops_widened"] += 1
        tag = AssumeTag(t.cond, cond, False, False) if isinstance(cond, SymVal) else None
        self.goto(item, out, frame, t.false_succ, tag)

    def ret(self, item: WorkItem, ev: Evaluator, t: ReturnTerm) -> None:
        frame = ev.frame
        fn = frame.fn
        if t.stmt is not None and t.stmt.value is not None:
            v = ev.coerce(ev.rvalue(t.stmt.value), fn.return_type)
        else:
            v = UNKNOWN if isinstance(fn.return_type, VoidType) else UNDEFINED
        loc = t.stmt.loc if t.stmt is not None else None
        ev.state = ev.state.clear_env_frame(frame.skey)
        parent = frame.parent
        if parent is None:
            if isinstance(v, LocVal):
                ev.state = self.checkers.on_escape(ev.state, _alloc_syms(v.region))
            self.collect_garbage(ev, [], loc or fn.loc)
            node = self._add(item.node, ProgramPoint("exit", frame, self.info(fn).cfg.exit, -1, loc), ev.state,
                             None, item.visits)
            self._attach(ev, node)
            return
        ev.state = ev.state.bind_expr((frame.call_site, parent.skey), v)
        self.collect_garbage(ev, parent.chain(), loc or fn.loc)
        if fn is self.local_defs.get(fn.name):
            self.inlined_analyzed.add(frame.usr)
        blk, idx = self.info(parent.fn).call_sites[frame.call_site]
        visits = item.visits.remove_if(lambda k, _v: k[0][: len(frame.skey)] == frame.skey)
        node = self._add(item.node, ProgramPoint("call_exit", parent, blk, idx - 1, loc), ev.state, None, visits)
        self._attach(ev, node)

    def enter_call(self, item: WorkItem, state: State, s: Suspend) -> None:
        caller = item.node.point.frame
        callee = self.regions.frame(caller, s.usr, s.call.node_id, s.fn)
        for param, arg in zip(s.fn.params, s.args):
            if isinstance(param.type, PointerType) and isinstance(arg, ConcreteInt) and arg.value == 0:
                arg = NULL
            state = state.bind_loc(self.regions.var(param, callee), arg)
        self.graph.call_locs[callee.skey] = s.call.loc
        self.stats["functions_inlined"] += 1
        entry = self.info(s.fn).cfg.entry
        visits = item.visits.set((callee.skey, entry), 1)
        self._add(item.node, ProgramPoint("call_enter", callee, entry, -1, s.fn.loc), state, None, visits)


def analyze_tu(ast: Ast, options: Optional[AnalysisOptions] = None, ctu: Any = None) -> AnalysisResult:
    """Analyze every function of a translation unit that was not already inlined."""
    stats: Counter = Counter()
    result = Engine(ast, options, ctu, stats).run()
    if ctu is not None:
        stats["ctu_ast_loads"] += getattr(ctu, "loads", 0)
    return result
