"""Per-function control-flow graphs, the call graph, and top-level ordering."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .frontend.ast import (
    ArrayType, Binary, Call, Compound, DeclRef, DeclStmt, Expr, ExprStmt, FunctionDecl, If,
    Index, Member, Node, Return, Stmt, Unary, VarDecl, While, expr_to_str, walk,
)
from .frontend.parser import NORETURN_BUILTINS
from .frontend.usr import compute_usr


@dataclass(frozen=True)
class Goto:
    succ: int


@dataclass(frozen=True)
class Branch:
    cond: Expr
    true_succ: int
    false_succ: int


@dataclass(frozen=True)
class ReturnTerm:
    """Leaves the function; ``stmt`` is None for falling off the end."""

    stmt: Optional[Return]
    succ: int


@dataclass(frozen=True)
class NoReturn:
    """Block ends in a call that never returns; the edge to exit is never taken."""

    call: Call
    succ: int


Terminator = Union[Goto, Branch, ReturnTerm, NoReturn, None]


@dataclass
class BasicBlock:
    id: int
    stmts: list[Stmt] = field(default_factory=list)
    terminator: Terminator = None

    @property
    def succs(self) -> list[int]:
        t = self.terminator
        if t is None:
            return []
        if isinstance(t, Branch):
            return [t.true_succ, t.false_succ]
        return [t.succ]


@dataclass
class LoopInfo:
    stmt: While
    head: int
    exit: int
    body_entry: int


@dataclass
class Cfg:
    fn: FunctionDecl
    blocks: list[BasicBlock]
    entry: int
    exit: int
    loops: dict[int, LoopInfo]  # head block id -> loop

    def block(self, bid: int) -> BasicBlock:
        return self.blocks[bid]

    def preds(self, bid: int) -> list[int]:
        return [b.id for b in self.blocks if bid in b.succs]

    def __len__(self) -> int:
        return len(self.blocks)

    def dump(self) -> str:
        lines = []
        for b in self.blocks:
            label = "ENTRY" if b.id == self.entry else "EXIT" if b.id == self.exit else None
            items = [stmt_to_str(s) for s in b.stmts]
            t = b.terminator
            if isinstance(t, Branch):
                items.append(f"branch {expr_to_str(t.cond)}")
            elif isinstance(t, ReturnTerm) and t.stmt is not None:
                items.append(stmt_to_str(t.stmt))
            elif isinstance(t, NoReturn):
                items.append(f"noreturn {expr_to_str(t.call)}")
            succs = ", ".join(f"B{s}" for s in b.succs)
            prefix = f"B{b.id}" + (f" ({label})" if label else "")
            lines.append(f"{prefix}: [{'; '.join(items)}] -> {succs}".rstrip())
        return "\n".join(lines)


def stmt_to_str(s: Node) -> str:
    if isinstance(s, ExprStmt):
        return expr_to_str(s.expr)
    if isinstance(s, DeclStmt):
        parts = []
        for d in s.decls:
            parts.append(f"{d.type} {d.name}" + (f" = {expr_to_str(d.init)}" if d.init is not None else ""))
        return ", ".join(parts)
    if isinstance(s, Return):
        return "return" + (f" {expr_to_str(s.value)}" if s.value is not None else "")
    if isinstance(s, Expr):
        return expr_to_str(s)
    return type(s).__name__


def is_noreturn_call(s: Stmt) -> Optional[Call]:
    if isinstance(s, ExprStmt) and isinstance(s.expr, Call) and s.expr.callee in NORETURN_BUILTINS:
        return s.expr
    return None


class _Builder:
    def __init__(self, fn: FunctionDecl):
        self.fn = fn
        self.blocks: list[BasicBlock] = []
        self.entry = self.new_block()
        self.exit = self.new_block()
        self.loops: list[LoopInfo] = []
        self.cur: Optional[BasicBlock] = None

    def new_block(self) -> BasicBlock:
        b = BasicBlock(len(self.blocks))
        self.blocks.append(b)
        return b

    def current(self) -> BasicBlock:
        if self.cur is None:
            # code after return/abort: collected into an unreachable block
            self.cur = self.new_block()
        return self.cur

    def start(self, b: BasicBlock) -> None:
        self.cur = b

    def goto(self, target: BasicBlock) -> None:
        if self.cur is not None:
            self.cur.terminator = Goto(target.id)

    def build(self) -> Cfg:
        first = self.new_block()
        self.entry.terminator = Goto(first.id)
        self.start(first)
        assert self.fn.body is not None
        self.stmt(self.fn.body)
        if self.cur is not None:
            self.cur.terminator = ReturnTerm(None, self.exit.id)
        return self.finish()

    def stmt(self, s: Stmt) -> None:
        if isinstance(s, Compound):
            for c in s.stmts:
                self.stmt(c)
        elif isinstance(s, (ExprStmt, DeclStmt)):
            b = self.current()
            b.stmts.append(s)
            call = is_noreturn_call(s)
            if call is not None:
                b.terminator = NoReturn(call, self.exit.id)
                self.cur = None
        elif isinstance(s, Return):
            self.current().terminator = ReturnTerm(s, self.exit.id)
            self.cur = None
        elif isinstance(s, If):
            then_b = self.new_block()
            else_b = self.new_block() if s.else_ is not None else None
            join = self.new_block()
            self.cond(s.cond, self.current(), then_b, else_b or join)
            self.start(then_b)
            self.stmt(s.then)
            self.goto(join)
            if else_b is not None:
                self.start(else_b)
                assert s.else_ is not None
                self.stmt(s.else_)
                self.goto(join)
            self.start(join)
        elif isinstance(s, While):
            head, body, after = self.new_block(), self.new_block(), self.new_block()
            self.current().terminator = Goto(head.id)
            self.cond(s.cond, head, body, after)
            self.loops.append(LoopInfo(s, head.id, after.id, body.id))
            self.start(body)
            self.stmt(s.body)
            self.goto(head)
            self.start(after)
        else:
            raise TypeError(f"unexpected statement {type(s).__name__}")

    def cond(self, e: Expr, b: BasicBlock, t: BasicBlock, f: BasicBlock) -> None:
        """Lower a condition into a chain of branch blocks starting at ``b``."""
        if isinstance(e, Binary) and e.op == "&&":
            mid = self.new_block()
            self.cond(e.lhs, b, mid, f)
            self.cond(e.rhs, mid, t, f)
        elif isinstance(e, Binary) and e.op == "||":
            mid = self.new_block()
            self.cond(e.lhs, b, t, mid)
            self.cond(e.rhs, mid, t, f)
        elif isinstance(e, Unary) and e.op == "!" and _has_logical(e.operand):
            self.cond(e.operand, b, f, t)
        else:
            b.terminator = Branch(e, t.id, f.id)

    def finish(self) -> Cfg:
        seen = {self.entry.id}
        stack = [self.entry.id]
        while stack:
            for s in self.blocks[stack.pop()].succs:
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        seen.add(self.exit.id)
        keep = [b for b in self.blocks if b.id in seen]
        remap = {b.id: i for i, b in enumerate(keep)}
        out = []
        for b in keep:
            t = b.terminator
            if isinstance(t, Goto):
                t = Goto(remap[t.succ])
            elif isinstance(t, Branch):
                t = Branch(t.cond, remap[t.true_succ], remap[t.false_succ])
            elif isinstance(t, ReturnTerm):
                t = ReturnTerm(t.stmt, remap[t.succ])
            elif isinstance(t, NoReturn):
                t = NoReturn(t.call, remap[t.succ])
            out.append(BasicBlock(remap[b.id], b.stmts, t))
        loops = {
            remap[li.head]: LoopInfo(li.stmt, remap[li.head], remap[li.exit], remap[li.body_entry])
            for li in self.loops
            if li.head in remap and li.exit in remap and li.body_entry in remap
        }
        return Cfg(self.fn, out, remap[self.entry.id], remap[self.exit.id], loops)


def _has_logical(e: Expr) -> bool:
    return any(isinstance(n, Binary) and n.op in ("&&", "||") for n in walk(e))


def build_cfg(fn: FunctionDecl) -> Cfg:
    if fn.body is None:
        raise ValueError(f"function '{fn.name}' has no body")
    return _Builder(fn).build()


# --------------------------------------------------------------------------
# Call graph
# --------------------------------------------------------------------------


@dataclass
class CallGraph:
    nodes: set[str] = field(default_factory=set)
    edges: dict[str, set[str]] = field(default_factory=lambda: defaultdict(set))

    def add_edge(self, caller: str, callee: str) -> None:
        self.edges[caller].add(callee)

    def callees(self, usr: str) -> set[str]:
        return self.edges.get(usr, set())

    def edge_list(self) -> list[tuple[str, str]]:
        return sorted((a, b) for a, bs in self.edges.items() for b in bs)


def build_call_graph(functions: Iterable[FunctionDecl]) -> CallGraph:
    """Caller -> callee edges between defined functions, keyed by USR."""
    fns = list(functions)
    by_name: dict[str, str] = {}
    defined = set()
    for fn in fns:
        by_name.setdefault(fn.name, compute_usr(fn))
        if fn.body is not None:
            defined.add(compute_usr(fn))
    cg = CallGraph(nodes=set(defined))
    for fn in fns:
        if fn.body is None:
            continue
        caller = compute_usr(fn)
        for n in walk(fn.body):
            if isinstance(n, Call):
                callee = by_name.get(n.callee)
                if callee in defined:
                    cg.add_edge(caller, callee)
    return cg


def violated_edges(order: list[str], cg: CallGraph) -> int:
    """Edges whose caller comes after its callee in ``order``."""
    pos = {u: i for i, u in enumerate(order)}
    return sum(1 for a, b in cg.edge_list() if a != b and pos[a] > pos[b])


def top_level_order(cg: CallGraph) -> list[str]:
    """Callers before callees; greedy feedback-arc-set heuristic on cycles.

    Repeatedly takes a source (appended to the front part) or a sink
    (prepended to the back part); when neither exists, the node whose
    out-degree most exceeds its in-degree is taken as if it were a source.
    """
    remaining = set(cg.nodes)
    succ = {u: {v for v in cg.callees(u) if v != u and v in remaining} for u in remaining}
    pred: dict[str, set[str]] = {u: set() for u in remaining}
    for u, vs in succ.items():
        for v in vs:
            pred[v].add(u)
    front: list[str] = []
    back: list[str] = []

    def remove(u: str) -> None:
        remaining.discard(u)
        for v in succ.pop(u):
            pred[v].discard(u)
        for v in pred.pop(u):
            succ[v].discard(u)

    while remaining:
        sources = sorted(u for u in remaining if not pred[u])
        if sources:
            front.append(sources[0])
            remove(sources[0])
            continue
        sinks = sorted(u for u in remaining if not succ[u])
        if sinks:
            back.insert(0, sinks[-1])
            remove(sinks[-1])
            continue
        best = min(remaining, key=lambda u: (-(len(succ[u]) - len(pred[u])), u))
        front.append(best)
        remove(best)
    order = front + back
    reverse = order[::-1]
    if violated_edges(reverse, cg) < violated_edges(order, cg):
        return reverse
    return order


def assigned_vars(stmt: Node) -> tuple[set[int], bool, bool]:
    """Syntactic write set of a statement.

    Returns (decl ids of directly assigned variables, has writes through
    pointers/indices, contains calls).
    """
    ids: set[int] = set()
    indirect = False
    calls = False
    for n in walk(stmt):
        if isinstance(n, Call):
            calls = True
        elif isinstance(n, VarDecl) and n.storage == "local":
            ids.add(n.node_id)
        elif isinstance(n, Binary) and n.op == "=":
            target = n.lhs
            while (
                (isinstance(target, Member) and not target.arrow)
                or (isinstance(target, Index) and isinstance(target.base.type, ArrayType))
            ):
                target = target.base
            if isinstance(target, DeclRef):
                ids.add(target.decl_id)
            else:
                indirect = True
    return ids, indirect, calls
