"""Bug checkers, path reconstruction and report deduplication.

Checkers are invoked by the engine while it evaluates statements. Each one
either lets evaluation continue (possibly on a narrower state), or raises a
:class:`Sink` that ends the path with a report. The malloc checker keeps its
per-path facts in the state's generic data map.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterable, Optional

from .frontend.ast import Expr, SourceLoc, expr_to_str
from .solver import ConstraintManager, RangeSet
from .symstate import (
    AllocRegion, ConcreteInt, LocVal, NullLoc, State, Symbol, SymbolReaper, SymVal, SVal,
    UndefinedVal,
)

if TYPE_CHECKING:  # pragma: no cover
    from .engine import ExplodedGraph, ExplodedNode

DIV_ZERO = "core.DivideZero"
NULL_DEREF = "core.NullDereference"
UNDEF_DEREF = "core.UndefDereference"
MALLOC = "unix.Malloc"
CHECKER_IDS = (DIV_ZERO, NULL_DEREF, UNDEF_DEREF, MALLOC)


@dataclass(frozen=True)
class PathEvent:
    kind: str  # assume | call | alloc | origin | warning
    loc: SourceLoc
    message: str


@dataclass
class BugReport:
    checker: str
    message: str
    loc: SourceLoc
    fn_usr: str
    depth: int = 0
    uniqueing_loc: Optional[SourceLoc] = None
    bug_symbol: Optional[Symbol] = None
    origin_region: Any = None
    origin_literal: Optional[SourceLoc] = None
    alloc_symbol: Optional[Symbol] = None
    events: list[PathEvent] = field(default_factory=list)
    suppressed: bool = False
    suppress_reason: str = ""
    issue_hash: str = ""
    path_condition: Any = None
    end_node: Any = field(default=None, repr=False, compare=False)

    @property
    def unique_key(self) -> tuple:
        u = self.uniqueing_loc or self.loc
        return (self.checker, u.file, u.line, u.col, self.fn_usr)

    def event_locs(self) -> tuple:
        return tuple((e.loc.file, e.loc.line, e.loc.col) for e in self.events)

    def sort_key(self) -> tuple:
        return (self.loc.file, self.loc.line, self.loc.col, self.checker, self.message, self.issue_hash)


class Sink(Exception):
    """Ends the current path; ``report`` is None for no-return calls."""

    def __init__(self, report: Optional[BugReport], state: State):
        super().__init__(report.message if report else "sink")
        self.report = report
        self.state = state


@dataclass(frozen=True, order=True)
class AllocFact:
    status: str  # Allocated | Freed
    site: SourceLoc


class CheckerContext:
    """What the engine exposes to checkers while evaluating one statement."""

    state: State
    cm: ConstraintManager

    def make_report(self, checker: str, message: str, loc: SourceLoc) -> BugReport:  # pragma: no cover
        raise NotImplementedError

    def add_report(self, report: BugReport) -> None:  # pragma: no cover
        raise NotImplementedError


class Checkers:
    """Division-by-zero, dereference and malloc/leak checking."""

    def __init__(self) -> None:
        self.enabled = set(CHECKER_IDS)

    # -- division ------------------------------------------------------------------

    def check_division(self, ctx: CheckerContext, divisor: SVal, expr: Expr, divisor_expr: Expr,
                       origin_region: Any = None) -> State:
        state = ctx.state
        if DIV_ZERO not in self.enabled or isinstance(divisor, UndefinedVal):
            return state
        if ctx.cm.known_value(state, divisor) == 0:
            r = ctx.make_report(DIV_ZERO, "Division by zero", expr.loc)
            r.bug_symbol = divisor.symbol()
            r.origin_region = origin_region
            r.origin_literal = divisor_expr.loc if divisor_expr.__class__.__name__ == "IntLiteral" else None
            raise Sink(r, state)
        if isinstance(divisor, SymVal):
            nonzero = ctx.cm.assume(state, _eq_zero(ctx, divisor), False)
            if nonzero is not None:
                return nonzero
        return state

    # -- dereference ---------------------------------------------------------------

    def check_deref(self, ctx: CheckerContext, ptr: SVal, expr: Expr, loc: SourceLoc,
                    origin_region: Any = None) -> State:
        """``expr`` is the pointer operand; ``loc`` is where the dereference happens."""
        state = ctx.state
        if isinstance(ptr, UndefinedVal):
            if UNDEF_DEREF in self.enabled:
                r = ctx.make_report(UNDEF_DEREF, "Dereference of undefined pointer value", loc)
                r.origin_region = origin_region
                raise Sink(r, state)
            return state
        if NULL_DEREF not in self.enabled:
            return state
        is_null = isinstance(ptr, NullLoc) or (isinstance(ptr, ConcreteInt) and ptr.value == 0)
        if isinstance(ptr, SymVal) and ctx.cm.known_value(state, ptr) == 0:
            is_null = True
        if is_null:
            what = expr_to_str(expr)
            r = ctx.make_report(NULL_DEREF, f"Dereference of null pointer '{what}'", loc)
            r.bug_symbol = ptr.symbol()
            r.origin_region = origin_region
            raise Sink(r, state)
        if isinstance(ptr, SymVal):
            nonnull = ctx.cm.assume(state, _eq_zero(ctx, ptr), False)
            if nonnull is not None:
                return nonnull
        return state

    # -- malloc / free / leaks ---------------------------------------------------------

    def on_malloc(self, ctx: CheckerContext, sym: Symbol, call_loc: SourceLoc) -> State:
        if MALLOC not in self.enabled:
            return ctx.state
        return ctx.state.gdm_set(MALLOC, sym, AllocFact("Allocated", call_loc))

    def on_free(self, ctx: CheckerContext, ptr: SVal, call_loc: SourceLoc) -> State:
        state = ctx.state
        if not (isinstance(ptr, LocVal) and isinstance(ptr.region, AllocRegion)):
            return state
        sym = ptr.region.symbol
        fact = state.gdm_get(MALLOC, sym)
        if fact is None:
            return state
        if fact.status == "Freed":
            r = ctx.make_report(MALLOC, "Attempt to free released memory", call_loc)
            r.uniqueing_loc = call_loc
            r.alloc_symbol = sym
            raise Sink(r, state)
        return state.gdm_set(MALLOC, sym, AllocFact("Freed", fact.site))

    def on_escape(self, state: State, syms: Iterable[Symbol]) -> State:
        for s in sorted(set(syms)):
            if state.gdm_get(MALLOC, s) is not None:
                state = state.gdm_remove(MALLOC, s)
        return state

    def on_dead_symbols(self, ctx: CheckerContext, reaper: SymbolReaper, anchor: SourceLoc) -> State:
        state = ctx.state
        for sym, fact in list(state.gdm_items(MALLOC)):
            if reaper.is_live(sym):  # type: ignore[arg-type]
                continue
            state = state.gdm_remove(MALLOC, sym)
            if fact.status == "Allocated":  # type: ignore[attr-defined]
                r = ctx.make_report(MALLOC, "Potential memory leak", anchor)
                r.uniqueing_loc = fact.site  # type: ignore[attr-defined]
                r.alloc_symbol = sym  # type: ignore[assignment]
                ctx.add_report(r)
        return state


def _eq_zero(ctx: CheckerContext, v: SVal) -> SVal:
    from .symstate import eval_binop
    return eval_binop("==", v, ConcreteInt(0), ctx.cm.mgr)


# --------------------------------------------------------------------------
# Path reconstruction
# --------------------------------------------------------------------------


def shortest_path(end: "ExplodedNode") -> list["ExplodedNode"]:
    """Root-to-``end`` path with the fewest nodes (ties: lowest node ids)."""
    prev: dict[int, Optional[ExplodedNode]] = {end.id: None}
    queue = deque([end])
    root = None
    while queue:
        n = queue.popleft()
        if not n.preds:
            root = n
            break
        for p in sorted((e.src for e in n.preds), key=lambda x: x.id):
            if p.id not in prev:
                prev[p.id] = n
                queue.append(p)
    assert root is not None
    path = [root]
    while path[-1] is not end:
        nxt = prev[path[-1].id]
        assert nxt is not None
        path.append(nxt)
    return path


def _edge(src: "ExplodedNode", dst: "ExplodedNode"):
    for e in dst.preds:
        if e.src is src:
            return e
    raise KeyError("no edge")


def forces_zero(cm: ConstraintManager, tag, sym: Symbol) -> bool:
    """Does this single assumption, on an empty state, pin ``sym`` to 0?"""
    st = cm.assume(State(), tag.cond, tag.truth)
    if st is None:
        return False
    return cm.get_range(st, sym) == RangeSet.point(0, cm.width)


def run_visitors(report: BugReport, graph: "ExplodedGraph", cm: ConstraintManager,
                 inline_defensive: bool = True) -> BugReport:
    """Build path events and apply suppression heuristics to ``report``."""
    end = report.end_node
    path = shortest_path(end)
    edges = [_edge(a, b) for a, b in zip(path, path[1:])]
    events: list[PathEvent] = []
    origin_idx = _origin_edge_index(report, path)
    for i, e in enumerate(edges):
        tag = e.tag
        if tag is not None and tag.split:
            word = "true" if tag.truth else "false"
            events.append(PathEvent("assume", tag.expr.loc, f"Assuming '{expr_to_str(tag.expr)}' is {word}"))
        kind = e.dst.point.kind
        if kind == "call_enter":
            callee = e.dst.point.frame.fn
            events.append(PathEvent("call", graph.call_locs[e.dst.point.frame.skey], f"Calling '{callee.name}'"))
        elif kind == "call_exit":
            callee_name = e.src.point.frame.fn.name
            site = graph.call_locs[e.src.point.frame.skey]
            events.append(PathEvent("call", site, f"Returning from '{callee_name}'"))
        if report.alloc_symbol is not None:
            before = e.src.state.gdm_get(MALLOC, report.alloc_symbol)
            after = e.dst.state.gdm_get(MALLOC, report.alloc_symbol)
            if before is None and after is not None:
                events.append(PathEvent("alloc", after.site, "Memory is allocated"))
        if origin_idx == i:
            loc = e.dst.point.loc
            if loc is not None:
                events.append(PathEvent("origin", loc, f"Value assigned to '{_region_label(report.origin_region)}'"))
    if report.origin_literal is not None:
        events.append(PathEvent("origin", report.origin_literal, "The value 0 is a literal constant"))
    events.append(PathEvent("warning", report.loc, report.message))
    report.events = events
    report.path_condition = collect_tags(path, edges)

    if inline_defensive and report.bug_symbol is not None:
        depths = []
        for e in edges:
            if e.tag is not None and forces_zero(cm, e.tag, report.bug_symbol):
                depths.append(e.src.point.frame.depth)
        if depths and not any(d <= report.depth for d in depths):
            report.suppressed = True
            report.suppress_reason = "inline defensive check"
    return report


def _region_label(r: Any) -> str:
    from .symstate import region_name
    return region_name(r)


def _origin_edge_index(report: BugReport, path: list) -> Optional[int]:
    """Index of the last edge on which the origin region's binding changed."""
    r = report.origin_region
    if r is None:
        return None
    for i in range(len(path) - 1, 0, -1):
        a, b = path[i - 1], path[i]
        if a.state.direct_binding(r) != b.state.direct_binding(r) and b.state.direct_binding(r) is not None:
            return i - 1
    return None


def collect_tags(path: list, edges: list) -> dict:
    """Assumption tags in path order plus the end-node range constraints."""
    tags = [(e.tag.cond, e.tag.truth) for e in edges if e.tag is not None]
    end = path[-1].state
    return {"assumptions": tags, "ranges": list(end.constraints.items())}


# --------------------------------------------------------------------------
# Deduplication
# --------------------------------------------------------------------------


def dedup_reports(reports: Iterable[BugReport]) -> list[BugReport]:
    """Keep one report per (checker, uniqueing location, function).

    Unsuppressed reports win over suppressed ones; then fewer path events;
    then the lexicographically smallest sequence of event locations.
    """
    groups: dict[tuple, list[BugReport]] = {}
    for r in reports:
        groups.setdefault(r.unique_key, []).append(r)
    out = []
    for key in sorted(groups):
        best = min(groups[key], key=lambda r: (r.suppressed, len(r.events), r.event_locs(), r.sort_key()))
        out.append(best)
    return sorted(out, key=lambda r: r.sort_key())
