"""Symbols, symbolic values and the immutable program state.

A :class:`State` bundles five persistent maps: the environment (expression
occurrence -> value), the store (direct bindings clustered by base region),
default bindings, the generic data map used by checkers, and the range
constraints on symbols.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Optional

from .frontend.ast import INT, IntType, MiniCType, PointerType
from .memmodel import (
    GLOBALS, AllocRegion, ElementRegion, FieldRegion, GlobalSpace, Keyed, MemRegion, MemSpace,
    RegionManager, StackFrame, StackSpace, SymRegion, VarRegion, base_region, is_scalar_region,
)
from .pmap import PMap

WIDTH = 32
IMIN = -(2 ** (WIDTH - 1))
IMAX = 2 ** (WIDTH - 1) - 1

COMPARISONS = frozenset({"==", "!=", "<", "<=", ">", ">="})
ARITH = frozenset({"+", "-", "*", "/", "%"})


def wrap(v: int, width: int = WIDTH) -> int:
    """Reduce to a signed two's-complement integer of ``width`` bits."""
    m = 1 << width
    v &= m - 1
    return v - m if v >= m >> 1 else v


def c_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def c_mod(a: int, b: int) -> int:
    return a - b * c_div(a, b)


def fold(op: str, a: int, b: int, width: int = WIDTH) -> Optional[int]:
    """Concrete C semantics with wraparound; None for division by zero."""
    if op == "+":
        return wrap(a + b, width)
    if op == "-":
        return wrap(a - b, width)
    if op == "*":
        return wrap(a * b, width)
    if op == "/":
        return None if b == 0 else wrap(c_div(a, b), width)
    if op == "%":
        return None if b == 0 else wrap(c_mod(a, b), width)
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    raise ValueError(f"unknown operator {op}")


NEGATED = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
SWAPPED = {"==": "==", "!=": "!=", "<": ">", ">": "<", "<=": ">=", ">=": "<="}


# --------------------------------------------------------------------------
# Symbols
# --------------------------------------------------------------------------


class Symbol(Keyed):
    __slots__ = ("type",)

    def operands(self) -> tuple["Symbol", ...]:
        return ()

    def atoms(self) -> Iterator["Symbol"]:
        """Base symbols this expression is built from."""
        ops = self.operands()
        if not ops:
            yield self
        for o in ops:
            yield from o.atoms()


class RegionValueSym(Symbol):
    """The unknown initial contents of a region."""

    __slots__ = ("region",)

    def __init__(self, region: MemRegion, ty: MiniCType):
        self.region = region
        self.type = ty
        self._init_key((20, region.skey))

    def __repr__(self) -> str:
        return f"${region_name(self.region)}"


class ConjuredSym(Symbol):
    """Fresh value produced at a site (call result, invalidation, allocation)."""

    __slots__ = ("site", "frame_key", "count", "region", "tag")

    def __init__(self, site: int, frame_key: tuple, count: int, ty: MiniCType,
                 region: Optional[MemRegion] = None, tag: str = "conj"):
        self.site = site
        self.frame_key = frame_key
        self.count = count
        self.region = region
        self.tag = tag
        self.type = ty
        self._init_key((21, site, frame_key, count, region.skey if region is not None else ()))

    def __repr__(self) -> str:
        suffix = f"<{region_name(self.region)}>" if self.region is not None else ""
        return f"{self.tag}${self.site}.{self.count}{suffix}"


class DerivedSym(Symbol):
    """Contents of ``region`` below a region whose default value is ``parent``."""

    __slots__ = ("parent", "region")

    def __init__(self, parent: Symbol, region: MemRegion, ty: MiniCType):
        self.parent = parent
        self.region = region
        self.type = ty
        self._init_key((22, parent.skey, region.skey))

    def __repr__(self) -> str:
        return f"derived<{self.parent!r}, {region_name(self.region)}>"


class SymIntExpr(Symbol):
    __slots__ = ("lhs", "op", "rhs")

    def __init__(self, lhs: Symbol, op: str, rhs: int, ty: MiniCType = INT):
        self.lhs, self.op, self.rhs = lhs, op, rhs
        self.type = ty
        self._init_key((23, lhs.skey, op, rhs))

    def operands(self) -> tuple[Symbol, ...]:
        return (self.lhs,)

    def __repr__(self) -> str:
        return f"({self.lhs!r}) {self.op} {self.rhs}"


class IntSymExpr(Symbol):
    __slots__ = ("lhs", "op", "rhs")

    def __init__(self, lhs: int, op: str, rhs: Symbol, ty: MiniCType = INT):
        self.lhs, self.op, self.rhs = lhs, op, rhs
        self.type = ty
        self._init_key((24, lhs, op, rhs.skey))

    def operands(self) -> tuple[Symbol, ...]:
        return (self.rhs,)

    def __repr__(self) -> str:
        return f"{self.lhs} {self.op} ({self.rhs!r})"


class SymSymExpr(Symbol):
    __slots__ = ("lhs", "op", "rhs")

    def __init__(self, lhs: Symbol, op: str, rhs: Symbol, ty: MiniCType = INT):
        self.lhs, self.op, self.rhs = lhs, op, rhs
        self.type = ty
        self._init_key((25, lhs.skey, op, rhs.skey))

    def operands(self) -> tuple[Symbol, ...]:
        return (self.lhs, self.rhs)

    def __repr__(self) -> str:
        return f"({self.lhs!r}) {self.op} ({self.rhs!r})"


def region_name(r: Optional[MemRegion]) -> str:
    if r is None:
        return "?"
    if isinstance(r, VarRegion):
        return r.name
    if isinstance(r, FieldRegion):
        return f"{region_name(r.parent)}.{r.field}"
    if isinstance(r, ElementRegion):
        return f"{region_name(r.parent)}[{r.index!r}]"
    if isinstance(r, SymRegion):
        return f"*{r.symbol!r}"
    if isinstance(r, AllocRegion):
        return f"heap<{r.symbol!r}>"
    return repr(r)


# --------------------------------------------------------------------------
# Symbolic values
# --------------------------------------------------------------------------


class SVal(Keyed):
    __slots__ = ()

    def symbol(self) -> Optional[Symbol]:
        return None

    def is_concrete(self) -> bool:
        return False


class UndefinedVal(SVal):
    __slots__ = ()

    def __init__(self) -> None:
        self._init_key((30,))

    def __repr__(self) -> str:
        return "Undefined"


class UnknownVal(SVal):
    __slots__ = ()

    def __init__(self) -> None:
        self._init_key((31,))

    def __repr__(self) -> str:
        return "Unknown"


class ConcreteInt(SVal):
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = wrap(value)
        self._init_key((32, self.value))

    def is_concrete(self) -> bool:
        return True

    def __repr__(self) -> str:
        return str(self.value)


class SymVal(SVal):
    __slots__ = ("sym",)

    def __init__(self, sym: Symbol):
        self.sym = sym
        self._init_key((33, sym.skey))

    def symbol(self) -> Optional[Symbol]:
        return self.sym

    def __repr__(self) -> str:
        return repr(self.sym)


class LocVal(SVal):
    """Address of a concrete region (never null)."""

    __slots__ = ("region",)

    def __init__(self, region: MemRegion):
        self.region = region
        self._init_key((34, region.skey))

    def __repr__(self) -> str:
        return f"&{region_name(self.region)}"


class NullLoc(SVal):
    __slots__ = ()

    def __init__(self) -> None:
        self._init_key((35,))

    def is_concrete(self) -> bool:
        return True

    def __repr__(self) -> str:
        return "null"


UNDEFINED = UndefinedVal()
UNKNOWN = UnknownVal()
NULL = NullLoc()


class SymbolManager:
    """Interns symbols for one analysis."""

    def __init__(self, regions: Optional[RegionManager] = None):
        self.regions = regions or RegionManager()
        self._table: dict[tuple, Symbol] = {}

    def _intern(self, s: Symbol) -> Symbol:
        return self._table.setdefault(s.skey, s)

    def region_value(self, r: MemRegion, ty: MiniCType) -> Symbol:
        return self._intern(RegionValueSym(r, ty))

    def conjured(self, site: int, frame_key: tuple, count: int, ty: MiniCType,
                 region: Optional[MemRegion] = None, tag: str = "conj") -> Symbol:
        return self._intern(ConjuredSym(site, frame_key, count, ty, region, tag))

    def derived(self, parent: Symbol, r: MemRegion, ty: MiniCType) -> Symbol:
        return self._intern(DerivedSym(parent, r, ty))

    def sym_int(self, lhs: Symbol, op: str, rhs: int, ty: MiniCType = INT) -> Symbol:
        return self._intern(SymIntExpr(lhs, op, wrap(rhs), ty))

    def int_sym(self, lhs: int, op: str, rhs: Symbol, ty: MiniCType = INT) -> Symbol:
        return self._intern(IntSymExpr(wrap(lhs), op, rhs, ty))

    def sym_sym(self, lhs: Symbol, op: str, rhs: Symbol, ty: MiniCType = INT) -> Symbol:
        return self._intern(SymSymExpr(lhs, op, rhs, ty))

    def count(self) -> int:
        return len(self._table)


# --------------------------------------------------------------------------
# State
# --------------------------------------------------------------------------

_EMPTY: PMap = PMap()


class State:
    __slots__ = ("env", "store", "defaults", "gdm", "constraints", "_hash")

    def __init__(self, env: PMap = _EMPTY, store: PMap = _EMPTY, defaults: PMap = _EMPTY,
                 gdm: PMap = _EMPTY, constraints: PMap = _EMPTY):
        self.env = env
        self.store = store
        self.defaults = defaults
        self.gdm = gdm
        self.constraints = constraints
        self._hash: Optional[int] = None

    def _replace(self, **kw) -> "State":
        return State(
            kw.get("env", self.env), kw.get("store", self.store), kw.get("defaults", self.defaults),
            kw.get("gdm", self.gdm), kw.get("constraints", self.constraints),
        )

    def _parts(self) -> tuple:
        return (self.env, self.store, self.defaults, self.gdm, self.constraints)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, State):
            return NotImplemented
        return self is other or (hash(self) == hash(other) and self._parts() == other._parts())

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._parts())
        return self._hash

    # -- environment -------------------------------------------------------------

    def bind_expr(self, key: tuple, v: SVal) -> "State":
        return self._replace(env=self.env.set(key, v))

    def lookup_expr(self, key: tuple) -> SVal:
        return self.env.get(key, UNKNOWN)

    def clear_env_frame(self, frame_key: tuple) -> "State":
        env = self.env.remove_if(lambda k, _v: k[1] == frame_key)
        return self if env is self.env else self._replace(env=env)

    # -- store -------------------------------------------------------------------

    def direct_binding(self, r: MemRegion) -> Optional[SVal]:
        cluster = self.store.get(base_region(r))
        return cluster.get(r) if cluster is not None else None

    def bind_loc(self, r: MemRegion, v: SVal) -> "State":
        if isinstance(r, MemSpace):
            raise ValueError("cannot bind a memory space")
        base = base_region(r)
        cluster = self.store.get(base, _EMPTY)
        return self._replace(store=self.store.set(base, cluster.set(r, v)))

    def default_for(self, r: MemRegion) -> Optional[tuple[MemRegion, SVal]]:
        """Nearest ancestor (or self, or memory space) carrying a default binding."""
        cur: Optional[MemRegion] = r
        while cur is not None:
            d = self.defaults.get(cur)
            if d is not None:
                return cur, d
            cur = cur.parent
        return None

    def lookup_loc(self, r: MemRegion, ty: MiniCType, mgr: SymbolManager) -> SVal:
        v = self.direct_binding(r)
        if v is not None:
            return v
        found = self.default_for(r)
        if found is not None:
            holder, d = found
            if isinstance(d, SymVal):
                return SymVal(mgr.derived(d.sym, r, ty))
            return d
        space = r.space()
        if isinstance(space, StackSpace):
            b = base_region(r)
            if isinstance(b, VarRegion) and b.decl is not None and b.decl.storage == "param":
                return SymVal(mgr.region_value(r, ty))
            return UNDEFINED
        return SymVal(mgr.region_value(r, ty))

    def remove_subtree(self, r: MemRegion) -> "State":
        """Drop direct and default bindings at ``r`` and below."""
        store, defaults = self.store, self.defaults
        if isinstance(r, MemSpace):
            store = store.remove_if(lambda b, _c: b.parent == r)
        else:
            base = base_region(r)
            if base == r:
                store = store.remove(base)
            else:
                cluster = store.get(base)
                if cluster is not None:
                    cluster = cluster.remove_if(lambda k, _v: k.is_within(r))
                    store = store.set(base, cluster) if cluster else store.remove(base)
        defaults = defaults.remove_if(lambda k, _v: k.is_within(r))
        return self._replace(store=store, defaults=defaults)

    def set_default(self, r: MemRegion, v: SVal) -> "State":
        return self._replace(defaults=self.defaults.set(r, v))

    def bindings(self) -> Iterator[tuple[MemRegion, SVal]]:
        for _b, cluster in self.store.items():
            yield from cluster.items()

    # -- gdm / constraints ---------------------------------------------------------

    def gdm_get(self, tag: str, key, default=None):
        return self.gdm.get((tag, key), default)

    def gdm_set(self, tag: str, key, value) -> "State":
        return self._replace(gdm=self.gdm.set((tag, key), value))

    def gdm_remove(self, tag: str, key) -> "State":
        return self._replace(gdm=self.gdm.remove((tag, key)))

    def gdm_items(self, tag: str) -> Iterator[tuple[object, object]]:
        for (t, k), v in self.gdm.items():
            if t == tag:
                yield k, v

    def with_constraints(self, constraints: PMap) -> "State":
        return self._replace(constraints=constraints)

    def dump(self) -> str:
        lines = ["Store:"]
        for r, v in self.bindings():
            lines.append(f"  {region_name(r)} : {v!r}")
        for r, v in self.defaults.items():
            lines.append(f"  default {region_name(r) if not isinstance(r, MemSpace) else r!r} : {v!r}")
        lines.append("Ranges:")
        for s, rs in self.constraints.items():
            lines.append(f"  {s!r} : {rs}")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# Symbol collection, liveness and invalidation
# --------------------------------------------------------------------------


def region_symbols(r: Optional[MemRegion]) -> Iterator[Symbol]:
    while r is not None:
        if isinstance(r, (SymRegion, AllocRegion)):
            yield r.symbol
        elif isinstance(r, ElementRegion):
            yield from sval_symbols(r.index)
        r = r.parent


def sval_symbols(v: SVal) -> Iterator[Symbol]:
    if isinstance(v, SymVal):
        yield v.sym
    elif isinstance(v, LocVal):
        yield from region_symbols(v.region)


def _close(syms: Iterable[Symbol], out: set[Symbol]) -> None:
    stack = list(syms)
    while stack:
        s = stack.pop()
        if s in out:
            continue
        out.add(s)
        stack.extend(s.operands())
        if isinstance(s, DerivedSym):
            stack.append(s.parent)
        if isinstance(s, (RegionValueSym, DerivedSym)):
            stack.extend(region_symbols(s.region))


class SymbolReaper:
    """Answers liveness questions for one garbage-collection point."""

    def __init__(self, state: State, live_frames: set[tuple]):
        self.state = state
        self.live_frames = live_frames
        self.reachable: set[Symbol] = set()
        roots: list[Symbol] = []
        for _k, v in state.env.items():
            roots.extend(sval_symbols(v))
        for r, v in state.bindings():
            roots.extend(region_symbols(r))
            roots.extend(sval_symbols(v))
        for r, v in state.defaults.items():
            roots.extend(region_symbols(r))
            roots.extend(sval_symbols(v))
        _close(roots, self.reachable)
        self._memo: dict[Symbol, bool] = {}

    def region_live(self, r: MemRegion) -> bool:
        space = r.space()
        if isinstance(space, StackSpace):
            if space.frame.skey not in self.live_frames:
                return False
        cur: Optional[MemRegion] = r
        while cur is not None and not isinstance(cur, MemSpace):
            if isinstance(cur, (SymRegion, AllocRegion)) and not self.is_live(cur.symbol):
                return False
            if isinstance(cur, ElementRegion):
                s = cur.index.symbol()
                if s is not None and not self.is_live(s):
                    return False
            cur = cur.parent
        return True

    def is_live(self, s: Symbol) -> bool:
        got = self._memo.get(s)
        if got is not None:
            return got
        self._memo[s] = False  # cycle guard
        if s in self.reachable:
            live = True
        elif isinstance(s, RegionValueSym):
            live = (
                self.region_live(s.region)
                and self.state.direct_binding(s.region) is None
                and self.state.default_for(s.region) is None
            )
        elif isinstance(s, DerivedSym):
            live = self.is_live(s.parent) and self.state.direct_binding(s.region) is None and self.region_live(s.region)
        elif s.operands():
            live = all(self.is_live(o) for o in s.operands())
        else:
            live = False
        self._memo[s] = live
        return live


def remove_dead_bindings(state: State, live_frames: Iterable[StackFrame]) -> tuple[State, SymbolReaper]:
    """Drop bindings of finished frames and constraints on unreachable symbols.

    The returned reaper is handed to checkers so they can clean their own GDM
    entries (and report leaks for allocations that just died).
    """
    keys = {f.skey for f in live_frames}

    def dead_region(r: MemRegion) -> bool:
        sp = r.space() if not isinstance(r, MemSpace) else r
        return isinstance(sp, StackSpace) and sp.frame.skey not in keys

    store = state.store.remove_if(lambda b, _c: dead_region(b))
    defaults = state.defaults.remove_if(lambda r, _v: dead_region(r))
    if store is not state.store or defaults is not state.defaults:
        state = state._replace(store=store, defaults=defaults)
    reaper = SymbolReaper(state, keys)
    constraints = state.constraints.remove_if(lambda s, _r: not reaper.is_live(s))
    if constraints is not state.constraints:
        state = state._replace(constraints=constraints)
    return state, reaper


def pointee_region(v: SVal, mgr: SymbolManager) -> Optional[MemRegion]:
    if isinstance(v, LocVal):
        return v.region
    if isinstance(v, SymVal) and isinstance(v.sym.type, PointerType):
        return mgr.regions.symbolic(v.sym)
    return None


def reachable_regions(state: State, roots: Iterable[MemRegion], mgr: SymbolManager) -> list[MemRegion]:
    """Regions reachable from ``roots`` by following pointers stored inside them."""
    seen: list[MemRegion] = []
    stack = list(roots)
    while stack:
        r = stack.pop()
        if any(r.is_within(s) for s in seen if not isinstance(s, MemSpace)) or r in seen:
            continue
        seen.append(r)
        if isinstance(r, GlobalSpace):
            contents = [(k, v) for k, v in state.bindings() if k.space() == GLOBALS]
        else:
            contents = [(k, v) for k, v in state.bindings() if k.is_within(r)]
        for _k, v in contents:
            p = pointee_region(v, mgr)
            if p is not None:
                stack.append(p)
    return sorted(seen)


def invalidate(state: State, regions: Iterable[MemRegion], site: int, frame: StackFrame,
               count: int, mgr: SymbolManager) -> State:
    """Forget everything known about the given regions and their subtrees.

    Scalar regions get a fresh conjured value bound directly; aggregates, heap
    objects and memory spaces get a conjured default binding so that every
    later read below them yields a fresh derived symbol.
    """
    for r in sorted(set(regions)):
        state = state.remove_subtree(r)
        ty: MiniCType = r.type if not isinstance(r, MemSpace) else INT
        if not isinstance(ty, (IntType, PointerType)):
            ty = INT
        sym = mgr.conjured(site, frame.skey, count, ty, region=r, tag="inv")
        if not isinstance(r, MemSpace) and is_scalar_region(r):
            state = state.bind_loc(r, SymVal(sym))
        else:
            state = state.set_default(r, SymVal(sym))
    return state


# --------------------------------------------------------------------------
# Value arithmetic
# --------------------------------------------------------------------------


def _as_symbolic_pointer(v: SVal) -> Optional[Symbol]:
    if isinstance(v, SymVal) and isinstance(v.sym.type, PointerType):
        return v.sym
    return None


def eval_binop(op: str, lhs: SVal, rhs: SVal, mgr: SymbolManager, ty: MiniCType = INT) -> SVal:
    """Evaluate ``lhs op rhs`` symbolically; division by zero yields Undefined."""
    if isinstance(lhs, UndefinedVal) or isinstance(rhs, UndefinedVal):
        return UNDEFINED
    if isinstance(lhs, UnknownVal) or isinstance(rhs, UnknownVal):
        return UNKNOWN
    if isinstance(lhs, (LocVal, NullLoc)) or isinstance(rhs, (LocVal, NullLoc)) or _as_symbolic_pointer(lhs) or _as_symbolic_pointer(rhs):
        return _eval_pointer_op(op, lhs, rhs, mgr)
    if isinstance(lhs, ConcreteInt) and isinstance(rhs, ConcreteInt):
        r = fold(op, lhs.value, rhs.value)
        return UNDEFINED if r is None else ConcreteInt(r)
    if isinstance(lhs, SymVal) and isinstance(rhs, ConcreteInt):
        return _sym_int(lhs.sym, op, rhs.value, mgr)
    if isinstance(lhs, ConcreteInt) and isinstance(rhs, SymVal):
        c, s = lhs.value, rhs.sym
        if op in ("+", "*"):
            return _sym_int(s, op, c, mgr)
        if op in COMPARISONS:
            return _sym_int(s, SWAPPED[op], c, mgr)
        return SymVal(mgr.int_sym(c, op, s))
    assert isinstance(lhs, SymVal) and isinstance(rhs, SymVal)
    if lhs.sym == rhs.sym:
        if op == "-":
            return ConcreteInt(0)
        if op in ("==", "<=", ">="):
            return ConcreteInt(1)
        if op in ("!=", "<", ">"):
            return ConcreteInt(0)
    return SymVal(mgr.sym_sym(lhs.sym, op, rhs.sym))


def _sym_int(s: Symbol, op: str, c: int, mgr: SymbolManager) -> SVal:
    if op in ("+", "-") and c == 0:
        return SymVal(s)
    if op in ("*", "/") and c == 1:
        return SymVal(s)
    if op == "*" and c == 0:
        return ConcreteInt(0)
    if op in ("/", "%") and c == 0:
        return UNDEFINED
    if op in ("+", "-"):
        total = c if op == "+" else -c
        # (s + a) + b -> s + (a + b)
        if isinstance(s, SymIntExpr) and s.op in ("+", "-"):
            total += s.rhs if s.op == "+" else -s.rhs
            s = s.lhs
        total = wrap(total)
        if total == 0:
            return SymVal(s)
        if total < 0 and total != IMIN:
            return SymVal(mgr.sym_int(s, "-", -total))
        return SymVal(mgr.sym_int(s, "+", total))
    return SymVal(mgr.sym_int(s, op, c))


def _eval_pointer_op(op: str, lhs: SVal, rhs: SVal, mgr: SymbolManager) -> SVal:
    def is_null(v: SVal) -> bool:
        return isinstance(v, NullLoc) or (isinstance(v, ConcreteInt) and v.value == 0)

    if op in ("==", "!="):
        eq: Optional[bool] = None
        if is_null(lhs) and is_null(rhs):
            eq = True
        elif isinstance(lhs, LocVal) and is_null(rhs) or isinstance(rhs, LocVal) and is_null(lhs):
            eq = False
        elif isinstance(lhs, LocVal) and isinstance(rhs, LocVal):
            if lhs.region == rhs.region:
                eq = True
            elif not _may_alias(lhs.region, rhs.region):
                eq = False
        if eq is not None:
            return ConcreteInt(int(eq if op == "==" else not eq))
        ls, rs = _as_symbolic_pointer(lhs), _as_symbolic_pointer(rhs)
        if ls is not None and is_null(rhs):
            return SymVal(mgr.sym_int(ls, op, 0))
        if rs is not None and is_null(lhs):
            return SymVal(mgr.sym_int(rs, op, 0))
        if ls is not None and rs is not None:
            if ls == rs:
                return ConcreteInt(int(op == "=="))
            return SymVal(mgr.sym_sym(ls, op, rs))
        return UNKNOWN
    if op == "-":
        if isinstance(lhs, LocVal) and isinstance(rhs, LocVal) and lhs.region == rhs.region:
            return ConcreteInt(0)
        ls, rs = _as_symbolic_pointer(lhs), _as_symbolic_pointer(rhs)
        if ls is not None and rs is not None:
            if ls == rs:
                return ConcreteInt(0)
            return SymVal(mgr.sym_sym(ls, "-", rs))
        return UNKNOWN
    if op in COMPARISONS:
        ls, rs = _as_symbolic_pointer(lhs), _as_symbolic_pointer(rhs)
        if ls is not None and rs is not None:
            return SymVal(mgr.sym_sym(ls, op, rs))
        if isinstance(lhs, LocVal) and isinstance(rhs, LocVal) and lhs.region == rhs.region:
            return ConcreteInt(fold(op, 0, 0) or 0)
        return UNKNOWN
    return UNKNOWN


def _may_alias(a: MemRegion, b: MemRegion) -> bool:
    """Concrete regions with symbolic bases or symbolic indices may overlap."""
    def symbolic(r: MemRegion) -> bool:
        return any(
            isinstance(x, SymRegion) or (isinstance(x, ElementRegion) and not x.index.is_concrete())
            for x in r.ancestors()
        )
    return symbolic(a) or symbolic(b)


def eval_unary(op: str, v: SVal, mgr: SymbolManager) -> SVal:
    if isinstance(v, UndefinedVal):
        return UNDEFINED
    if isinstance(v, UnknownVal):
        return UNKNOWN
    if op == "-":
        if isinstance(v, ConcreteInt):
            return ConcreteInt(-v.value)
        if isinstance(v, SymVal):
            return SymVal(mgr.int_sym(0, "-", v.sym))
        return UNKNOWN
    if op == "!":
        zero: SVal = NULL if isinstance(v, (LocVal, NullLoc)) or _as_symbolic_pointer(v) else ConcreteInt(0)
        return eval_binop("==", v, zero, mgr)
    raise ValueError(op)


def to_condition(v: SVal, mgr: SymbolManager) -> SVal:
    """Normalize a value used as a branch condition to a truth-valued SVal."""
    if isinstance(v, SymVal) and isinstance(v.sym, (SymIntExpr, SymSymExpr)) and v.sym.op in COMPARISONS:
        return v
    if isinstance(v, SymVal):
        zero: SVal = NULL if isinstance(v.sym.type, PointerType) else ConcreteInt(0)
        return eval_binop("!=", v, zero, mgr)
    if isinstance(v, LocVal):
        return ConcreteInt(1)
    if isinstance(v, NullLoc):
        return ConcreteInt(0)
    return v


def frame_keys(frame: Optional[StackFrame]) -> set[tuple]:
    return {f.skey for f in frame.chain()} if frame is not None else set()

