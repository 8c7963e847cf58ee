"""Range-based constraint manager.

Each constrained symbol maps to a :class:`RangeSet`, a union of disjoint
intervals over fixed-width two's-complement integers. ``assume`` narrows
those sets and reports infeasibility when one becomes empty. Only linear
forms with one symbol and a constant are reasoned about; everything else is
accepted unchanged, which over-approximates the feasible paths.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional

from .symstate import (
    COMPARISONS, WIDTH, ConcreteInt, IntSymExpr, LocVal, NullLoc, State, Symbol, SymbolManager,
    SymIntExpr, SymSymExpr, SymVal, SVal, UndefinedVal, UnknownVal, eval_binop, to_condition,
)


def bounds(width: int) -> tuple[int, int]:
    return -(1 << (width - 1)), (1 << (width - 1)) - 1


@dataclass(frozen=True)
class RangeSet:
    """Sorted, disjoint, non-adjacent inclusive intervals at a fixed width."""

    intervals: tuple[tuple[int, int], ...]
    width: int = WIDTH

    @staticmethod
    def make(intervals: Iterable[tuple[int, int]], width: int = WIDTH) -> "RangeSet":
        lo_b, hi_b = bounds(width)
        items = sorted((max(lo, lo_b), min(hi, hi_b)) for lo, hi in intervals)
        out: list[tuple[int, int]] = []
        for lo, hi in items:
            if lo > hi:
                continue
            if out and lo <= out[-1][1] + 1:
                if hi > out[-1][1]:
                    out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
        return RangeSet(tuple(out), width)

    @staticmethod
    def full(width: int = WIDTH) -> "RangeSet":
        return RangeSet((bounds(width),), width)

    @staticmethod
    def empty(width: int = WIDTH) -> "RangeSet":
        return RangeSet((), width)

    @staticmethod
    def point(v: int, width: int = WIDTH) -> "RangeSet":
        return RangeSet(((v, v),), width)

    def is_empty(self) -> bool:
        return not self.intervals

    def is_full(self) -> bool:
        return self.intervals == (bounds(self.width),)

    def single(self) -> Optional[int]:
        if len(self.intervals) == 1 and self.intervals[0][0] == self.intervals[0][1]:
            return self.intervals[0][0]
        return None

    def __contains__(self, v: int) -> bool:
        return any(lo <= v <= hi for lo, hi in self.intervals)

    def size(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.intervals)

    def intersect(self, other: "RangeSet") -> "RangeSet":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return RangeSet(tuple(out), self.width)

    def union(self, other: "RangeSet") -> "RangeSet":
        return RangeSet.make(self.intervals + other.intervals, self.width)

    def complement(self) -> "RangeSet":
        lo_b, hi_b = bounds(self.width)
        out = []
        nxt = lo_b
        for lo, hi in self.intervals:
            if lo > nxt:
                out.append((nxt, lo - 1))
            nxt = hi + 1
        if nxt <= hi_b:
            out.append((nxt, hi_b))
        return RangeSet(tuple(out), self.width)

    def shift(self, k: int) -> "RangeSet":
        """``{v + k}`` with wraparound."""
        lo_b, _ = bounds(self.width)
        m = 1 << self.width
        k %= m
        pieces = []
        for lo, hi in self.intervals:
            a = (lo - lo_b + k) % m
            b = a + (hi - lo)
            if b < m:
                pieces.append((a + lo_b, b + lo_b))
            else:
                pieces.append((a + lo_b, m - 1 + lo_b))
                pieces.append((lo_b, b - m + lo_b))
        return RangeSet.make(pieces, self.width)

    def negate(self) -> "RangeSet":
        """``{-v}`` with wraparound (the minimum maps to itself)."""
        lo_b, _ = bounds(self.width)
        pieces = []
        for lo, hi in self.intervals:
            if lo == lo_b:
                pieces.append((lo_b, lo_b))
                lo += 1
            if lo <= hi:
                pieces.append((-hi, -lo))
        return RangeSet.make(pieces, self.width)

    def __str__(self) -> str:
        lo_b, hi_b = bounds(self.width)

        def fmt(v: int) -> str:
            return "IMIN" if v == lo_b else "IMAX" if v == hi_b else str(v)

        return "{ " + ", ".join(f"[{fmt(lo)}, {fmt(hi)}]" for lo, hi in self.intervals) + " }"


def relation_range(op: str, c: int, width: int = WIDTH) -> RangeSet:
    """Values ``v`` with ``v op c``."""
    lo_b, hi_b = bounds(width)
    if op == "==":
        return RangeSet.point(c, width)
    if op == "!=":
        return RangeSet.point(c, width).complement()
    if op == "<":
        return RangeSet.make([(lo_b, c - 1)], width)
    if op == "<=":
        return RangeSet.make([(lo_b, c)], width)
    if op == ">":
        return RangeSet.make([(c + 1, hi_b)], width)
    if op == ">=":
        return RangeSet.make([(c, hi_b)], width)
    raise ValueError(op)


def is_comparison(sym: Symbol) -> bool:
    return isinstance(sym, (SymIntExpr, SymSymExpr)) and sym.op in COMPARISONS


class ConstraintManager:
    """Implements ``assume`` and range queries over :class:`State` constraints."""

    def __init__(self, mgr: SymbolManager, width: int = WIDTH):
        self.mgr = mgr
        self.width = width
        self.stats: Counter[str] = Counter()

    # -- queries -----------------------------------------------------------------

    def _bool_domain(self) -> RangeSet:
        return RangeSet.make([(0, 1)], self.width)

    def get_range(self, state: State, sym: Symbol) -> RangeSet:
        """Known range of ``sym``, derived from its operands where possible."""
        stored = state.constraints.get(sym)
        derived = self._derive(state, sym)
        return derived if stored is None else stored.intersect(derived)

    def _derive(self, state: State, sym: Symbol) -> RangeSet:
        w = self.width
        if isinstance(sym, SymIntExpr):
            if sym.op in COMPARISONS:
                inner = self.get_range(state, sym.lhs)
                rel = relation_range(sym.op, sym.rhs, w)
                return self._truth_range(inner, rel)
            if sym.op == "+":
                return self.get_range(state, sym.lhs).shift(sym.rhs)
            if sym.op == "-":
                return self.get_range(state, sym.lhs).shift(-sym.rhs)
        elif isinstance(sym, IntSymExpr) and sym.op == "-":
            return self.get_range(state, sym.rhs).negate().shift(sym.lhs)
        elif isinstance(sym, SymSymExpr) and sym.op in COMPARISONS:
            if sym.op in ("==", "!="):
                diff = self.mgr.sym_sym(sym.rhs, "-", sym.lhs)
                stored = state.constraints.get(diff)
                if stored is not None:
                    return self._truth_range(stored, relation_range(sym.op, 0, w))
            return self._bool_domain()
        return RangeSet.full(w)

    def _truth_range(self, inner: RangeSet, rel: RangeSet) -> RangeSet:
        hit = not inner.intersect(rel).is_empty()
        miss = not inner.intersect(rel.complement()).is_empty()
        if hit and miss:
            return self._bool_domain()
        return RangeSet.point(1 if hit else 0, self.width) if (hit or miss) else RangeSet.empty(self.width)

    def known_value(self, state: State, v: SVal) -> Optional[int]:
        if isinstance(v, ConcreteInt):
            return v.value
        if isinstance(v, NullLoc):
            return 0
        if isinstance(v, SymVal):
            return self.get_range(state, v.sym).single()
        return None

    # -- assume ----------------------------------------------------------------------

    def assume(self, state: State, cond: SVal, truth: bool) -> Optional[State]:
        """Constrain ``state`` so that ``cond`` is non-zero (or zero); None if infeasible."""
        if isinstance(cond, (UndefinedVal, UnknownVal)):
            return state
        if isinstance(cond, ConcreteInt):
            return state if (cond.value != 0) == truth else None
        if isinstance(cond, NullLoc):
            return None if truth else state
        if isinstance(cond, LocVal):
            return state if truth else None
        assert isinstance(cond, SymVal)
        sym = to_condition(cond, self.mgr)
        if not isinstance(sym, SymVal):
            return self.assume(state, sym, truth)
        want = RangeSet.point(0, self.width)
        if truth:
            want = want.complement()
        return self.constrain(state, sym.sym, want)

    def constrain(self, state: State, sym: Symbol, want: RangeSet) -> Optional[State]:
        """Restrict the value of ``sym`` to ``want``."""
        w = self.width
        if isinstance(sym, (SymIntExpr, SymSymExpr)) and sym.op in COMPARISONS:
            can_true = 1 in want
            can_false = 0 in want
            if not can_true and not can_false:
                return None
            if can_true and can_false:
                return state
            if isinstance(sym, SymIntExpr):
                rel = relation_range(sym.op, sym.rhs, w)
                return self.constrain(state, sym.lhs, rel if can_true else rel.complement())
            if sym.op in ("==", "!="):
                diff = self.mgr.sym_sym(sym.rhs, "-", sym.lhs)
                equal = (sym.op == "==") == can_true
                zero = RangeSet.point(0, w)
                return self.constrain(state, diff, zero if equal else zero.complement())
            # ordering between two symbols: only the comparison itself is recorded
            return self._store(state, sym, RangeSet.point(1 if can_true else 0, w))
        if isinstance(sym, SymIntExpr):
            if sym.op == "+":
                return self.constrain(state, sym.lhs, want.shift(-sym.rhs))
            if sym.op == "-":
                return self.constrain(state, sym.lhs, want.shift(sym.rhs))
            return self._unsupported(state)
        if isinstance(sym, IntSymExpr):
            if sym.op == "-":
                # c - s in W  <=>  s in c - W
                return self.constrain(state, sym.rhs, want.negate().shift(sym.lhs))
            return self._unsupported(state)
        if isinstance(sym, SymSymExpr) and sym.op not in ("+", "-"):
            return self._unsupported(state)
        return self._store(state, sym, want)

    def _store(self, state: State, sym: Symbol, want: RangeSet) -> Optional[State]:
        cur = self.get_range(state, sym)
        new = cur.intersect(want)
        if new.is_empty():
            return None
        if new == cur:
            return state
        return state.with_constraints(state.constraints.set(sym, new))

    def _unsupported(self, state: State) -> State:
        self.stats["unsupported_assumptions"] += 1
        return state

    def assume_both(self, state: State, cond: SVal) -> tuple[Optional[State], Optional[State]]:
        return self.assume(state, cond, True), self.assume(state, cond, False)

    def can_be_value(self, state: State, v: SVal, value: int) -> bool:
        if isinstance(v, (UndefinedVal, UnknownVal)):
            return True
        eq = eval_binop("==", v, ConcreteInt(value), self.mgr)
        return self.assume(state, eq, True) is not None


def rs_intersect(a: RangeSet, b: RangeSet) -> RangeSet:
    return a.intersect(b)


def rs_union(a: RangeSet, b: RangeSet) -> RangeSet:
    return a.union(b)


def rs_complement(a: RangeSet) -> RangeSet:
    return a.complement()
