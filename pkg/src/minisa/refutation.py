"""Bit-precise re-checking of bug paths.

A report's path condition (branch assumptions plus the final ranges) is
re-decided by exhaustive enumeration at a reduced bit width. Reports whose
condition has no model are dropped. The same condition can be printed as an
SMT-LIB script for an external solver.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Union

import numpy as np

from .solver import RangeSet, bounds
from .symstate import (
    COMPARISONS, NEGATED, WIDTH, IntSymExpr, SymIntExpr, SymSymExpr, SymVal,
    Symbol,
)

SUPPORTED_OPS = frozenset({"+", "-", "*", "/", "%"}) | COMPARISONS

# Term: ("var", i) | ("const", c) | (op, Term, Term)
Term = tuple
# Constraint: ("cmp", op, Term, Term) | ("in", Term, ((lo|None, hi|None), ...))
Constraint = tuple


class UnsupportedFragment(Exception):
    pass


@dataclass
class PathCondition:
    constraints: list[Constraint] = field(default_factory=list)
    symbols: list[str] = field(default_factory=list)  # base symbol names, first-appearance order
    unsupported: bool = False

    def __len__(self) -> int:
        return len(self.constraints)


@dataclass(frozen=True)
class Verdict:
    kind: str  # infeasible | feasible | unknown
    model: Optional[dict] = None
    reason: str = ""

    @property
    def infeasible(self) -> bool:
        return self.kind == "infeasible"


# --------------------------------------------------------------------------
# Collection
# --------------------------------------------------------------------------


class _Builder:
    def __init__(self) -> None:
        self.index: dict[Symbol, int] = {}
        self.names: list[str] = []
        self.out: list[Constraint] = []
        self.unsupported = False

    def term(self, s: Symbol) -> Term:
        if isinstance(s, SymIntExpr):
            return self._op(s.op, self.term(s.lhs), ("const", s.rhs))
        if isinstance(s, IntSymExpr):
            return self._op(s.op, ("const", s.lhs), self.term(s.rhs))
        if isinstance(s, SymSymExpr):
            return self._op(s.op, self.term(s.lhs), self.term(s.rhs))
        if s not in self.index:
            self.index[s] = len(self.names)
            self.names.append(repr(s))
        return ("var", self.index[s])

    def _op(self, op: str, a: Term, b: Term) -> Term:
        if op not in SUPPORTED_OPS:
            self.unsupported = True
        return (op, a, b)

    def add(self, c: Constraint) -> None:
        if c not in self.out:
            self.out.append(c)

    def assume(self, cond: Any, truth: bool) -> None:
        if not isinstance(cond, SymVal):
            return
        s = cond.sym
        if isinstance(s, (SymIntExpr, SymSymExpr, IntSymExpr)) and s.op in COMPARISONS:
            t = self.term(s)
            op = s.op if truth else NEGATED[s.op]
            self.add(("cmp", op, t[1], t[2]))
        else:
            self.add(("cmp", "!=" if truth else "==", self.term(s), ("const", 0)))

    def in_ranges(self, s: Symbol, rs: RangeSet) -> None:
        if rs.is_full():
            return
        lo_b, hi_b = bounds(rs.width)
        ivs = tuple((None if lo == lo_b else lo, None if hi == hi_b else hi) for lo, hi in rs.intervals)
        self.add(("in", self.term(s), ivs))


def collect_path_conditions(report: Any, graph: Any = None) -> PathCondition:
    """Assumptions on the report's path (in order) plus its end-node ranges."""
    data = report.path_condition if not isinstance(report, dict) else report
    b = _Builder()
    if data:
        for cond, truth in data["assumptions"]:
            b.assume(cond, truth)
        for sym, rs in data["ranges"]:
            b.in_ranges(sym, rs)
    return PathCondition(b.out, b.names, b.unsupported)


def _vars(t: Term, out: set[int]) -> set[int]:
    if t[0] == "var":
        out.add(t[1])
    elif t[0] != "const":
        _vars(t[1], out)
        _vars(t[2], out)
    return out


def constraint_vars(c: Constraint) -> set[int]:
    out: set[int] = set()
    if c[0] == "cmp":
        _vars(c[2], out)
        _vars(c[3], out)
    else:
        _vars(c[1], out)
    return out


def _consts(c: Constraint) -> list[int]:
    out: list[int] = []

    def walk(t: Term) -> None:
        if t[0] == "const":
            out.append(t[1])
        elif t[0] != "var":
            walk(t[1])
            walk(t[2])

    if c[0] == "cmp":
        walk(c[2])
        walk(c[3])
    else:
        walk(c[1])
        for lo, hi in c[2]:
            out.extend(v for v in (lo, hi) if v is not None)
    return out


def _ops(t: Term, out: set[str]) -> set[str]:
    if t[0] not in ("var", "const"):
        out.add(t[0])
        _ops(t[1], out)
        _ops(t[2], out)
    return out


# --------------------------------------------------------------------------
# Exact enumeration
# --------------------------------------------------------------------------


def _wrap(a: np.ndarray, width: int) -> np.ndarray:
    half = 1 << (width - 1)
    return ((a + half) & ((1 << width) - 1)) - half


def _eval(t: Term, axes: dict[int, np.ndarray], width: int) -> tuple[np.ndarray, Union[np.ndarray, bool]]:
    """Value of ``t`` and a mask of assignments where it is defined."""
    kind = t[0]
    if kind == "var":
        return axes[t[1]], True
    if kind == "const":
        return np.int64(t[1]), True
    a, va = _eval(t[1], axes, width)
    b, vb = _eval(t[2], axes, width)
    valid = va & vb if not (va is True and vb is True) else True
    op = kind
    if op == "+":
        return _wrap(a + b, width), valid
    if op == "-":
        return _wrap(a - b, width), valid
    if op == "*":
        return _wrap(a * b, width), valid
    if op in ("/", "%"):
        nz = b != 0
        safe = np.where(nz, b, 1)
        q = np.abs(a) // np.abs(safe)
        q = np.where((a < 0) != (safe < 0), -q, q)
        r = q if op == "/" else a - safe * q
        return _wrap(r, width), (nz if valid is True else valid & nz)
    if op in COMPARISONS:
        return _compare(op, a, b).astype(np.int64), valid
    raise UnsupportedFragment(op)


def _compare(op: str, a, b):
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _holds(c: Constraint, axes: dict[int, np.ndarray], width: int):
    if c[0] == "cmp":
        a, va = _eval(c[2], axes, width)
        b, vb = _eval(c[3], axes, width)
        ok = _compare(c[1], a, b)
        valid = va & vb if not (va is True and vb is True) else True
    else:
        v, valid = _eval(c[1], axes, width)
        ok = np.zeros(np.shape(v), dtype=bool)
        for lo, hi in c[2]:
            part = np.ones(np.shape(v), dtype=bool)
            if lo is not None:
                part &= v >= lo
            if hi is not None:
                part &= v <= hi
            ok = ok | part
    return ok if valid is True else ok & valid


def _components(constraints: list[Constraint], nvars: int) -> list[tuple[list[int], list[Constraint]]]:
    parent = list(range(nvars))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    cvars = [sorted(constraint_vars(c)) for c in constraints]
    for vs in cvars:
        for v in vs[1:]:
            parent[find(v)] = find(vs[0])
    groups: dict[int, tuple[list[int], list[Constraint]]] = {}
    for v in range(nvars):
        groups.setdefault(find(v), ([], []))[0].append(v)
    for c, vs in zip(constraints, cvars):
        if vs:
            groups[find(vs[0])][1].append(c)
    return [groups[k] for k in sorted(groups)]


def _solve_component(vars_: list[int], cons: list[Constraint], width: int,
                     chunk_elems: int) -> Optional[dict[int, int]]:
    """Lexicographically first model (signed ascending) of one component."""
    lo, hi = bounds(width)
    values = np.arange(lo, hi + 1, dtype=np.int64)
    k = len(vars_)
    rest = (1 << width) ** (k - 1)
    step = max(1, chunk_elems // max(rest, 1))
    for start in range(0, len(values), step):
        axes: dict[int, np.ndarray] = {}
        for pos, v in enumerate(vars_):
            shape = [1] * k
            vals = values[start:start + step] if pos == 0 else values
            shape[pos] = len(vals)
            axes[v] = vals.reshape(shape)
        full_shape = tuple(len(values[start:start + step]) if p == 0 else len(values) for p in range(k))
        ok = np.ones(full_shape, dtype=bool)
        for c in cons:
            ok &= _holds(c, axes, width)
            if not ok.any():
                break
        if ok.any():
            idx = np.unravel_index(int(np.argmax(ok)), full_shape)
            return {v: int(values[start + idx[0]] if p == 0 else values[idx[p]]) for p, v in enumerate(vars_)}
    return None


def refute_exact(pc: PathCondition, width: int = 8, max_symbols: int = 3,
                 max_assignments: int = 1 << 26, chunk_elems: int = 1 << 20) -> Verdict:
    """Decide ``pc`` exactly at ``width`` bits.

    Unknown when there are too many symbols, a constant does not fit the
    width, an operator is unsupported, or a component would need more than
    ``max_assignments`` assignments.
    """
    if width not in (4, 8, 16):
        raise ValueError("width must be 4, 8 or 16")
    if pc.unsupported:
        return Verdict("unknown", reason="unsupported operator")
    if len(pc.symbols) > max_symbols:
        return Verdict("unknown", reason="too many symbols")
    lo, hi = bounds(width)
    for c in pc.constraints:
        ops = _ops(c[2], set()) | _ops(c[3], set()) if c[0] == "cmp" else _ops(c[1], set())
        if c[0] == "cmp" and c[1] not in COMPARISONS or not ops <= SUPPORTED_OPS:
            return Verdict("unknown", reason="unsupported operator")
        if any(not lo <= v <= hi for v in _consts(c)):
            return Verdict("unknown", reason="constant not representable")
    for c in pc.constraints:
        if not constraint_vars(c) and not bool(np.all(_holds(c, {}, width))):
            return Verdict("infeasible")
    comps = _components(pc.constraints, len(pc.symbols))
    for vars_, _cons in comps:
        if (1 << width) ** len(vars_) > max_assignments:
            return Verdict("unknown", reason="enumeration budget")
    model: dict[int, int] = {}
    for vars_, cons in comps:
        if not cons:
            model.update({v: lo for v in vars_})
            continue
        got = _solve_component(vars_, cons, width, chunk_elems)
        if got is None:
            return Verdict("infeasible")
        model.update(got)
    return Verdict("feasible", {pc.symbols[i]: model[i] for i in range(len(pc.symbols))})


# --------------------------------------------------------------------------
# SMT-LIB
# --------------------------------------------------------------------------

_SMT_OPS = {"+": "bvadd", "-": "bvsub", "*": "bvmul", "/": "bvsdiv", "%": "bvsrem"}
_SMT_CMP = {"==": "=", "!=": "distinct", "<": "bvslt", "<=": "bvsle", ">": "bvsgt", ">=": "bvsge"}


def _hex(v: int, width: int) -> str:
    return "#x" + format(v & ((1 << width) - 1), f"0{width // 4}x")


def emit_smtlib(pc: PathCondition, width: int = WIDTH) -> str:
    """SMT-LIB v2 script over fixed-width bit-vectors for ``pc``."""
    if pc.unsupported:
        raise UnsupportedFragment("unsupported operator in path condition")
    lo, hi = bounds(width)
    names: dict[int, str] = {}
    asserts: list[str] = []

    def name(i: int) -> str:
        if i not in names:
            names[i] = f"s{len(names)}"
        return names[i]

    def const(v: int) -> str:
        if not lo <= v <= hi:
            raise UnsupportedFragment(f"constant {v} does not fit in {width} bits")
        return _hex(v, width)

    def term(t: Term) -> str:
        if t[0] == "var":
            return name(t[1])
        if t[0] == "const":
            return const(t[1])
        op, a, b = t
        if op in COMPARISONS:
            return f"(ite ({_SMT_CMP[op]} {term(a)} {term(b)}) {_hex(1, width)} {_hex(0, width)})"
        if op not in _SMT_OPS:
            raise UnsupportedFragment(op)
        la, lb = term(a), term(b)
        if op in ("/", "%"):
            guard = f"(assert (distinct {lb} {_hex(0, width)}))"
            if guard not in asserts:
                asserts.append(guard)
        return f"({_SMT_OPS[op]} {la} {lb})"

    for c in pc.constraints:
        if c[0] == "cmp":
            a, b = term(c[2]), term(c[3])
            line = f"(assert ({_SMT_CMP[c[1]]} {a} {b}))"
        else:
            v = term(c[1])
            parts = []
            for l, h in c[2]:
                if l is not None and l == h:
                    parts.append(f"(= {v} {const(l)})")
                    continue
                bits = []
                if l is not None:
                    bits.append(f"(bvsge {v} {const(l)})")
                if h is not None:
                    bits.append(f"(bvsle {v} {const(h)})")
                parts.append(bits[0] if len(bits) == 1 else f"(and {' '.join(bits)})" if bits else "true")
            if not parts:
                parts = ["false"]
            line = f"(assert {parts[0]})" if len(parts) == 1 else f"(assert (or {' '.join(parts)}))"
        if line not in asserts:
            asserts.append(line)
    decls = [f"(declare-const {n} (_ BitVec {width}))" for _i, n in sorted(names.items(), key=lambda kv: int(kv[1][1:]))]
    return "\n".join(decls + asserts + ["(check-sat)", "(get-model)"]) + "\n"


# --------------------------------------------------------------------------
# Report filtering
# --------------------------------------------------------------------------


@dataclass
class RefuteOptions:
    width: int = 8
    max_symbols: int = 3
    emit_dir: Optional[str] = None


def refute_reports(reports: Iterable[Any], graph: Any = None, opts: Optional[RefuteOptions] = None,
                   stats: Optional[dict] = None) -> list:
    """Drop unsuppressed reports whose path condition is infeasible."""
    opts = opts or RefuteOptions()
    kept = []
    for r in reports:
        if r.suppressed or r.path_condition is None:
            kept.append(r)
            continue
        verdict = refute_exact(collect_path_conditions(r, graph), opts.width, opts.max_symbols)
        if verdict.infeasible:
            if stats is not None:
                stats["refuted_reports"] = stats.get("refuted_reports", 0) + 1
            continue
        kept.append(r)
    return kept
