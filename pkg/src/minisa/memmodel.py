"""Hierarchical memory regions.

Every region carries ``skey``, a tuple of primitives that identifies it
structurally. Equality, hashing and ordering all go through ``skey`` so
regions can be keys of persistent maps and compare deterministically across
runs. :class:`RegionManager` interns instances so equal regions are also
identical objects within one analysis.
"""
from __future__ import annotations

from typing import Any, Optional

from .frontend.ast import VOID, MiniCType, PointerType, VarDecl


class Keyed:
    """Identity, hashing and ordering by a structural sort key."""

    __slots__ = ("skey", "_hash")

    def _init_key(self, skey: tuple) -> None:
        self.skey = skey
        self._hash = hash(skey)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Keyed):
            return NotImplemented
        return self._hash == other._hash and self.skey == other.skey

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Keyed") -> bool:
        return self.skey < other.skey

    def __setattr__(self, name: str, value: Any) -> None:
        if hasattr(self, "_hash"):
            raise AttributeError(f"{type(self).__name__} is immutable")
        object.__setattr__(self, name, value)


class StackFrame(Keyed):
    """One activation: the callee USR and the call-site node id in the caller."""

    __slots__ = ("parent", "usr", "call_site", "fn", "depth")

    def __init__(self, parent: Optional["StackFrame"], usr: str, call_site: int, fn: Any = None):
        self.parent = parent
        self.usr = usr
        self.call_site = call_site
        self.fn = fn
        self.depth = parent.depth + 1 if parent else 0
        self._init_key((parent.skey if parent else ()) + ((usr, call_site),))

    def chain(self) -> list["StackFrame"]:
        out: list[StackFrame] = []
        f: Optional[StackFrame] = self
        while f is not None:
            out.append(f)
            f = f.parent
        return out

    def __repr__(self) -> str:
        return "Frame(" + " > ".join(u for u, _ in self.skey) + ")"


class MemRegion(Keyed):
    __slots__ = ("parent", "type")

    def is_space(self) -> bool:
        return isinstance(self, MemSpace)

    def space(self) -> "MemSpace":
        r: MemRegion = self
        while not isinstance(r, MemSpace):
            assert r.parent is not None
            r = r.parent
        return r

    def ancestors(self):
        """Self, then each parent up to (excluding) the memory space."""
        r: Optional[MemRegion] = self
        while r is not None and not isinstance(r, MemSpace):
            yield r
            r = r.parent

    def is_within(self, other: "MemRegion") -> bool:
        """True if ``other`` is this region or one of its ancestors."""
        r: Optional[MemRegion] = self
        while r is not None:
            if r == other:
                return True
            r = r.parent
        return False


class MemSpace(MemRegion):
    __slots__ = ()


class StackSpace(MemSpace):
    __slots__ = ("frame",)

    def __init__(self, frame: StackFrame):
        self.parent = None
        self.type = VOID
        self.frame = frame
        self._init_key((0, frame.skey))

    def __repr__(self) -> str:
        return f"Stack{self.frame!r}"


class GlobalSpace(MemSpace):
    __slots__ = ()

    def __init__(self) -> None:
        self.parent = None
        self.type = VOID
        self._init_key((1,))

    def __repr__(self) -> str:
        return "Globals"


class HeapSpace(MemSpace):
    __slots__ = ()

    def __init__(self) -> None:
        self.parent = None
        self.type = VOID
        self._init_key((2,))

    def __repr__(self) -> str:
        return "Heap"


class UnknownSpace(MemSpace):
    __slots__ = ()

    def __init__(self) -> None:
        self.parent = None
        self.type = VOID
        self._init_key((3,))

    def __repr__(self) -> str:
        return "Unknown"


GLOBALS = GlobalSpace()
HEAP = HeapSpace()
UNKNOWN_SPACE = UnknownSpace()


class VarRegion(MemRegion):
    """A variable; ``var_key`` is ``G:<name>`` for globals and the decl id otherwise."""

    __slots__ = ("var_key", "decl")

    def __init__(self, var_key: str, parent: MemSpace, decl: Optional[VarDecl] = None):
        self.parent = parent
        self.var_key = var_key
        self.decl = decl
        self.type = decl.type if decl is not None else VOID
        self._init_key((10, parent.skey, var_key))

    @property
    def name(self) -> str:
        return self.decl.name if self.decl is not None else self.var_key

    def __repr__(self) -> str:
        return f"Var({self.name})"


class FieldRegion(MemRegion):
    __slots__ = ("field",)

    def __init__(self, field: str, parent: MemRegion, ty: MiniCType):
        self.parent = parent
        self.field = field
        self.type = ty
        self._init_key((11, parent.skey, field))

    def __repr__(self) -> str:
        return f"{self.parent!r}.{self.field}"


class ElementRegion(MemRegion):
    __slots__ = ("index",)

    def __init__(self, index: Any, parent: MemRegion, ty: MiniCType):
        self.parent = parent
        self.index = index  # an SVal
        self.type = ty
        self._init_key((12, parent.skey, index.skey))

    def __repr__(self) -> str:
        return f"{self.parent!r}[{self.index!r}]"


class AllocRegion(MemRegion):
    """Heap object created by ``malloc``; identified by its conjured symbol."""

    __slots__ = ("symbol",)

    def __init__(self, symbol: Any):
        self.parent = HEAP
        self.symbol = symbol
        self.type = VOID
        self._init_key((13, symbol.skey))

    def __repr__(self) -> str:
        return f"Alloc({self.symbol!r})"


class SymRegion(MemRegion):
    """Memory pointed to by a symbolic pointer."""

    __slots__ = ("symbol",)

    def __init__(self, symbol: Any):
        self.parent = UNKNOWN_SPACE
        self.symbol = symbol
        ty = getattr(symbol, "type", None)
        self.type = ty.pointee if isinstance(ty, PointerType) else VOID
        self._init_key((14, symbol.skey))

    def __repr__(self) -> str:
        return f"SymRegion({self.symbol!r})"


def base_region(r: MemRegion) -> MemRegion:
    if isinstance(r, MemSpace):
        raise ValueError("a memory space has no base region")
    while not isinstance(r.parent, MemSpace):
        assert r.parent is not None
        r = r.parent
    return r


def is_scalar_region(r: MemRegion) -> bool:
    return not isinstance(r, AllocRegion) and r.type.is_scalar()


class RegionManager:
    """Interns regions for one analysis."""

    def __init__(self) -> None:
        self._table: dict[tuple, MemRegion] = {}
        self._frames: dict[tuple, StackFrame] = {}
        self.created = 0

    def _intern(self, r: MemRegion) -> MemRegion:
        got = self._table.get(r.skey)
        if got is None:
            self._table[r.skey] = r
            self.created += 1
            return r
        return got

    def frame(self, parent: Optional[StackFrame], usr: str, call_site: int, fn: Any = None) -> StackFrame:
        f = StackFrame(parent, usr, call_site, fn)
        return self._frames.setdefault(f.skey, f)

    def stack(self, frame: StackFrame) -> StackSpace:
        return self._intern(StackSpace(frame))  # type: ignore[return-value]

    def var(self, decl: VarDecl, frame: Optional[StackFrame]) -> VarRegion:
        if decl.storage == "global":
            r = VarRegion(f"G:{decl.name}", GLOBALS, decl)
        else:
            assert frame is not None
            r = VarRegion(str(decl.node_id), self.stack(frame), decl)
        return self._intern(r)  # type: ignore[return-value]

    def field(self, name: str, parent: MemRegion, ty: MiniCType) -> FieldRegion:
        return self._intern(FieldRegion(name, parent, ty))  # type: ignore[return-value]

    def element(self, index: Any, parent: MemRegion, ty: MiniCType) -> ElementRegion:
        return self._intern(ElementRegion(index, parent, ty))  # type: ignore[return-value]

    def alloc(self, symbol: Any) -> AllocRegion:
        return self._intern(AllocRegion(symbol))  # type: ignore[return-value]

    def symbolic(self, symbol: Any) -> SymRegion:
        return self._intern(SymRegion(symbol))  # type: ignore[return-value]

    def element_count(self) -> int:
        return sum(1 for r in self._table.values() if isinstance(r, ElementRegion))
