"""Persistent (immutable) ordered map backed by an AVL tree.

Updates copy only the root-to-leaf path, so successive versions share all
untouched subtrees. Keys must be totally ordered.
"""
from __future__ import annotations

from typing import Any, Callable, Generic, Iterator, Optional, TypeVar

K = TypeVar("K")
V = TypeVar("V")


class _Node:
    __slots__ = ("key", "val", "left", "right", "height", "size")

    allocated = 0  # total nodes ever created; read by structural-sharing tests

    def __init__(self, key, val, left: Optional[_Node], right: Optional[_Node]):
        _Node.allocated += 1
        self.key = key
        self.val = val
        self.left = left
        self.right = right
        lh = left.height if left else 0
        rh = right.height if right else 0
        self.height = (lh if lh > rh else rh) + 1
        self.size = (left.size if left else 0) + (right.size if right else 0) + 1


def _h(n: Optional[_Node]) -> int:
    return n.height if n else 0


def _balance(key, val, left: Optional[_Node], right: Optional[_Node]) -> _Node:
    lh, rh = _h(left), _h(right)
    if lh > rh + 1:
        assert left is not None
        if _h(left.left) >= _h(left.right):
            return _Node(left.key, left.val, left.left, _Node(key, val, left.right, right))
        lr = left.right
        assert lr is not None
        return _Node(lr.key, lr.val, _Node(left.key, left.val, left.left, lr.left), _Node(key, val, lr.right, right))
    if rh > lh + 1:
        assert right is not None
        if _h(right.right) >= _h(right.left):
            return _Node(right.key, right.val, _Node(key, val, left, right.left), right.right)
        rl = right.left
        assert rl is not None
        return _Node(rl.key, rl.val, _Node(key, val, left, rl.left), _Node(right.key, right.val, rl.right, right.right))
    return _Node(key, val, left, right)


def _insert(n: Optional[_Node], key, val) -> _Node:
    if n is None:
        return _Node(key, val, None, None)
    if key < n.key:
        return _balance(n.key, n.val, _insert(n.left, key, val), n.right)
    if n.key < key:
        return _balance(n.key, n.val, n.left, _insert(n.right, key, val))
    if n.val is val or n.val == val:
        return n
    return _Node(key, val, n.left, n.right)


def _pop_min(n: _Node) -> tuple[_Node, Optional[_Node]]:
    if n.left is None:
        return n, n.right
    m, rest = _pop_min(n.left)
    return m, _balance(n.key, n.val, rest, n.right)


def _delete(n: Optional[_Node], key) -> Optional[_Node]:
    if n is None:
        return None
    if key < n.key:
        left = _delete(n.left, key)
        return n if left is n.left else _balance(n.key, n.val, left, n.right)
    if n.key < key:
        right = _delete(n.right, key)
        return n if right is n.right else _balance(n.key, n.val, n.left, right)
    if n.left is None:
        return n.right
    if n.right is None:
        return n.left
    m, rest = _pop_min(n.right)
    return _balance(m.key, m.val, n.left, rest)


def _iter(n: Optional[_Node]) -> Iterator[_Node]:
    stack: list[_Node] = []
    while stack or n is not None:
        while n is not None:
            stack.append(n)
            n = n.left
        n = stack.pop()
        yield n
        n = n.right


class PMap(Generic[K, V]):
    """Immutable sorted map; ``set``/``remove`` return new maps."""

    __slots__ = ("_root", "_hash")

    def __init__(self, _root: Optional[_Node] = None):
        self._root = _root
        self._hash: Optional[int] = None

    @classmethod
    def from_items(cls, items) -> "PMap":
        m = cls()
        for k, v in items:
            m = m.set(k, v)
        return m

    def get(self, key: K, default: Any = None) -> Any:
        n = self._root
        while n is not None:
            if key < n.key:
                n = n.left
            elif n.key < key:
                n = n.right
            else:
                return n.val
        return default

    def __contains__(self, key: K) -> bool:
        sentinel = object()
        return self.get(key, sentinel) is not sentinel

    def __getitem__(self, key: K) -> V:
        sentinel = object()
        v = self.get(key, sentinel)
        if v is sentinel:
            raise KeyError(key)
        return v

    def set(self, key: K, val: V) -> "PMap[K, V]":
        root = _insert(self._root, key, val)
        return self if root is self._root else PMap(root)

    def remove(self, key: K) -> "PMap[K, V]":
        root = _delete(self._root, key)
        return self if root is self._root else PMap(root)

    def remove_if(self, pred: Callable[[K, V], bool]) -> "PMap[K, V]":
        out = self
        for k, v in self.items():
            if pred(k, v):
                out = out.remove(k)
        return out

    def items(self) -> Iterator[tuple[K, V]]:
        return ((n.key, n.val) for n in _iter(self._root))

    def keys(self) -> Iterator[K]:
        return (n.key for n in _iter(self._root))

    def values(self) -> Iterator[V]:
        return (n.val for n in _iter(self._root))

    def __iter__(self) -> Iterator[K]:
        return self.keys()

    def __len__(self) -> int:
        return self._root.size if self._root else 0

    def __bool__(self) -> bool:
        return self._root is not None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PMap):
            return NotImplemented
        if self._root is other._root:
            return True
        if len(self) != len(other) or hash(self) != hash(other):
            return False
        return all(a == b for a, b in zip(self.items(), other.items()))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self.items()))
        return self._hash

    def __repr__(self) -> str:
        return "PMap({" + ", ".join(f"{k!r}: {v!r}" for k, v in self.items()) + "})"

    def node_count(self) -> int:
        return len(self)


def reachable_nodes(maps) -> int:
    """Distinct tree nodes reachable from any of ``maps`` (shared ones count once)."""
    seen: set[int] = set()
    for m in maps:
        stack = [m._root] if m._root is not None else []
        while stack:
            n = stack.pop()
            if id(n) in seen:
                continue
            seen.add(id(n))
            if n.left is not None:
                stack.append(n.left)
            if n.right is not None:
                stack.append(n.right)
    return len(seen)


def nodes_allocated() -> int:
    return _Node.allocated
