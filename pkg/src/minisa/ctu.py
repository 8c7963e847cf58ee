"""Cross-translation-unit analysis support.

Pass 1 serializes every translation unit into ``<dir>/asts`` and writes a
sorted USR index. Pass 2 loads external definitions lazily: each ``.ast``
file is deserialized at most once and each USR is imported at most once per
:class:`CtuLoader`.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .frontend.ast import Ast, FunctionDecl, RecordDecl
from .frontend.serialize import DeserializeError, _enc, deserialize_ast, serialize_ast
from .frontend.usr import compute_usr

INDEX_FILE = "index.txt"
RECORDS_FILE = "records.txt"
AST_DIR = "asts"


class CtuError(Exception):
    pass


class IndexConflict(CtuError):
    def __init__(self, usr: str, file_a: str, file_b: str):
        super().__init__(f"conflicting definitions of {usr} in {file_a} and {file_b}")
        self.usr, self.file_a, self.file_b = usr, file_a, file_b


class OdrViolation(CtuError):
    def __init__(self, usr: str, file_a: str = "", file_b: str = ""):
        super().__init__(f"one definition rule violation for {usr} ({file_a} vs {file_b})")
        self.usr, self.file_a, self.file_b = usr, file_a, file_b


class LoadError(CtuError):
    pass


def record_fingerprint(rec: RecordDecl) -> str:
    return ";".join(f"{f.name}:{f.type}" for f in rec.fields)


def _strip(v):
    if isinstance(v, dict):
        return {k: _strip(x) for k, x in v.items() if k not in ("loc", "node_id", "decl_id")}
    if isinstance(v, list):
        return [_strip(x) for x in v]
    return v


def definition_digest(fn: FunctionDecl) -> str:
    """Digest of a definition's structure, independent of locations and node ids."""
    doc = json.dumps(_strip(_enc(fn)), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(doc.encode()).hexdigest()


@dataclass
class CtuDir:
    root: Path
    index: dict[str, str]  # usr -> path relative to root

    @classmethod
    def open(cls, root: os.PathLike) -> "CtuDir":
        root = Path(root)
        index: dict[str, str] = {}
        with open(root / INDEX_FILE, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line:
                    usr, _, rel = line.partition(" ")
                    index[usr] = rel
        return cls(root, index)


def _ast_names(asts: list[Ast]) -> list[str]:
    """Unique ``<stem>.ast`` names; clashing stems get a numeric suffix."""
    names: list[str] = []
    used: set[str] = set()
    for a in asts:
        stem = Path(a.file).stem or "tu"
        name, k = f"{stem}.ast", 1
        while name in used:
            name, k = f"{stem}_{k}.ast", k + 1
        used.add(name)
        names.append(name)
    return names


def ctu_pass1(asts: Iterable[Ast], out_dir: os.PathLike) -> CtuDir:
    """Serialize each TU and build the definition index and record fingerprints."""
    root = Path(out_dir)
    (root / AST_DIR).mkdir(parents=True, exist_ok=True)
    ordered = sorted(asts, key=lambda a: a.file)
    index: dict[str, str] = {}
    digests: dict[str, str] = {}
    records: dict[str, tuple[str, str]] = {}
    for ast, name in zip(ordered, _ast_names(ordered)):
        rel = f"{AST_DIR}/{name}"
        for rec in ast.records():
            usr, fp = compute_usr(rec), record_fingerprint(rec)
            prev = records.get(usr)
            if prev is not None and prev[0] != fp:
                raise OdrViolation(usr, prev[1], ast.file)
            records.setdefault(usr, (fp, ast.file))
        for fn in ast.definitions():
            usr, dg = compute_usr(fn), definition_digest(fn)
            if usr in index:
                if digests[usr] != dg:
                    raise IndexConflict(usr, index[usr], rel)
                continue
            index[usr], digests[usr] = rel, dg
        (root / rel).write_bytes(serialize_ast(ast))
    with open(root / INDEX_FILE, "w", encoding="utf-8", newline="\n") as fh:
        for usr in sorted(index):
            fh.write(f"{usr} {index[usr]}\n")
    with open(root / RECORDS_FILE, "w", encoding="utf-8", newline="\n") as fh:
        for usr in sorted(records):
            fh.write(f"{usr} {records[usr][0]}\n")
    return CtuDir(root, index)


class CtuLoader:
    """On-demand import of external definitions with two cache levels."""

    def __init__(self, ctu_dir: CtuDir, exclude_file: Optional[str] = None):
        self.dir = ctu_dir
        self.exclude_file = exclude_file
        self.ast_cache: dict[str, Optional[Ast]] = {}
        self.fn_cache: dict[str, Optional[FunctionDecl]] = {}
        self.owner: dict[int, Ast] = {}
        self.loads = 0
        self.load_errors = 0

    def _ast(self, rel: str) -> Optional[Ast]:
        if rel not in self.ast_cache:
            try:
                data = (self.dir.root / rel).read_bytes()
                ast = deserialize_ast(data)
                self.loads += 1
            except (OSError, DeserializeError):
                self.load_errors += 1
                ast = None
            self.ast_cache[rel] = ast
        return self.ast_cache[rel]

    def load(self, usr: str) -> Optional[FunctionDecl]:
        """Definition for ``usr`` from another TU, or None when unavailable."""
        if usr in self.fn_cache:
            return self.fn_cache[usr]
        fn = None
        rel = self.dir.index.get(usr)
        if rel is not None:
            ast = self._ast(rel)
            if ast is not None and ast.file != self.exclude_file:
                for d in ast.definitions():
                    if compute_usr(d) == usr:
                        fn = d
                        self.owner[id(d)] = ast
                        break
        self.fn_cache[usr] = fn
        return fn

    def ast_of(self, fn: FunctionDecl) -> Optional[Ast]:
        return self.owner.get(id(fn))


def ctu_top_level_policy(usr: str, inlined_same_tu: set[str]) -> bool:
    """Analyze ``usr`` as top-level unless it was inlined from its own TU."""
    return usr not in inlined_same_tu
