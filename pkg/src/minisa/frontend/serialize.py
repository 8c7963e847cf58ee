"""Binary on-disk form of a translation unit.

Layout: ``MCA1`` magic, u32 payload length, u32 crc32 of the payload, then a
zlib-compressed canonical JSON encoding of the tree.
"""
from __future__ import annotations

import dataclasses
import json
import struct
import zlib
from typing import Any

from . import ast as A

MAGIC = b"MCA1"
_HEADER = struct.Struct("<4sII")

_NODE_CLASSES = {
    cls.__name__: cls
    for cls in (
        A.IntLiteral, A.DeclRef, A.Unary, A.Binary, A.Call, A.Member, A.Index,
        A.Compound, A.If, A.While, A.Return, A.DeclStmt, A.ExprStmt,
        A.VarDecl, A.FieldDecl, A.RecordDecl, A.FunctionDecl,
    )
}


class DeserializeError(Exception):
    pass


def _enc_type(ty: A.MiniCType) -> Any:
    if isinstance(ty, A.IntType):
        return "i"
    if isinstance(ty, A.VoidType):
        return "v"
    if isinstance(ty, A.PointerType):
        return ["p", _enc_type(ty.pointee)]
    if isinstance(ty, A.RecordType):
        return ["r", ty.name]
    if isinstance(ty, A.ArrayType):
        return ["a", ty.length, _enc_type(ty.element)]
    raise TypeError(ty)


def _dec_type(v: Any) -> A.MiniCType:
    if v == "i":
        return A.INT
    if v == "v":
        return A.VOID
    tag = v[0]
    if tag == "p":
        return A.PointerType(_dec_type(v[1]))
    if tag == "r":
        return A.RecordType(v[1])
    if tag == "a":
        return A.ArrayType(_dec_type(v[2]), v[1])
    raise DeserializeError(f"bad type tag {tag!r}")


def _enc(v: Any) -> Any:
    if isinstance(v, A.Node):
        out = {"$": type(v).__name__}
        for f in dataclasses.fields(v):
            if f.name == "decl":
                continue
            out[f.name] = _enc(getattr(v, f.name))
        return out
    if isinstance(v, A.SourceLoc):
        return [v.file, v.line, v.col]
    if isinstance(v, A.MiniCType):
        return {"t": _enc_type(v)}
    if isinstance(v, list):
        return [_enc(x) for x in v]
    return v


def _dec(v: Any, fields_hint: str = "") -> Any:
    if isinstance(v, dict):
        if "t" in v and len(v) == 1:
            return _dec_type(v["t"])
        cls = _NODE_CLASSES.get(v.get("$", ""))
        if cls is None:
            raise DeserializeError(f"unknown node kind {v.get('$')!r}")
        kwargs = {}
        for k, x in v.items():
            if k == "$":
                continue
            kwargs[k] = A.SourceLoc(*x) if k == "loc" else _dec(x)
        return cls(**kwargs)
    if isinstance(v, list):
        return [_dec(x) for x in v]
    return v


def link_decl_refs(ast: A.Ast) -> None:
    """Point every DeclRef at its VarDecl object via ``decl_id``."""
    by_id: dict[int, A.VarDecl] = {}
    for d in ast.decls:
        for n in A.walk(d):
            if isinstance(n, A.VarDecl):
                by_id[n.node_id] = n
    for d in ast.decls:
        for n in A.walk(d):
            if isinstance(n, A.DeclRef):
                n.decl = by_id.get(n.decl_id)


def serialize_ast(ast: A.Ast) -> bytes:
    doc = {"file": ast.file, "next_id": ast.next_id, "decls": _enc(ast.decls)}
    payload = zlib.compress(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8"), 6
    )
    return _HEADER.pack(MAGIC, len(payload), zlib.crc32(payload)) + payload


def deserialize_ast(data: bytes) -> A.Ast:
    if len(data) < _HEADER.size:
        raise DeserializeError("truncated header")
    magic, length, crc = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DeserializeError(f"unsupported format version {magic!r}")
    payload = data[_HEADER.size:]
    if len(payload) != length:
        raise DeserializeError(f"truncated payload: expected {length} bytes, found {len(payload)}")
    if zlib.crc32(payload) != crc:
        raise DeserializeError("checksum mismatch")
    try:
        doc = json.loads(zlib.decompress(payload).decode("utf-8"))
        ast = A.Ast(file=doc["file"], decls=_dec(doc["decls"]), next_id=doc["next_id"])
    except DeserializeError:
        raise
    except (ValueError, KeyError, TypeError, zlib.error) as exc:
        raise DeserializeError(f"corrupt payload: {exc}") from exc
    link_decl_refs(ast)
    return ast
