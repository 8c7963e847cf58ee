"""Unified symbol identifiers for functions and records."""
from __future__ import annotations

from typing import Union

from .ast import ArrayType, FunctionDecl, IntType, MiniCType, PointerType, RecordDecl, RecordType, VoidType


def mangle_type(ty: MiniCType) -> str:
    if isinstance(ty, IntType):
        return "i"
    if isinstance(ty, PointerType):
        return "p" + mangle_type(ty.pointee)
    if isinstance(ty, RecordType):
        return f"r{ty.name}#"
    if isinstance(ty, ArrayType):
        return f"a{ty.length}{mangle_type(ty.element)}"
    if isinstance(ty, VoidType):
        return "v"
    raise TypeError(f"cannot mangle {ty!r}")


def compute_usr(decl: Union[FunctionDecl, RecordDecl]) -> str:
    if isinstance(decl, FunctionDecl):
        return f"F:{decl.name}#" + "".join(mangle_type(p.type) for p in decl.params)
    if isinstance(decl, RecordDecl):
        return f"R:{decl.name}"
    raise TypeError(f"no USR for {type(decl).__name__}")
