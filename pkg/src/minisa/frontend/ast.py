"""MiniC syntax tree and object-language types.

Every node carries a per-translation-unit ``node_id`` and a source location.
Expressions additionally carry their computed :class:`MiniCType`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True, order=True)
class SourceLoc:
    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------


class MiniCType:
    """Base class for object-language types."""

    def is_scalar(self) -> bool:
        return isinstance(self, (IntType, PointerType))


@dataclass(frozen=True)
class IntType(MiniCType):
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class VoidType(MiniCType):
    def __str__(self) -> str:
        return "void"


@dataclass(frozen=True)
class PointerType(MiniCType):
    pointee: MiniCType

    def __str__(self) -> str:
        return f"{self.pointee} *"


@dataclass(frozen=True)
class RecordType(MiniCType):
    name: str

    def __str__(self) -> str:
        return f"struct {self.name}"


@dataclass(frozen=True)
class ArrayType(MiniCType):
    element: MiniCType
    length: int

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError("array length must be positive")

    def __str__(self) -> str:
        return f"{self.element}[{self.length}]"


INT = IntType()
VOID = VoidType()
VOID_PTR = PointerType(VOID)


# --------------------------------------------------------------------------
# Nodes
# --------------------------------------------------------------------------


@dataclass(kw_only=True)
class Node:
    node_id: int
    loc: SourceLoc


@dataclass(kw_only=True)
class Expr(Node):
    type: MiniCType = INT


@dataclass(kw_only=True)
class IntLiteral(Expr):
    value: int


@dataclass(kw_only=True)
class DeclRef(Expr):
    name: str
    decl_id: int
    # resolved on parse / deserialization; excluded from structural equality
    decl: Optional["VarDecl"] = field(default=None, compare=False, repr=False)


@dataclass(kw_only=True)
class Unary(Expr):
    op: str  # one of - ! * &
    operand: Expr


@dataclass(kw_only=True)
class Binary(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass(kw_only=True)
class Call(Expr):
    callee: str
    args: list[Expr]


@dataclass(kw_only=True)
class Member(Expr):
    base: Expr
    field_name: str
    arrow: bool


@dataclass(kw_only=True)
class Index(Expr):
    base: Expr
    index: Expr


@dataclass(kw_only=True)
class Stmt(Node):
    pass


@dataclass(kw_only=True)
class Compound(Stmt):
    stmts: list[Stmt]


@dataclass(kw_only=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    else_: Optional[Stmt] = None


@dataclass(kw_only=True)
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass(kw_only=True)
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass(kw_only=True)
class DeclStmt(Stmt):
    decls: list["VarDecl"]


@dataclass(kw_only=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(kw_only=True)
class Decl(Node):
    name: str


@dataclass(kw_only=True)
class VarDecl(Decl):
    type: MiniCType
    init: Optional[Expr] = None
    storage: str = "local"  # global | local | param


@dataclass(kw_only=True)
class FieldDecl(Decl):
    type: MiniCType


@dataclass(kw_only=True)
class RecordDecl(Decl):
    fields: list[FieldDecl]

    def field(self, name: str) -> Optional[FieldDecl]:
        for f in self.fields:
            if f.name == name:
                return f
        return None


@dataclass(kw_only=True)
class FunctionDecl(Decl):
    params: list[VarDecl]
    return_type: MiniCType
    body: Optional[Compound] = None

    @property
    def is_definition(self) -> bool:
        return self.body is not None


TopLevelDecl = Union[FunctionDecl, VarDecl, RecordDecl]


@dataclass(kw_only=True)
class Ast:
    file: str
    decls: list[TopLevelDecl]
    next_id: int = field(default=0, compare=False)

    def functions(self) -> Iterator[FunctionDecl]:
        return (d for d in self.decls if isinstance(d, FunctionDecl))

    def definitions(self) -> Iterator[FunctionDecl]:
        return (d for d in self.decls if isinstance(d, FunctionDecl) and d.body is not None)

    def records(self) -> Iterator[RecordDecl]:
        return (d for d in self.decls if isinstance(d, RecordDecl))

    def globals(self) -> Iterator[VarDecl]:
        return (d for d in self.decls if isinstance(d, VarDecl))


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal over a node and all nodes below it."""
    stack: list[Node] = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def children(n: Node) -> Iterator[Node]:
    if isinstance(n, Unary):
        yield n.operand
    elif isinstance(n, Binary):
        yield n.lhs
        yield n.rhs
    elif isinstance(n, Call):
        yield from n.args
    elif isinstance(n, Member):
        yield n.base
    elif isinstance(n, Index):
        yield n.base
        yield n.index
    elif isinstance(n, Compound):
        yield from n.stmts
    elif isinstance(n, If):
        yield n.cond
        yield n.then
        if n.else_ is not None:
            yield n.else_
    elif isinstance(n, While):
        yield n.cond
        yield n.body
    elif isinstance(n, Return):
        if n.value is not None:
            yield n.value
    elif isinstance(n, DeclStmt):
        yield from n.decls
    elif isinstance(n, ExprStmt):
        yield n.expr
    elif isinstance(n, VarDecl):
        if n.init is not None:
            yield n.init
    elif isinstance(n, FunctionDecl):
        yield from n.params
        if n.body is not None:
            yield n.body
    elif isinstance(n, RecordDecl):
        yield from n.fields


PRECEDENCE = {
    "=": 1, "||": 2, "&&": 3, "==": 4, "!=": 4,
    "<": 5, "<=": 5, ">": 5, ">=": 5, "+": 6, "-": 6, "*": 7, "/": 7, "%": 7,
}


def expr_to_str(e: Expr, parent_prec: int = 0) -> str:
    """Render an expression back to compact C-like source text."""
    if isinstance(e, IntLiteral):
        return str(e.value)
    if isinstance(e, DeclRef):
        return e.name
    if isinstance(e, Unary):
        return f"{e.op}{expr_to_str(e.operand, 8)}"
    if isinstance(e, Binary):
        prec = PRECEDENCE[e.op]
        right_prec = prec if e.op == "=" else prec + 1
        text = f"{expr_to_str(e.lhs, prec)} {e.op} {expr_to_str(e.rhs, right_prec)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(e, Call):
        return f"{e.callee}({', '.join(expr_to_str(a) for a in e.args)})"
    if isinstance(e, Member):
        return f"{expr_to_str(e.base, 9)}{'->' if e.arrow else '.'}{e.field_name}"
    if isinstance(e, Index):
        return f"{expr_to_str(e.base, 9)}[{expr_to_str(e.index)}]"
    raise TypeError(f"not an expression: {e!r}")
