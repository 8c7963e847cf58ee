"""Recursive-descent parser and type checker for MiniC.

Parsing and type annotation happen in one pass: C requires declaration
before use, so every identifier can be resolved the moment it is read.
"""
from __future__ import annotations

from typing import Optional

from .ast import (
    INT, VOID, VOID_PTR, ArrayType, Ast, Binary, Call, Compound, DeclRef, DeclStmt, Expr,
    ExprStmt, FieldDecl, FunctionDecl, If, IntLiteral, IntType, Index, Member, MiniCType,
    PointerType, RecordDecl, RecordType, Return, SourceLoc, Stmt, Unary, VarDecl, VoidType,
    While, children,
)
from .lexer import MiniCSyntaxError, MiniCTypeError, Token, tokenize

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1

BINARY_PREC = {
    "||": 2, "&&": 3, "==": 4, "!=": 4, "<": 5, "<=": 5, ">": 5, ">=": 5,
    "+": 6, "-": 6, "*": 7, "/": 7, "%": 7,
}

# name -> (return type, parameter types); abort never returns
BUILTINS: dict[str, tuple[MiniCType, tuple[MiniCType, ...]]] = {
    "malloc": (VOID_PTR, (INT,)),
    "free": (VOID, (VOID_PTR,)),
    "abort": (VOID, ()),
}
NORETURN_BUILTINS = frozenset({"abort"})


def parse_translation_unit(source: str, file_name: str) -> Ast:
    """Parse and type-check one MiniC translation unit.

    Raises :class:`MiniCSyntaxError` or :class:`MiniCTypeError` carrying the
    offending location.
    """
    return _Parser(tokenize(source, file_name), file_name).parse()


def is_null_constant(e: Expr) -> bool:
    return isinstance(e, IntLiteral) and e.value == 0


def is_lvalue(e: Expr) -> bool:
    if isinstance(e, DeclRef):
        return True
    if isinstance(e, Unary):
        return e.op == "*"
    if isinstance(e, Member):
        return e.arrow or is_lvalue(e.base)
    return isinstance(e, Index)


def _compatible_pointers(a: MiniCType, b: MiniCType) -> bool:
    return (
        isinstance(a, PointerType) and isinstance(b, PointerType)
        and (a == b or a == VOID_PTR or b == VOID_PTR)
    )


def assignable(target: MiniCType, value: Expr) -> bool:
    if isinstance(target, (RecordType, ArrayType, VoidType)):
        return False
    if target == value.type:
        return True
    if isinstance(target, PointerType):
        return is_null_constant(value) or _compatible_pointers(target, value.type)
    return False


class _Parser:
    def __init__(self, tokens: list[Token], file_name: str):
        self.toks = tokens
        self.pos = 0
        self.file = file_name
        self.next_id = 0
        self.scopes: list[dict[str, VarDecl]] = [{}]
        self.functions: dict[str, FunctionDecl] = {}
        self.defined: set[str] = set()
        self.records: dict[str, RecordDecl] = {}
        self.current_fn: Optional[FunctionDecl] = None

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "keyword") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of file"
            raise MiniCSyntaxError(self.tok.loc, f"expected '{text}' before '{found}'")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of file"
            raise MiniCSyntaxError(self.tok.loc, f"expected identifier before '{found}'")
        return self.advance()

    def new_id(self) -> int:
        self.next_id += 1
        return self.next_id

    # -- scopes -------------------------------------------------------------

    def lookup_var(self, name: str) -> Optional[VarDecl]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def declare_var(self, decl: VarDecl) -> None:
        scope = self.scopes[-1]
        if decl.name in scope:
            raise MiniCTypeError(decl.loc, f"redefinition of '{decl.name}'")
        if len(self.scopes) == 1 and decl.name in self.functions:
            raise MiniCTypeError(decl.loc, f"'{decl.name}' redeclared as a different kind of symbol")
        scope[decl.name] = decl

    # -- types ----------------------------------------------------------------

    def at_type_start(self) -> bool:
        t = self.tok
        if t.kind == "keyword" and t.text in ("int", "void", "struct"):
            return True
        return t.kind == "ident" and t.text in self.records and self.lookup_var(t.text) is None

    def parse_base_type(self) -> MiniCType:
        t = self.advance()
        if t.text == "int":
            ty: MiniCType = INT
        elif t.text == "void":
            ty = VOID
        elif t.text == "struct":
            name = self.expect_ident()
            if name.text not in self.records:
                raise MiniCTypeError(name.loc, f"unknown record type 'struct {name.text}'")
            ty = RecordType(name.text)
        elif t.kind == "ident" and t.text in self.records:
            ty = RecordType(t.text)
        else:
            raise MiniCSyntaxError(t.loc, f"expected type, found '{t.text}'")
        while self.accept("*"):
            ty = PointerType(ty)
        return ty

    def parse_declarator(self, base: MiniCType, allow_abstract: bool = False) -> tuple[Optional[Token], MiniCType]:
        ty = base
        while self.accept("*"):
            ty = PointerType(ty)
        name: Optional[Token] = None
        if self.tok.kind == "ident":
            name = self.advance()
        elif not allow_abstract:
            self.expect_ident()
        dims: list[int] = []
        while self.at("["):
            lb = self.advance()
            n = self.tok
            if n.kind != "number":
                raise MiniCSyntaxError(n.loc, "array length must be an integer literal")
            self.advance()
            if int(n.text) <= 0:
                raise MiniCTypeError(lb.loc, "array length must be positive")
            dims.append(int(n.text))
            self.expect("]")
        for d in reversed(dims):
            ty = ArrayType(ty, d)
        return name, ty

    def check_object_type(self, ty: MiniCType, loc: SourceLoc) -> None:
        if isinstance(ty, VoidType):
            raise MiniCTypeError(loc, "variable has incomplete type 'void'")
        if isinstance(ty, ArrayType):
            self.check_object_type(ty.element, loc)

    # -- top level --------------------------------------------------------------

    def parse(self) -> Ast:
        decls = []
        while self.tok.kind != "eof":
            decls.extend(self.parse_top_level())
        return Ast(file=self.file, decls=decls, next_id=self.next_id)

    def parse_top_level(self) -> list:
        if self.at("struct") and self.peek().kind == "ident" and self.peek(2).text == "{":
            return [self.parse_record()]
        start = self.tok
        if not self.at_type_start():
            raise MiniCSyntaxError(start.loc, f"expected declaration, found '{start.text or 'end of file'}'")
        base = self.parse_base_type()
        name, ty = self.parse_declarator(base)
        assert name is not None
        if self.at("("):
            return [self.parse_function(name, ty)]
        out = []
        while True:
            out.append(self.finish_global(name, ty))
            if not self.accept(","):
                break
            name, ty = self.parse_declarator(base)
            assert name is not None
        self.expect(";")
        return out

    def parse_record(self) -> RecordDecl:
        kw = self.expect("struct")
        name = self.expect_ident()
        if name.text in self.records:
            raise MiniCTypeError(name.loc, f"redefinition of 'struct {name.text}'")
        record = RecordDecl(node_id=self.new_id(), loc=kw.loc, name=name.text, fields=[])
        self.expect("{")
        seen: set[str] = set()
        while not self.at("}"):
            base = self.parse_base_type()
            while True:
                fname, fty = self.parse_declarator(base)
                assert fname is not None
                if fname.text in seen:
                    raise MiniCTypeError(fname.loc, f"duplicate member '{fname.text}'")
                if fty == RecordType(name.text):
                    raise MiniCTypeError(fname.loc, "field has incomplete type")
                self.check_object_type(fty, fname.loc)
                seen.add(fname.text)
                record.fields.append(FieldDecl(node_id=self.new_id(), loc=fname.loc, name=fname.text, type=fty))
                if not self.accept(","):
                    break
            self.expect(";")
        self.expect("}")
        self.expect(";")
        if not record.fields:
            raise MiniCTypeError(kw.loc, "empty record")
        self.records[record.name] = record
        return record

    def finish_global(self, name: Token, ty: MiniCType) -> VarDecl:
        self.check_object_type(ty, name.loc)
        init = None
        if self.accept("="):
            init = self.parse_assign()
            ok = (
                isinstance(init, IntLiteral)
                or (isinstance(init, Unary) and init.op == "-" and isinstance(init.operand, IntLiteral))
            )
            if not ok or not assignable(ty, init):
                raise MiniCTypeError(init.loc, "global initializer must be an integer constant")
        decl = VarDecl(node_id=self.new_id(), loc=name.loc, name=name.text, type=ty, init=init, storage="global")
        self.declare_var(decl)
        return decl

    def parse_function(self, name: Token, ret: MiniCType) -> FunctionDecl:
        if isinstance(ret, (RecordType, ArrayType)):
            raise MiniCTypeError(name.loc, "functions may not return records or arrays")
        if name.text in BUILTINS:
            raise MiniCTypeError(name.loc, f"cannot redeclare builtin '{name.text}'")
        if name.text in self.scopes[0]:
            raise MiniCTypeError(name.loc, f"'{name.text}' redeclared as a different kind of symbol")
        self.expect("(")
        params: list[VarDecl] = []
        if self.at("void") and self.peek().text == ")":
            self.advance()
        elif not self.at(")"):
            while True:
                base_tok = self.tok
                if not self.at_type_start():
                    raise MiniCSyntaxError(base_tok.loc, "expected parameter type")
                base = self.parse_base_type()
                pname, pty = self.parse_declarator(base, allow_abstract=True)
                if not isinstance(pty, (IntType, PointerType)):
                    raise MiniCTypeError(base_tok.loc, "parameters must have int or pointer type")
                loc = pname.loc if pname else base_tok.loc
                params.append(VarDecl(
                    node_id=self.new_id(), loc=loc, name=pname.text if pname else "",
                    type=pty, storage="param",
                ))
                if not self.accept(","):
                    break
        self.expect(")")
        fn = FunctionDecl(node_id=self.new_id(), loc=name.loc, name=name.text, params=params, return_type=ret)
        prev = self.functions.get(name.text)
        if prev is not None:
            if prev.return_type != ret or [p.type for p in prev.params] != [p.type for p in params]:
                raise MiniCTypeError(name.loc, f"conflicting types for '{name.text}'")
        else:
            self.functions[name.text] = fn
        if self.accept(";"):
            return fn
        if name.text in self.defined:
            raise MiniCTypeError(name.loc, f"redefinition of '{name.text}'")
        self.defined.add(name.text)
        self.current_fn = fn
        self.scopes.append({})
        for p in params:
            if not p.name:
                raise MiniCSyntaxError(p.loc, "parameter name omitted in function definition")
            self.declare_var(p)
        fn.body = self.parse_compound(new_scope=False)
        self.scopes.pop()
        self.current_fn = None
        return fn

    # -- statements -----------------------------------------------------------------

    def parse_compound(self, new_scope: bool = True) -> Compound:
        lb = self.expect("{")
        if new_scope:
            self.scopes.append({})
        stmts: list[Stmt] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise MiniCSyntaxError(self.tok.loc, "expected '}' at end of input")
            stmts.extend(self.parse_stmt())
        self.expect("}")
        if new_scope:
            self.scopes.pop()
        return Compound(node_id=self.new_id(), loc=lb.loc, stmts=stmts)

    def parse_sub_stmt(self) -> Stmt:
        t = self.tok
        stmts = self.parse_stmt()
        if len(stmts) == 1:
            return stmts[0]
        return Compound(node_id=self.new_id(), loc=t.loc, stmts=stmts)

    def parse_stmt(self) -> list[Stmt]:
        t = self.tok
        if self.at("{"):
            return [self.parse_compound()]
        if self.accept(";"):
            return [Compound(node_id=self.new_id(), loc=t.loc, stmts=[])]
        if self.accept("if"):
            self.expect("(")
            cond = self.parse_condition()
            self.expect(")")
            then = self.parse_sub_stmt()
            else_ = self.parse_sub_stmt() if self.accept("else") else None
            return [If(node_id=self.new_id(), loc=t.loc, cond=cond, then=then, else_=else_)]
        if self.accept("while"):
            self.expect("(")
            cond = self.parse_condition()
            self.expect(")")
            body = self.parse_sub_stmt()
            return [While(node_id=self.new_id(), loc=t.loc, cond=cond, body=body)]
        if self.accept("return"):
            return [self.parse_return(t)]
        if self.at_type_start():
            return self.parse_local_decl()
        e = self.parse_expr()
        self.check_logical(e, in_cond=False)
        self.expect(";")
        return [ExprStmt(node_id=self.new_id(), loc=e.loc, expr=e)]

    def parse_return(self, kw: Token) -> Return:
        assert self.current_fn is not None
        ret = self.current_fn.return_type
        if self.accept(";"):
            if not isinstance(ret, VoidType):
                raise MiniCTypeError(kw.loc, "non-void function should return a value")
            return Return(node_id=self.new_id(), loc=kw.loc)
        value = self.parse_expr()
        self.check_logical(value, in_cond=False)
        self.expect(";")
        if isinstance(ret, VoidType):
            raise MiniCTypeError(value.loc, "void function should not return a value")
        if not assignable(ret, value):
            raise MiniCTypeError(value.loc, f"returning '{value.type}' from a function with result type '{ret}'")
        return Return(node_id=self.new_id(), loc=kw.loc, value=value)

    def parse_local_decl(self) -> list[Stmt]:
        start = self.tok
        base = self.parse_base_type()
        out: list[Stmt] = []
        decls: list[VarDecl] = []
        trailing: list[Stmt] = []
        while True:
            name, ty = self.parse_declarator(base)
            assert name is not None
            self.check_object_type(ty, name.loc)
            decl = VarDecl(node_id=self.new_id(), loc=name.loc, name=name.text, type=ty, storage="local")
            if self.accept("="):
                if self.at("{"):
                    self.declare_var(decl)
                    trailing.extend(self.parse_init_list(self.decl_ref(decl, name.loc), ty))
                else:
                    init = self.parse_assign()
                    self.check_logical(init, in_cond=False)
                    if not assignable(ty, init):
                        raise MiniCTypeError(init.loc, f"initializing '{ty}' with an expression of type '{init.type}'")
                    decl.init = init
                    self.declare_var(decl)
            else:
                self.declare_var(decl)
            decls.append(decl)
            if not self.accept(","):
                break
        self.expect(";")
        out.append(DeclStmt(node_id=self.new_id(), loc=start.loc, decls=decls))
        out.extend(trailing)
        return out

    def parse_init_list(self, target: Expr, ty: MiniCType) -> list[Stmt]:
        """Lower ``= {..}`` into one assignment statement per initialized scalar."""
        self.expect("{")
        out: list[Stmt] = []
        i = 0
        while not self.at("}"):
            loc = self.tok.loc
            if isinstance(ty, RecordType):
                rec = self.records[ty.name]
                if i >= len(rec.fields):
                    raise MiniCTypeError(loc, "excess elements in record initializer")
                f = rec.fields[i]
                sub: Expr = Member(node_id=self.new_id(), loc=loc, base=self.copy_lvalue(target), field_name=f.name, arrow=False, type=f.type)
                sub_ty = f.type
            elif isinstance(ty, ArrayType):
                if i >= ty.length:
                    raise MiniCTypeError(loc, "excess elements in array initializer")
                idx = IntLiteral(node_id=self.new_id(), loc=loc, value=i, type=INT)
                sub = Index(node_id=self.new_id(), loc=loc, base=self.copy_lvalue(target), index=idx, type=ty.element)
                sub_ty = ty.element
            else:
                if i >= 1:
                    raise MiniCTypeError(loc, "excess elements in scalar initializer")
                sub, sub_ty = self.copy_lvalue(target), ty
            if self.at("{"):
                out.extend(self.parse_init_list(sub, sub_ty))
            else:
                value = self.parse_assign()
                self.check_logical(value, in_cond=False)
                if not assignable(sub_ty, value):
                    raise MiniCTypeError(value.loc, f"initializing '{sub_ty}' with an expression of type '{value.type}'")
                assign = Binary(node_id=self.new_id(), loc=value.loc, op="=", lhs=sub, rhs=value, type=sub_ty)
                out.append(ExprStmt(node_id=self.new_id(), loc=value.loc, expr=assign))
            i += 1
            if not self.accept(","):
                break
        self.expect("}")
        return out

    def copy_lvalue(self, e: Expr) -> Expr:
        if isinstance(e, DeclRef):
            return DeclRef(node_id=self.new_id(), loc=e.loc, name=e.name, decl_id=e.decl_id, decl=e.decl, type=e.type)
        if isinstance(e, Member):
            return Member(node_id=self.new_id(), loc=e.loc, base=self.copy_lvalue(e.base), field_name=e.field_name, arrow=e.arrow, type=e.type)
        if isinstance(e, Index):
            return Index(node_id=self.new_id(), loc=e.loc, base=self.copy_lvalue(e.base), index=self.copy_lvalue(e.index), type=e.type)
        if isinstance(e, Unary):
            return Unary(node_id=self.new_id(), loc=e.loc, op=e.op, operand=self.copy_lvalue(e.operand), type=e.type)
        if isinstance(e, IntLiteral):
            return IntLiteral(node_id=self.new_id(), loc=e.loc, value=e.value, type=e.type)
        raise MiniCTypeError(e.loc, "expression cannot be used as an increment target")

    def decl_ref(self, decl: VarDecl, loc: SourceLoc) -> DeclRef:
        return DeclRef(node_id=self.new_id(), loc=loc, name=decl.name, decl_id=decl.node_id, decl=decl, type=decl.type)

    # -- expressions --------------------------------------------------------------

    def parse_condition(self) -> Expr:
        e = self.parse_expr()
        self.check_logical(e, in_cond=True)
        if not e.type.is_scalar():
            raise MiniCTypeError(e.loc, f"condition has non-scalar type '{e.type}'")
        return e

    def check_logical(self, e: Expr, in_cond: bool) -> None:
        if isinstance(e, Binary) and e.op in ("&&", "||"):
            if not in_cond:
                raise MiniCTypeError(e.loc, f"'{e.op}' is only supported in if/while conditions")
            self.check_logical(e.lhs, True)
            self.check_logical(e.rhs, True)
        elif isinstance(e, Unary) and e.op == "!":
            self.check_logical(e.operand, in_cond)
        else:
            for c in children(e):
                if isinstance(c, Expr):
                    self.check_logical(c, False)

    def parse_expr(self) -> Expr:
        return self.parse_assign()

    def parse_assign(self) -> Expr:
        lhs = self.parse_binary(2)
        if self.at("="):
            op = self.advance()
            rhs = self.parse_assign()
            return self.make_assign(lhs, rhs, op.loc)
        return lhs

    def make_assign(self, lhs: Expr, rhs: Expr, loc: SourceLoc) -> Expr:
        if not is_lvalue(lhs):
            raise MiniCTypeError(lhs.loc, "expression is not assignable")
        if isinstance(lhs.type, (RecordType, ArrayType)):
            raise MiniCTypeError(loc, f"assignment to '{lhs.type}' is not supported")
        if not assignable(lhs.type, rhs):
            raise MiniCTypeError(rhs.loc, f"assigning to '{lhs.type}' from incompatible type '{rhs.type}'")
        self.check_logical(rhs, in_cond=False)
        return Binary(node_id=self.new_id(), loc=lhs.loc, op="=", lhs=lhs, rhs=rhs, type=lhs.type)

    def parse_binary(self, min_prec: int) -> Expr:
        left = self.parse_unary()
        while self.tok.kind == "punct" and BINARY_PREC.get(self.tok.text, 0) >= min_prec:
            op = self.advance()
            prec = BINARY_PREC[op.text]
            right = self.parse_binary(prec + 1)
            left = self.make_binary(op.text, left, right, op.loc)
        return left

    def make_binary(self, op: str, lhs: Expr, rhs: Expr, loc: SourceLoc) -> Expr:
        lt, rt = lhs.type, rhs.type
        if op in ("&&", "||"):
            if not (lt.is_scalar() and rt.is_scalar()):
                raise MiniCTypeError(loc, f"invalid operands to '{op}'")
        elif op in ("+", "*", "/", "%"):
            if lt != INT or rt != INT:
                raise MiniCTypeError(loc, f"invalid operands to binary '{op}' ('{lt}' and '{rt}')")
        elif op == "-":
            ok = (lt == INT and rt == INT) or (isinstance(lt, PointerType) and lt == rt and lt != VOID_PTR)
            if not ok:
                raise MiniCTypeError(loc, f"invalid operands to binary '-' ('{lt}' and '{rt}')")
        else:
            ok = (
                (lt == INT and rt == INT)
                or _compatible_pointers(lt, rt)
                or (isinstance(lt, PointerType) and is_null_constant(rhs))
                or (isinstance(rt, PointerType) and is_null_constant(lhs))
            )
            if not ok:
                raise MiniCTypeError(loc, f"comparison between '{lt}' and '{rt}'")
        return Binary(node_id=self.new_id(), loc=lhs.loc, op=op, lhs=lhs, rhs=rhs, type=INT)

    def parse_unary(self) -> Expr:
        t = self.tok
        if self.at("-") or self.at("!") or self.at("*") or self.at("&"):
            self.advance()
            operand = self.parse_unary()
            return self.make_unary(t.text, operand, t.loc)
        if self.at("++") or self.at("--"):
            self.advance()
            target = self.parse_unary()
            if target.type != INT or not is_lvalue(target):
                raise MiniCTypeError(target.loc, f"cannot apply '{t.text}' to this operand")
            one = IntLiteral(node_id=self.new_id(), loc=t.loc, value=1, type=INT)
            step = Binary(node_id=self.new_id(), loc=target.loc, op="+" if t.text == "++" else "-",
                          lhs=self.copy_lvalue(target), rhs=one, type=INT)
            return Binary(node_id=self.new_id(), loc=t.loc, op="=", lhs=target, rhs=step, type=INT)
        return self.parse_postfix()

    def make_unary(self, op: str, operand: Expr, loc: SourceLoc) -> Expr:
        ty = operand.type
        if op == "-":
            if ty != INT:
                raise MiniCTypeError(loc, f"invalid argument type '{ty}' to unary '-'")
            rtype: MiniCType = INT
        elif op == "!":
            if not ty.is_scalar():
                raise MiniCTypeError(loc, f"invalid argument type '{ty}' to unary '!'")
            rtype = INT
        elif op == "*":
            if not isinstance(ty, PointerType):
                raise MiniCTypeError(loc, f"indirection requires pointer operand ('{ty}' invalid)")
            if isinstance(ty.pointee, VoidType):
                raise MiniCTypeError(loc, "dereferencing 'void *'")
            rtype = ty.pointee
        else:
            if not is_lvalue(operand):
                raise MiniCTypeError(loc, "cannot take the address of an rvalue")
            rtype = PointerType(ty)
        return Unary(node_id=self.new_id(), loc=loc, op=op, operand=operand, type=rtype)

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            t = self.tok
            if self.accept("["):
                idx = self.parse_expr()
                self.check_logical(idx, in_cond=False)
                self.expect("]")
                if isinstance(e.type, ArrayType):
                    elem = e.type.element
                elif isinstance(e.type, PointerType) and not isinstance(e.type.pointee, VoidType):
                    elem = e.type.pointee
                else:
                    raise MiniCTypeError(t.loc, "subscripted value is not an array or pointer")
                if idx.type != INT:
                    raise MiniCTypeError(idx.loc, "array subscript is not an integer")
                e = Index(node_id=self.new_id(), loc=e.loc, base=e, index=idx, type=elem)
            elif self.at(".") or self.at("->"):
                arrow = self.advance().text == "->"
                fname = self.expect_ident()
                base_ty = e.type
                if arrow:
                    if not isinstance(base_ty, PointerType):
                        raise MiniCTypeError(t.loc, f"member reference type '{base_ty}' is not a pointer")
                    base_ty = base_ty.pointee
                if not isinstance(base_ty, RecordType):
                    raise MiniCTypeError(t.loc, f"member reference base type '{base_ty}' is not a record")
                f = self.records[base_ty.name].field(fname.text)
                if f is None:
                    raise MiniCTypeError(fname.loc, f"no member named '{fname.text}' in '{base_ty}'")
                e = Member(node_id=self.new_id(), loc=e.loc, base=e, field_name=f.name, arrow=arrow, type=f.type)
            elif self.at("++") or self.at("--"):
                raise MiniCSyntaxError(t.loc, "postfix increment/decrement is not supported; use prefix form")
            else:
                return e

    def parse_primary(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            value = int(t.text)
            if value > INT_MAX:
                raise MiniCTypeError(t.loc, f"integer literal {t.text} is out of 32-bit range")
            return IntLiteral(node_id=self.new_id(), loc=t.loc, value=value, type=INT)
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return self.parse_call(t)
            decl = self.lookup_var(t.text)
            if decl is None:
                raise MiniCTypeError(t.loc, f"use of undeclared identifier '{t.text}'")
            return self.decl_ref(decl, t.loc)
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        raise MiniCSyntaxError(t.loc, f"expected expression before '{t.text or 'end of file'}'")

    def parse_call(self, name: Token) -> Expr:
        self.expect("(")
        args: list[Expr] = []
        if not self.at(")"):
            while True:
                args.append(self.parse_assign())
                if not self.accept(","):
                    break
        self.expect(")")
        if name.text in BUILTINS:
            ret, ptypes = BUILTINS[name.text]
        elif name.text in self.functions:
            fn = self.functions[name.text]
            ret, ptypes = fn.return_type, tuple(p.type for p in fn.params)
        else:
            raise MiniCTypeError(name.loc, f"call to undeclared function '{name.text}'")
        if len(args) != len(ptypes):
            raise MiniCTypeError(name.loc, f"'{name.text}' expects {len(ptypes)} argument(s), got {len(args)}")
        for a, pty in zip(args, ptypes):
            self.check_logical(a, in_cond=False)
            if not assignable(pty, a) and not (pty == VOID_PTR and isinstance(a.type, PointerType)):
                raise MiniCTypeError(a.loc, f"passing '{a.type}' to parameter of type '{pty}'")
        return Call(node_id=self.new_id(), loc=name.loc, callee=name.text, args=args, type=ret)
