"""MiniLang 抽象语法树。

每个节点带源码位置 (line, col)；表达式与语句分别是 Expr / Stmt 的子类。
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Node:
    line: int
    col: int


# ===== 表达式 =====

@dataclass(frozen=True)
class Expr(Node):
    pass


@dataclass(frozen=True)
class Name(Expr):
    id: str


@dataclass(frozen=True)
class This(Expr):
    pass


@dataclass(frozen=True)
class Literal(Expr):
    value: str | int | bool | None
    kind: str  # string | int | bool | null


@dataclass(frozen=True)
class New(Expr):
    class_name: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Call(Expr):
    receiver: Expr | None
    name: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class FieldAccess(Expr):
    receiver: Expr
    name: str


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


# ===== 语句 =====

@dataclass(frozen=True)
class Stmt(Node):
    pass


@dataclass(frozen=True)
class Block(Stmt):
    body: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class LocalDecl(Stmt):
    type_name: str
    name: str
    init: Expr | None = None


@dataclass(frozen=True)
class Assign(Stmt):
    target: Expr  # Name | FieldAccess
    value: Expr


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    orelse: Stmt | None = None


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass(frozen=True)
class Return(Stmt):
    value: Expr | None = None


@dataclass(frozen=True)
class CatchClause(Node):
    type_name: str
    name: str
    body: Block


@dataclass(frozen=True)
class Try(Stmt):
    body: Block
    catches: tuple[CatchClause, ...] = ()


# ===== 声明 =====

@dataclass(frozen=True)
class Param(Node):
    type_name: str
    name: str


@dataclass(frozen=True)
class FieldNode(Node):
    type_name: str
    name: str
    is_static: bool = False
    init: Expr | None = None


@dataclass(frozen=True)
class MethodNode(Node):
    name: str
    params: tuple[Param, ...] = ()
    return_type: str = "void"
    is_static: bool = False
    is_constructor: bool = False
    body: Block | None = None


@dataclass(frozen=True)
class TypeNode(Node):
    kind: str  # class | interface
    name: str
    extends: tuple[str, ...] = ()
    implements: tuple[str, ...] = ()
    fields: tuple[FieldNode, ...] = ()
    methods: tuple[MethodNode, ...] = ()


@dataclass(frozen=True)
class CompilationUnit:
    file: str
    types: tuple[TypeNode, ...] = field(default_factory=tuple)
