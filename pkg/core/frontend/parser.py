"""MiniLang 词法与递归下降语法分析。

语法见 docs/minilang.md。出错时抛 MiniLangSyntaxError，带行列号与期望的记号。
"""

import re
from pathlib import Path
from typing import NamedTuple

from core.exceptions import InputError, MiniLangSyntaxError
from core.frontend import ast_nodes as ast

KEYWORDS = {
    "class", "interface", "extends", "implements", "new", "if", "else", "while", "return",
    "try", "catch", "this", "null", "true", "false", "static", "public", "private",
    "protected", "final", "throws",
}
MODIFIERS = {"static", "public", "private", "protected", "final"}

TOKEN_SPEC = [
    ("COMMENT", r"//[^\n]*|/\*.*?\*/"),
    ("WS", r"\s+"),
    ("STRING", r'"(?:\\.|[^"\\\n])*"'),
    ("INT", r"\d+"),
    ("ID", r"[A-Za-z_$][A-Za-z0-9_$]*"),
    ("OP", r"==|!=|&&|\|\||[{}()\[\];,.=+\-!<>*/]"),
    ("MISMATCH", r"."),
]
TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in TOKEN_SPEC), re.DOTALL)


class Token(NamedTuple):
    kind: str  # ID | KEYWORD | INT | STRING | OP | EOF
    value: str
    line: int
    col: int


def tokenize(source: str, file: str = "") -> list[Token]:
    tokens = []
    line, line_start = 1, 0
    for match in TOKEN_RE.finditer(source):
        kind, text = match.lastgroup, match.group()
        col = match.start() - line_start + 1
        if kind == "MISMATCH":
            raise MiniLangSyntaxError(line, col, "a valid token", text, file)
        if kind == "ID" and text in KEYWORDS:
            kind = "KEYWORD"
        if kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = match.start() + text.rindex("\n") + 1
    tokens.append(Token("EOF", "", line, len(source) - line_start + 1))
    return tokens


class Parser:
    def __init__(self, source: str, file: str = ""):
        self.file = file
        self.tokens = tokenize(source, file)
        self.pos = 0

    # ===== 记号工具 =====

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def check(self, value: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind in ("OP", "KEYWORD") and tok.value == value

    def accept(self, value: str) -> bool:
        if self.check(value):
            self.advance()
            return True
        return False

    def expect(self, value: str) -> Token:
        if not self.check(value):
            self.error(repr(value))
        return self.advance()

    def expect_id(self, what: str = "identifier") -> Token:
        if self.peek().kind != "ID":
            self.error(what)
        return self.advance()

    def error(self, expected: str):
        tok = self.peek()
        found = "end of file" if tok.kind == "EOF" else tok.value
        raise MiniLangSyntaxError(tok.line, tok.col, expected, found, self.file)

    # ===== 声明 =====

    def parse_unit(self) -> ast.CompilationUnit:
        types = []
        while self.peek().kind != "EOF":
            types.append(self.parse_type_decl())
        return ast.CompilationUnit(file=self.file, types=tuple(types))

    def parse_type_decl(self) -> ast.TypeNode:
        while self.peek().value in MODIFIERS and self.peek().kind == "KEYWORD":
            self.advance()
        start = self.peek()
        if self.accept("class"):
            kind = "class"
        elif self.accept("interface"):
            kind = "interface"
        else:
            self.error("'class' or 'interface'")
        name = self.expect_id("type name").value
        extends, implements = [], []
        if self.accept("extends"):
            extends = self.parse_id_list()
            if kind == "class" and len(extends) > 1:
                self.error("'{' (a class extends one type)")
        if kind == "class" and self.accept("implements"):
            implements = self.parse_id_list()
        self.expect("{")
        fields, methods = [], []
        while not self.check("}"):
            if self.peek().kind == "EOF":
                self.error("'}'")
            member = self.parse_member(name, kind)
            (methods if isinstance(member, ast.MethodNode) else fields).append(member)
        self.expect("}")
        return ast.TypeNode(start.line, start.col, kind, name, tuple(extends), tuple(implements),
                            tuple(fields), tuple(methods))

    def parse_id_list(self) -> list[str]:
        names = [self.expect_id("type name").value]
        while self.accept(","):
            names.append(self.expect_id("type name").value)
        return names

    def parse_member(self, class_name: str, kind: str):
        is_static = False
        while self.peek().kind == "KEYWORD" and self.peek().value in MODIFIERS:
            is_static = is_static or self.advance().value == "static"
        start = self.peek()
        # 构造器：类名后紧跟 '('
        if start.kind == "ID" and start.value == class_name and self.check("(", 1):
            self.advance()
            params = self.parse_params()
            self.skip_throws()
            body = self.parse_block()
            return ast.MethodNode(start.line, start.col, "<init>", params, class_name, False, True, body)
        type_name = self.parse_type()
        name_tok = self.expect_id("member name")
        if self.check("("):
            params = self.parse_params()
            self.skip_throws()
            body = None
            if kind == "interface" or self.check(";"):
                self.expect(";")
            else:
                body = self.parse_block()
            return ast.MethodNode(name_tok.line, name_tok.col, name_tok.value, params, type_name,
                                  is_static, False, body)
        init = None
        if self.accept("="):
            init = self.parse_expr()
        self.expect(";")
        return ast.FieldNode(name_tok.line, name_tok.col, type_name, name_tok.value, is_static, init)

    def parse_type(self) -> str:
        name = self.expect_id("type name").value
        while self.check("[") and self.check("]", 1):
            self.advance()
            self.advance()
            name += "[]"
        return name

    def parse_params(self) -> tuple[ast.Param, ...]:
        self.expect("(")
        params = []
        if not self.check(")"):
            while True:
                tok = self.peek()
                type_name = self.parse_type()
                params.append(ast.Param(tok.line, tok.col, type_name, self.expect_id("parameter name").value))
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(params)

    def skip_throws(self):
        if self.accept("throws"):
            self.parse_id_list()

    # ===== 语句 =====

    def parse_block(self) -> ast.Block:
        start = self.expect("{")
        body = []
        while not self.check("}"):
            if self.peek().kind == "EOF":
                self.error("'}'")
            body.append(self.parse_stmt())
        self.expect("}")
        return ast.Block(start.line, start.col, tuple(body))

    def is_local_decl(self) -> bool:
        if self.peek().kind != "ID":
            return False
        offset = 1
        while self.check("[", offset) and self.check("]", offset + 1):
            offset += 2
        return self.peek(offset).kind == "ID"

    def parse_stmt(self) -> ast.Stmt:
        tok = self.peek()
        if self.check("{"):
            return self.parse_block()
        if self.accept("if"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_stmt()
            orelse = self.parse_stmt() if self.accept("else") else None
            return ast.If(tok.line, tok.col, cond, then, orelse)
        if self.accept("while"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return ast.While(tok.line, tok.col, cond, self.parse_stmt())
        if self.accept("return"):
            value = None if self.check(";") else self.parse_expr()
            self.expect(";")
            return ast.Return(tok.line, tok.col, value)
        if self.accept("try"):
            body = self.parse_block()
            catches = []
            while self.check("catch"):
                ctok = self.advance()
                self.expect("(")
                type_name = self.parse_type()
                name = self.expect_id("exception variable").value
                self.expect(")")
                catches.append(ast.CatchClause(ctok.line, ctok.col, type_name, name, self.parse_block()))
            if not catches:
                self.error("'catch'")
            return ast.Try(tok.line, tok.col, body, tuple(catches))
        if self.is_local_decl():
            type_name = self.parse_type()
            name = self.expect_id("variable name").value
            init = self.parse_expr() if self.accept("=") else None
            self.expect(";")
            return ast.LocalDecl(tok.line, tok.col, type_name, name, init)
        expr = self.parse_expr()
        if self.accept("="):
            if not isinstance(expr, (ast.Name, ast.FieldAccess)):
                raise MiniLangSyntaxError(tok.line, tok.col, "assignable expression", "", self.file)
            value = self.parse_expr()
            self.expect(";")
            return ast.Assign(tok.line, tok.col, expr, value)
        self.expect(";")
        return ast.ExprStmt(tok.line, tok.col, expr)

    # ===== 表达式 =====

    def parse_expr(self) -> ast.Expr:
        return self.parse_binary(0)

    _LEVELS = (("||",), ("&&",), ("==", "!="), ("<", ">"), ("+", "-"), ("*", "/"))

    def parse_binary(self, level: int) -> ast.Expr:
        if level == len(self._LEVELS):
            return self.parse_unary()
        left = self.parse_binary(level + 1)
        while self.peek().kind == "OP" and self.peek().value in self._LEVELS[level]:
            op = self.advance()
            right = self.parse_binary(level + 1)
            left = ast.Binary(op.line, op.col, op.value, left, right)
        return left

    def parse_unary(self) -> ast.Expr:
        tok = self.peek()
        if self.check("!") or self.check("-"):
            self.advance()
            return ast.Unary(tok.line, tok.col, tok.value, self.parse_unary())
        return self.parse_postfix()

    def parse_args(self) -> tuple[ast.Expr, ...]:
        self.expect("(")
        args = []
        if not self.check(")"):
            args.append(self.parse_expr())
            while self.accept(","):
                args.append(self.parse_expr())
        self.expect(")")
        return tuple(args)

    def parse_postfix(self) -> ast.Expr:
        expr = self.parse_primary()
        while self.accept("."):
            name = self.expect_id("member name")
            if self.check("("):
                expr = ast.Call(name.line, name.col, expr, name.value, self.parse_args())
            else:
                expr = ast.FieldAccess(name.line, name.col, expr, name.value)
        return expr

    def parse_primary(self) -> ast.Expr:
        tok = self.peek()
        if self.accept("new"):
            class_name = self.expect_id("class name").value
            return ast.New(tok.line, tok.col, class_name, self.parse_args())
        if self.accept("this"):
            return ast.This(tok.line, tok.col)
        if self.accept("null"):
            return ast.Literal(tok.line, tok.col, None, "null")
        if self.check("true") or self.check("false"):
            self.advance()
            return ast.Literal(tok.line, tok.col, tok.value == "true", "bool")
        if tok.kind == "INT":
            self.advance()
            return ast.Literal(tok.line, tok.col, int(tok.value), "int")
        if tok.kind == "STRING":
            self.advance()
            return ast.Literal(tok.line, tok.col, tok.value[1:-1], "string")
        if tok.kind == "ID":
            self.advance()
            if self.check("("):
                return ast.Call(tok.line, tok.col, None, tok.value, self.parse_args())
            return ast.Name(tok.line, tok.col, tok.value)
        if self.accept("("):
            expr = self.parse_expr()
            self.expect(")")
            return expr
        self.error("expression")


def parse(source: str, file: str = "") -> ast.CompilationUnit:
    """把一份 MiniLang 源码解析为 CompilationUnit。"""
    return Parser(source, file).parse_unit()


def parse_directory(path: str | Path) -> list[ast.CompilationUnit]:
    """解析目录下所有 .mini 文件（按相对路径排序，保证结果稳定）。"""
    root = Path(path)
    if not root.is_dir():
        raise InputError(f"source directory not found: {root}")
    units = []
    for file in sorted(root.rglob("*.mini")):
        rel = file.relative_to(root).as_posix()
        units.append(parse(file.read_text(encoding="utf-8"), rel))
    return units
