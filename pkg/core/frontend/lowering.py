"""把 MiniLang AST 降级为三地址语句（ProgramFacts / FrameworkModel）。

- 嵌套的调用与实例化展开为临时变量 $t1, $t2, ...
- 字面量不产生语句，除非直接赋值给局部变量
- 到达定义按结构化控制流计算：if/else 合并两支，while 只走一遍（无回边），
  catch 的入口环境是 try 前后环境的并集
"""

from collections import deque
from typing import NamedTuple

from core.constant import INIT_MEMBER, TEMP_PREFIX, THIS
from core.exceptions import DuplicateTypeError, NameResolutionError, NoEntrypointError
from core.frontend import ast_nodes as ast
from core.schemas.program_schema import (AccessMode, CallSite, DefUse, FieldAccess, FieldDecl,
                                         FrameworkMethodBody, FrameworkModel, MethodFacts, MethodSig, Origin,
                                         ParamDecl, ProgramFacts, Statement, StmtOp, TypeDecl, TypeKind)

_LITERAL_TYPES = {"string": "String", "int": "int", "bool": "boolean", "null": None}
_BOOL_OPS = {"==", "!=", "&&", "||", "<", ">", "!"}


class Operand(NamedTuple):
    var: str | None
    type_name: str | None
    type_ref: bool = False


def type_decl_from_ast(node: ast.TypeNode, origin: Origin, file: str) -> TypeDecl:
    """AST 类型声明 -> TypeDecl；同名成员（重载）直接报错。"""
    seen_fields, seen_methods = set(), set()
    fields, methods = [], []
    for f in node.fields:
        if f.name in seen_fields:
            raise NameResolutionError(f"{file}:{f.line}: field {node.name}.{f.name} declared twice")
        seen_fields.add(f.name)
        fields.append(FieldDecl(name=f.name, type_name=f.type_name, is_static=f.is_static))
    for m in node.methods:
        if m.name in seen_methods:
            raise NameResolutionError(f"{file}:{m.line}: {node.name}.{m.name} is overloaded (not supported)")
        seen_methods.add(m.name)
        methods.append(MethodSig(
            name=m.name,
            params=[ParamDecl(name=p.name, type_name=p.type_name) for p in m.params],
            return_type=m.return_type,
            is_static=m.is_static,
            has_body=m.body is not None,
        ))
    return TypeDecl(name=node.name, kind=TypeKind(node.kind), extends=list(node.extends),
                    implements=list(node.implements), fields=fields, methods=methods, origin=origin, file=file)


class TypeEnv:
    """已声明类型（框架 + 应用）上的成员查找。"""

    def __init__(self, decls: list[TypeDecl]):
        self.types = {d.name: d for d in decls}

    def is_known(self, name: str | None) -> bool:
        return name is not None and name in self.types

    def _walk(self, type_name: str):
        # 广度优先：先 extends 后 implements
        seen = {type_name}
        queue = deque([type_name])
        while queue:
            current = queue.popleft()
            decl = self.types.get(current)
            if decl is None:
                continue
            yield decl
            for sup in decl.supertypes:
                if sup not in seen:
                    seen.add(sup)
                    queue.append(sup)

    def lookup_method(self, type_name: str, name: str) -> tuple[str, MethodSig] | None:
        for decl in self._walk(type_name):
            sig = decl.method(name)
            if sig is not None:
                return decl.name, sig
        return None

    def lookup_field(self, type_name: str, name: str) -> tuple[str, FieldDecl] | None:
        for decl in self._walk(type_name):
            fd = decl.field(name)
            if fd is not None:
                return decl.name, fd
        return None


class MethodLowerer:
    """单个方法体的降级器。"""

    def __init__(self, env: TypeEnv, owner: ast.TypeNode, method: ast.MethodNode, file: str):
        self.env = env
        self.owner = owner
        self.method = method
        self.file = file
        self.qualified = f"{owner.name}.{method.name}"
        self.stmts: list[Statement] = []
        self.def_use: list[DefUse] = []
        self.call_sites: list[CallSite] = []
        self.reaching: dict[str, frozenset[int]] = {}
        self.var_types: dict[str, str | None] = {}
        self.controllers: list[int] = []
        self.temps = 0

    # ===== 基础设施 =====

    def fresh(self) -> str:
        self.temps += 1
        return f"{TEMP_PREFIX}{self.temps}"

    def emit(self, op: StmtOp, line: int, defs=(), uses=(), **attrs) -> int:
        index = len(self.stmts)
        used = list(dict.fromkeys(u for u in uses if u))
        for var in used:
            for d in sorted(self.reaching.get(var, ())):
                self.def_use.append(DefUse(def_index=d, use_index=index, var=var))
        controller = self.controllers[-1] if self.controllers else None
        self.stmts.append(Statement(index=index, op=op, defs=list(defs), uses=used, controlled_by=controller,
                                    line=line, **attrs))
        for var in defs:
            self.reaching[var] = frozenset({index})
        return index

    @staticmethod
    def merge(*envs: dict[str, frozenset[int]]) -> dict[str, frozenset[int]]:
        merged: dict[str, frozenset[int]] = {}
        for env in envs:
            for var, defs in env.items():
                merged[var] = merged.get(var, frozenset()) | defs
        return merged

    def unresolved(self, node: ast.Node, what: str):
        raise NameResolutionError(f"{self.file}:{node.line}:{node.col}: {what} (in {self.qualified})")

    def result_var(self, dest: str | None, need: bool) -> list[str]:
        if dest:
            return [dest]
        return [self.fresh()] if need else []

    # ===== 入口 =====

    def lower(self) -> MethodFacts:
        params = []
        if not self.method.is_static:
            self.var_types[THIS] = self.owner.name
            self.emit(StmtOp.PARAM, self.method.line, defs=[THIS], member=THIS, target_type=None)
            params.append(THIS)
        for p in self.method.params:
            self.var_types[p.name] = p.type_name
            self.emit(StmtOp.PARAM, p.line, defs=[p.name], member=p.name)
            params.append(p.name)
        if self.method.body is not None:
            self.lower_stmt(self.method.body)
        return MethodFacts(name=self.qualified, class_name=self.owner.name, params=params,
                           is_static=self.method.is_static, file=self.file, statements=self.stmts,
                           def_use=self.def_use)

    # ===== 语句 =====

    def lower_stmt(self, stmt: ast.Stmt):
        handler = getattr(self, f"stmt_{type(stmt).__name__}")
        handler(stmt)

    def stmt_Block(self, stmt: ast.Block):
        for child in stmt.body:
            self.lower_stmt(child)

    def stmt_LocalDecl(self, stmt: ast.LocalDecl):
        self.var_types[stmt.name] = stmt.type_name
        if stmt.init is not None:
            self.lower_expr(stmt.init, dest=stmt.name)

    def stmt_Assign(self, stmt: ast.Assign):
        target = stmt.target
        if isinstance(target, ast.Name) and target.id in self.var_types:
            self.lower_expr(stmt.value, dest=target.id)
            return
        if isinstance(target, ast.Name):
            recv = self.implicit_field_receiver(target, target.id)
            if recv is None:
                self.unresolved(target, f"assignment to undeclared name {target.id}")
            name = target.id
        else:
            recv = self.lower_expr(target.receiver)
            name = target.name
        value = self.lower_expr(stmt.value)
        self.emit_field_access(StmtOp.FIELD_WRITE, stmt, recv, name, dest=None, need=False, value=value.var)

    def stmt_ExprStmt(self, stmt: ast.ExprStmt):
        self.lower_expr(stmt.expr, need=False)

    def stmt_If(self, stmt: ast.If):
        cond = self.lower_expr(stmt.cond)
        branch = self.emit(StmtOp.BRANCH, stmt.line, uses=[cond.var])
        before = dict(self.reaching)
        self.controllers.append(branch)
        self.lower_stmt(stmt.then)
        after_then = self.reaching
        self.reaching = dict(before)
        if stmt.orelse is not None:
            self.lower_stmt(stmt.orelse)
        self.controllers.pop()
        self.reaching = self.merge(after_then, self.reaching)

    def stmt_While(self, stmt: ast.While):
        cond = self.lower_expr(stmt.cond)
        branch = self.emit(StmtOp.BRANCH, stmt.line, uses=[cond.var])
        before = dict(self.reaching)
        self.controllers.append(branch)
        self.lower_stmt(stmt.body)
        self.controllers.pop()
        self.reaching = self.merge(before, self.reaching)

    def stmt_Return(self, stmt: ast.Return):
        value = self.lower_expr(stmt.value) if stmt.value is not None else Operand(None, None)
        self.emit(StmtOp.RETURN, stmt.line, uses=[value.var], args=[value.var] if stmt.value is not None else [])

    def stmt_Try(self, stmt: ast.Try):
        enter = self.emit(StmtOp.TRY_ENTER, stmt.line)
        before = dict(self.reaching)
        self.lower_stmt(stmt.body)
        after_try = dict(self.reaching)
        outcomes = [after_try]
        for clause in stmt.catches:
            self.reaching = self.merge(before, after_try)
            self.controllers.append(enter)
            self.var_types[clause.name] = clause.type_name
            target = clause.type_name if self.env.is_known(clause.type_name) else None
            self.emit(StmtOp.CATCH, clause.line, defs=[clause.name], target_type=target, member=clause.name)
            self.lower_stmt(clause.body)
            self.controllers.pop()
            outcomes.append(self.reaching)
        self.reaching = self.merge(*outcomes)

    # ===== 表达式 =====

    def lower_expr(self, expr: ast.Expr, dest: str | None = None, need: bool = True) -> Operand:
        handler = getattr(self, f"expr_{type(expr).__name__}")
        return handler(expr, dest, need)

    def copy_into(self, expr: ast.Expr, operand: Operand, dest: str | None) -> Operand:
        if dest is None or dest == operand.var:
            return operand
        self.emit(StmtOp.ASSIGN, expr.line, defs=[dest], uses=[operand.var])
        return Operand(dest, operand.type_name)

    def expr_Literal(self, expr: ast.Literal, dest, need) -> Operand:
        return self.copy_into(expr, Operand(None, _LITERAL_TYPES[expr.kind]), dest)

    def expr_This(self, expr: ast.This, dest, need) -> Operand:
        if THIS not in self.var_types:
            self.unresolved(expr, "'this' in a static method")
        return self.copy_into(expr, Operand(THIS, self.owner.name), dest)

    def expr_Name(self, expr: ast.Name, dest, need) -> Operand:
        if expr.id in self.var_types:
            return self.copy_into(expr, Operand(expr.id, self.var_types[expr.id]), dest)
        recv = self.implicit_field_receiver(expr, expr.id)
        if recv is not None:
            return self.emit_field_access(StmtOp.FIELD_READ, expr, recv, expr.id, dest, need)
        if expr.id[:1].isupper():
            if dest is not None:
                self.unresolved(expr, f"type name {expr.id} used as a value")
            return Operand(None, expr.id, type_ref=True)
        self.unresolved(expr, f"undeclared name {expr.id}")

    def implicit_field_receiver(self, node: ast.Node, name: str) -> Operand | None:
        found = self.env.lookup_field(self.owner.name, name)
        if found is None:
            return None
        _, fd = found
        if fd.is_static:
            return Operand(None, self.owner.name, type_ref=True)
        if THIS not in self.var_types:
            self.unresolved(node, f"instance field {name} used in a static method")
        return Operand(THIS, self.owner.name)

    def emit_field_access(self, op: StmtOp, node: ast.Node, recv: Operand, name: str, dest, need,
                          value: str | None = None) -> Operand:
        owner, field_type, is_static = None, None, recv.type_ref
        target = recv.type_name if self.env.is_known(recv.type_name) else None
        if target is not None:
            found = self.env.lookup_field(target, name)
            if found is None:
                self.unresolved(node, f"{target} has no field {name}")
            owner, fd = found
            field_type = fd.type_name
            is_static = fd.is_static
        defs = self.result_var(dest, True) if op == StmtOp.FIELD_READ else []
        uses = [recv.var, value] if op == StmtOp.FIELD_WRITE else [recv.var]
        args = [value] if op == StmtOp.FIELD_WRITE else []
        self.emit(op, node.line, defs=defs, uses=uses, receiver=recv.var, args=args, target_type=target,
                  owner=owner, member=name, is_static=is_static)
        return Operand(defs[0] if defs else None, field_type)

    def expr_FieldAccess(self, expr: ast.FieldAccess, dest, need) -> Operand:
        recv = self.lower_expr(expr.receiver)
        return self.emit_field_access(StmtOp.FIELD_READ, expr, recv, expr.name, dest, need)

    def expr_Call(self, expr: ast.Call, dest, need) -> Operand:
        if expr.receiver is None:
            found = self.env.lookup_method(self.owner.name, expr.name)
            if found is None:
                self.unresolved(expr, f"undeclared method {expr.name}")
            if found[1].is_static or THIS not in self.var_types:
                recv = Operand(None, self.owner.name, type_ref=True)
            else:
                recv = Operand(THIS, self.owner.name)
        else:
            recv = self.lower_expr(expr.receiver)
        args = [self.lower_expr(a) for a in expr.args]

        target = recv.type_name if self.env.is_known(recv.type_name) else None
        owner, sig = None, None
        if target is not None:
            found = self.env.lookup_method(target, expr.name)
            if found is None:
                self.unresolved(expr, f"{target} has no method {expr.name}")
            owner, sig = found
        defs = self.result_var(dest, need)
        index = self.emit(
            StmtOp.CALL, expr.line, defs=defs, uses=[recv.var, *(a.var for a in args)], receiver=recv.var,
            args=[a.var for a in args], target_type=target, owner=owner, member=expr.name,
            signature=sig.signature if sig else None, is_static=recv.type_ref or bool(sig and sig.is_static),
        )
        self.call_sites.append(CallSite(method=self.qualified, index=index,
                                        static_target=f"{owner}.{expr.name}" if owner else None,
                                        receiver_type=target))
        return_type = sig.return_type if sig and sig.return_type != "void" else None
        return Operand(defs[0] if defs else None, return_type)

    def expr_New(self, expr: ast.New, dest, need) -> Operand:
        args = [self.lower_expr(a) for a in expr.args]
        target = expr.class_name if self.env.is_known(expr.class_name) else None
        ctor = self.env.types[target].method(INIT_MEMBER) if target else None
        defs = self.result_var(dest, True)
        index = self.emit(
            StmtOp.NEW, expr.line, defs=defs, uses=[a.var for a in args], args=[a.var for a in args],
            target_type=target, owner=target, member=INIT_MEMBER,
            signature=ctor.signature if ctor else f"{INIT_MEMBER}()",
        )
        self.call_sites.append(CallSite(method=self.qualified, index=index,
                                        static_target=f"{target}.{INIT_MEMBER}" if ctor else None,
                                        receiver_type=target))
        return Operand(defs[0], expr.class_name)

    def expr_Binary(self, expr: ast.Binary, dest, need) -> Operand:
        left = self.lower_expr(expr.left)
        right = self.lower_expr(expr.right)
        defs = self.result_var(dest, True)
        self.emit(StmtOp.COMPUTE, expr.line, defs=defs, uses=[left.var, right.var], member=expr.op)
        return Operand(defs[0], "boolean" if expr.op in _BOOL_OPS else left.type_name)

    def expr_Unary(self, expr: ast.Unary, dest, need) -> Operand:
        operand = self.lower_expr(expr.operand)
        defs = self.result_var(dest, True)
        self.emit(StmtOp.COMPUTE, expr.line, defs=defs, uses=[operand.var], member=expr.op)
        return Operand(defs[0], "boolean" if expr.op in _BOOL_OPS else operand.type_name)


# ===== 程序与框架 =====

def _collect_decls(units: list[ast.CompilationUnit], origin: Origin,
                   existing: dict[str, TypeDecl] | None = None) -> list[tuple[ast.CompilationUnit, ast.TypeNode, TypeDecl]]:
    taken = dict(existing or {})
    out = []
    for unit in units:
        for node in unit.types:
            if node.name in taken:
                raise DuplicateTypeError(f"type {node.name} declared twice ({taken[node.name].file}, {unit.file})")
            decl = type_decl_from_ast(node, origin, unit.file)
            taken[node.name] = decl
            out.append((unit, node, decl))
    return out


def lower(units: list[ast.CompilationUnit], framework: FrameworkModel, program: str = "program",
          entrypoints: list[str] | None = None) -> ProgramFacts:
    """把一个程序的全部编译单元降级为 ProgramFacts。

    Args:
        units: 程序的 AST。
        framework: 已加载的框架模型，用于名字解析。
        program: 程序标识。
        entrypoints: 入口方法（Class.method）；为空时取所有 static main。

    Raises:
        NameResolutionError: 未声明的变量、成员，或不存在的入口。
        DuplicateTypeError: 类型重名（含与框架重名）。
        NoEntrypointError: 没有指定入口且找不到 static main。
    """
    app = _collect_decls(units, Origin.APP, framework.type_map())
    env = TypeEnv([*framework.types, *(decl for _, _, decl in app)])

    methods: list[MethodFacts] = []
    call_sites: list[CallSite] = []
    for unit, node, _ in app:
        for method in node.methods:
            if method.body is None:
                continue
            lowerer = MethodLowerer(env, node, method, unit.file)
            methods.append(lowerer.lower())
            call_sites.extend(lowerer.call_sites)

    names = {m.name for m in methods}
    if entrypoints:
        missing = [e for e in entrypoints if e not in names]
        if missing:
            raise NameResolutionError(f"{program}: entrypoint(s) not found: {', '.join(missing)}")
        chosen = list(entrypoints)
    else:
        chosen = sorted(m.name for m in methods if m.is_static and m.name.endswith(".main"))
        if not chosen:
            raise NoEntrypointError(f"{program}: no entrypoint given and no static main method found")

    return ProgramFacts(program=program, types=[decl for _, _, decl in app], methods=methods,
                        entrypoints=chosen, call_sites=call_sites)


def load_framework(units: list[ast.CompilationUnit], name: str = "framework") -> FrameworkModel:
    """从框架源码构建 FrameworkModel，method_bodies 记录字段读写与 this 上的内部调用。"""
    fw = _collect_decls(units, Origin.FRAMEWORK)
    env = TypeEnv([decl for _, _, decl in fw])

    bodies = []
    for unit, node, _ in fw:
        for method in node.methods:
            if method.body is None:
                continue
            facts = MethodLowerer(env, node, method, unit.file).lower()
            accesses, calls = set(), set()
            for stmt in facts.statements:
                if stmt.op in (StmtOp.FIELD_READ, StmtOp.FIELD_WRITE) and stmt.owner is not None:
                    mode = AccessMode.READ if stmt.op == StmtOp.FIELD_READ else AccessMode.WRITE
                    accesses.add((f"{stmt.owner}.{stmt.member}", mode))
                elif stmt.op == StmtOp.CALL and stmt.owner is not None and (
                        stmt.receiver == THIS or (stmt.is_static and stmt.target_type == node.name)):
                    calls.add(f"{stmt.owner}.{stmt.member}")
            bodies.append(FrameworkMethodBody(
                method=facts.name,
                accesses=[FieldAccess(field=f, mode=m) for f, m in sorted(accesses, key=lambda a: (a[0], a[1].value))],
                calls=sorted(calls),
            ))
    return FrameworkModel(name=name, types=[decl for _, _, decl in fw], method_bodies=bodies)
