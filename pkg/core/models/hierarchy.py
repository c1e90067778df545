"""类层次结构与“框架相关”判定。"""

from collections import deque
from collections.abc import Iterable

import networkx as nx

from core.exceptions import DuplicateTypeError, InheritanceCycleError, UnresolvedTypeError
from core.schemas.graph_schema import Relation
from core.schemas.program_schema import FrameworkModel, Origin, Statement, StmtOp, TypeDecl

_API_OPS = {StmtOp.NEW, StmtOp.CALL, StmtOp.FIELD_READ, StmtOp.FIELD_WRITE}


class ClassHierarchy:
    """subtype_of 的自反传递闭包，外加每个类型的来源（framework / app）。

    图中边为 子类型 -> 直接父类型，带 link 属性 extends|implements。
    """

    def __init__(self, graph: nx.DiGraph, types: dict[str, TypeDecl]):
        self.graph = graph
        self.types = types
        self._closure = {name: frozenset({name} | nx.descendants(graph, name)) for name in graph.nodes}

    def __contains__(self, name: str) -> bool:
        return name in self.types

    def subtype_of(self, sub: str, sup: str) -> bool:
        return sup in self._closure.get(sub, ())

    def supertypes(self, name: str) -> frozenset[str]:
        return self._closure[name]

    def subtypes(self, name: str) -> list[str]:
        return sorted(t for t, sups in self._closure.items() if name in sups)

    def pairs(self) -> set[tuple[str, str]]:
        return {(sub, sup) for sub, sups in self._closure.items() for sup in sups}

    def is_framework(self, name: str) -> bool:
        decl = self.types.get(name)
        return decl is not None and decl.origin == Origin.FRAMEWORK

    def direct_supertypes(self, name: str) -> list[str]:
        return self.types[name].supertypes

    def framework_supertype(self, name: str) -> str | None:
        """最近的框架父类型：广度优先，先 extends 后 implements，按声明顺序。"""
        if self.is_framework(name):
            return name
        seen = {name}
        queue = deque([name])
        while queue:
            current = queue.popleft()
            for sup in self.direct_supertypes(current):
                if sup in seen:
                    continue
                if self.is_framework(sup):
                    return sup
                seen.add(sup)
                queue.append(sup)
        return None

    def superclass_chain(self, name: str) -> list[str]:
        """name 及其 extends 链（只跟随第一个父类）。"""
        chain = [name]
        current = self.types[name]
        while current.extends and current.extends[0] in self.types and current.extends[0] not in chain:
            chain.append(current.extends[0])
            current = self.types[current.extends[0]]
        return chain


def build_class_hierarchy(framework: FrameworkModel, app_types: Iterable[TypeDecl]) -> ClassHierarchy:
    """合并框架与应用类型，计算 subtype_of 闭包。

    Raises:
        DuplicateTypeError: 类型名重复。
        UnresolvedTypeError: 父类型名未声明。
        InheritanceCycleError: 继承成环。
    """
    types: dict[str, TypeDecl] = {}
    for decl in [*framework.types, *app_types]:
        if decl.name in types:
            raise DuplicateTypeError(f"type {decl.name} declared twice ({types[decl.name].file}, {decl.file})")
        types[decl.name] = decl

    graph = nx.DiGraph()
    graph.add_nodes_from(sorted(types))
    for decl in types.values():
        for link, supers in (("extends", decl.extends), ("implements", decl.implements)):
            for sup in supers:
                if sup not in types:
                    raise UnresolvedTypeError(f"{decl.name} {link} undeclared type {sup}")
                graph.add_edge(decl.name, sup, link=link)

    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        names = " -> ".join(edge[0] for edge in cycle)
        raise InheritanceCycleError(f"inheritance cycle: {names} -> {cycle[0][0]}")

    return ClassHierarchy(graph, types)


def classify_statement(stmt: Statement, framework: FrameworkModel, ch: ClassHierarchy) -> Relation:
    """判定语句与框架的关系。

    Direct: 调用/实例化/访问框架类型（静态与非静态成员都算）。
    IndirectViaInheritance: 作用于继承或实现了框架类型的应用类。
    外部类型（target_type 为 None）以及非 API 语句返回 None 关系。

    Raises:
        UnresolvedTypeError: target_type 不在层次结构中。
    """
    if stmt.op not in _API_OPS or stmt.target_type is None:
        return Relation.NONE
    if stmt.target_type not in ch:
        raise UnresolvedTypeError(f"statement {stmt.index} targets unknown type {stmt.target_type}")
    if ch.is_framework(stmt.target_type):
        return Relation.DIRECT
    if any(ch.is_framework(sup) for sup in ch.supertypes(stmt.target_type)):
        return Relation.INDIRECT
    return Relation.NONE
