"""1-CFA 调用图。

上下文 = (方法, 调用点)，调用点写作 Caller.method#index，入口方法的上下文调用点为 root。
同一方法被 k 个不同调用点调用，就有 k 个上下文；递归调用落回该调用点已有的上下文。
动态分派用 CHA：接收者静态类型的所有子类型沿父类链解析出的实现都算候选。
"""

from collections import deque

import networkx as nx

from core.constant import INIT_MEMBER, ROOT_SITE
from core.exceptions import NoEntrypointError
from core.models.hierarchy import ClassHierarchy
from core.schemas.program_schema import MethodFacts, ProgramFacts, StmtOp


def context_id(method: str, site: str = ROOT_SITE) -> str:
    return f"{method}@{site}"


def site_id(method: str, index: int) -> str:
    return f"{method}#{index}"


class CallGraph:
    """节点是上下文 id（属性 method, site），边 caller -> callee 带 site 与 index 属性。"""

    def __init__(self, facts: ProgramFacts):
        self.facts = facts
        self.graph = nx.DiGraph()
        self.roots: dict[str, str] = {}

    def add_context(self, method: str, site: str) -> str:
        ctx = context_id(method, site)
        if ctx not in self.graph:
            self.graph.add_node(ctx, method=method, site=site)
        return ctx

    def method_of(self, ctx: str) -> str:
        return self.graph.nodes[ctx]["method"]

    def contexts(self) -> list[str]:
        return sorted(self.graph.nodes)

    def contexts_of(self, method: str) -> list[str]:
        return sorted(c for c, m in self.graph.nodes(data="method") if m == method)

    def callees(self, ctx: str, index: int | None = None) -> list[str]:
        """ctx 中（某条语句）调用的上下文，按 (语句序号, id) 排序。"""
        out = [(d["index"], callee) for _, callee, d in self.graph.out_edges(ctx, data=True)
               if index is None or d["index"] == index]
        return [callee for _, callee in sorted(out)]

    def reachable(self, entrypoint: str) -> set[str]:
        root = self.roots[entrypoint]
        return {root} | nx.descendants(self.graph, root)


def _implementations(method_name: str, receiver_type: str, ch: ClassHierarchy,
                     methods: dict[str, MethodFacts]) -> list[str]:
    found = []
    for sub in ch.subtypes(receiver_type):
        for cls in ch.superclass_chain(sub):
            qualified = f"{cls}.{method_name}"
            decl = ch.types[cls].method(method_name)
            if decl is not None and decl.has_body:
                if qualified in methods:
                    found.append(qualified)
                break
    return sorted(set(found))


def resolve_targets(facts: ProgramFacts, ch: ClassHierarchy) -> dict[str, list[str]]:
    """每个调用点可能调用的应用方法（有方法体的）。"""
    methods = facts.method_map()
    targets: dict[str, list[str]] = {}
    for cs in facts.call_sites:
        if cs.static_target is None:
            continue
        owner, name = cs.static_target.rsplit(".", 1)
        stmt = methods[cs.method].statements[cs.index]
        if name == INIT_MEMBER or stmt.is_static:
            candidates = [cs.static_target] if cs.static_target in methods else []
        else:
            candidates = _implementations(name, cs.receiver_type or owner, ch, methods)
        if candidates:
            targets[cs.site_id] = candidates
    return targets


def build_call_graph(facts: ProgramFacts, ch: ClassHierarchy) -> CallGraph:
    """从入口出发构建 1-CFA 调用图。

    Raises:
        NoEntrypointError: facts 中没有入口。
    """
    if not facts.entrypoints:
        raise NoEntrypointError(f"{facts.program}: no entrypoints")
    methods = facts.method_map()
    targets = resolve_targets(facts, ch)

    cg = CallGraph(facts)
    queue = deque()
    for entry in facts.entrypoints:
        root = cg.add_context(entry, ROOT_SITE)
        cg.roots[entry] = root
        queue.append(root)

    visited = set()
    while queue:
        ctx = queue.popleft()
        if ctx in visited:
            continue
        visited.add(ctx)
        method = methods[cg.method_of(ctx)]
        for stmt in method.statements:
            if stmt.op not in (StmtOp.CALL, StmtOp.NEW):
                continue
            site = site_id(method.name, stmt.index)
            for callee in targets.get(site, ()):
                callee_ctx = cg.add_context(callee, site)
                cg.graph.add_edge(ctx, callee_ctx, site=site, index=stmt.index)
                queue.append(callee_ctx)
    return cg
