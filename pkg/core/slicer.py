"""SDG 切片与 Primary API Usage Graph 构建。"""

from collections import deque

import networkx as nx

from core import analysis_logger
from core.constant import END_LABEL, STATIC_RECEIVER_PREFIX
from core.exceptions import EmptyUsageError
from core.frontend.sdg import DATA, Sdg
from core.models.hierarchy import ClassHierarchy, classify_statement
from core.models.usage_graph import PrimaryApiUsageGraph
from core.schemas.graph_schema import ApiKind, ApiStatement, Relation, StatementLocation
from core.schemas.program_schema import FrameworkModel, StmtOp

_KIND_BY_OP = {
    StmtOp.NEW: ApiKind.OBJECT_INIT,
    StmtOp.CALL: ApiKind.METHOD_INVOKE,
    StmtOp.FIELD_READ: ApiKind.FIELD_READ,
    StmtOp.FIELD_WRITE: ApiKind.FIELD_WRITE,
}


def framework_related(sdg: Sdg, framework: FrameworkModel, ch: ClassHierarchy) -> dict[str, Relation]:
    """SDG 中所有框架相关语句及其关系。"""
    related = {}
    for node in sdg.graph.nodes:
        relation = classify_statement(sdg.stmt(node), framework, ch)
        if relation != Relation.NONE:
            related[node] = relation
    return related


def slice_sdg(sdg: Sdg, framework: FrameworkModel, ch: ClassHierarchy) -> Sdg:
    """保留框架相关语句，以及沿 Data∪Control 边能到达它们或被它们到达的语句。"""
    criterion = framework_related(sdg, framework, ch)
    keep = set(criterion)
    for node in criterion:
        keep |= nx.ancestors(sdg.graph, node)
        keep |= nx.descendants(sdg.graph, node)
    sliced = sdg.subgraph(keep)
    for node, relation in criterion.items():
        sliced.graph.nodes[node]["relation"] = relation
    analysis_logger.debug(f"{sdg.facts.program}: slice keeps {len(keep)}/{sdg.graph.number_of_nodes()} statements, "
                          f"{len(criterion)} framework-related")
    return sliced


def execution_order(sdg: Sdg, entrypoint: str) -> dict[str, tuple]:
    """入口上下文树的内联执行顺序：被调上下文的语句排在调用语句之前，每个上下文只在首次访问处展开。"""
    cg = sdg.call_graph
    prefixes: dict[str, tuple] = {}

    def visit(ctx: str, prefix: tuple):
        prefixes[ctx] = prefix
        for _, callee, data in sorted(cg.graph.out_edges(ctx, data=True), key=lambda e: (e[2]["index"], e[1])):
            if callee not in prefixes:
                visit(callee, prefix + (data["index"], 0))

    visit(cg.roots[entrypoint], ())
    order = {}
    for node, ctx in sdg.graph.nodes(data="context"):
        if ctx in prefixes:
            order[node] = prefixes[ctx] + (sdg.graph.nodes[node]["index"], 1)
    return order


def _api_statement(sdg: Sdg, node: str, relation: Relation, ch: ClassHierarchy) -> ApiStatement:
    stmt = sdg.stmt(node)
    data = sdg.graph.nodes[node]
    if stmt.op == StmtOp.NEW:
        member = stmt.member
    elif stmt.op == StmtOp.CALL:
        member = stmt.signature or f"{stmt.member}()"
    else:
        member = stmt.member
    return ApiStatement(
        id=node,
        kind=_KIND_BY_OP[stmt.op],
        target_type=ch.framework_supertype(stmt.target_type),
        declared_type=stmt.target_type,
        owner=stmt.owner,
        member=member,
        relation=relation,
        location=StatementLocation(file=data["file"], method=data["method"], index=stmt.index),
    )


class _ReceiverTracer:
    """沿数据边回溯接收者的值来源，找到产生它的 API 节点。"""

    def __init__(self, sdg: Sdg, api_nodes: set[str], scope: set[str]):
        self.sdg = sdg
        self.api_nodes = api_nodes
        self.scope = scope

    def origin(self, node: str) -> str | None:
        stmt = self.sdg.stmt(node)
        if stmt.op == StmtOp.NEW:
            return node
        if stmt.is_static and stmt.receiver is None:
            return f"{STATIC_RECEIVER_PREFIX}{stmt.target_type}>"
        if stmt.receiver is None:
            return None
        found = self._defs_of(node, stmt.receiver, set())
        # 多个来源时取执行位置最近的那个
        return max(found, key=lambda n: self.sdg.graph.nodes[n].get("order", ()), default=None)

    def _defs_of(self, node: str, var: str, seen: set) -> set[str]:
        result = set()
        for pred, _, data in self.sdg.graph.in_edges(node, data=True):
            if pred in self.scope and data["kind"] == DATA and data["binding"] is None and var in data["vars"]:
                result |= self._resolve(pred, seen)
        return result

    def _resolve(self, node: str, seen: set) -> set[str]:
        if node in seen:
            return set()
        seen.add(node)
        if node in self.api_nodes:
            return {node}
        stmt = self.sdg.stmt(node)
        if stmt.op == StmtOp.ASSIGN and stmt.uses:
            return self._defs_of(node, stmt.uses[0], seen)
        if stmt.op == StmtOp.PARAM:
            return self._bound(node, "param", seen)
        if stmt.op == StmtOp.CALL:
            out = set()
            for ret in self._bound_nodes(node, "return"):
                if ret not in seen and self.sdg.stmt(ret).uses:
                    seen.add(ret)
                    out |= self._defs_of(ret, self.sdg.stmt(ret).uses[0], seen)
            return out
        return set()

    def _bound_nodes(self, node: str, binding: str) -> list[str]:
        return [p for p, _, d in self.sdg.graph.in_edges(node, data=True)
                if p in self.scope and d["kind"] == DATA and d["binding"] == binding]

    def _bound(self, node: str, binding: str, seen: set) -> set[str]:
        out = set()
        for pred in self._bound_nodes(node, binding):
            out |= self._resolve(pred, seen)
        return out


def build_primary_graph(sliced: Sdg, entrypoint: str, ch: ClassHierarchy,
                        graph_id: str | None = None) -> PrimaryApiUsageGraph:
    """把切片收缩为只含框架语句的 Primary API Usage Graph。

    - 节点：入口可达上下文中的框架相关语句，按执行顺序编号 a000, a001, ...
    - E_d：u 的数据经由（可能被删掉的）非框架语句流到 v
    - E_s：执行顺序上的覆盖关系，即 start -> a000 -> ... -> end 一条链

    Raises:
        EmptyUsageError: 没有框架相关语句。
    """
    sdg = sliced
    facts = sdg.facts
    order = execution_order(sdg, entrypoint)
    scope = set(order)
    for node, key in order.items():
        sdg.graph.nodes[node]["order"] = key

    related = [n for n in scope if sdg.graph.nodes[n].get("relation", Relation.NONE) != Relation.NONE]
    if not related:
        raise EmptyUsageError(f"{facts.program}: entrypoint {entrypoint} uses no framework API")
    related.sort(key=lambda n: order[n])
    ids = {n: f"a{pos:03d}" for pos, n in enumerate(related)}
    api_set = set(related)

    g = PrimaryApiUsageGraph(graph_id or f"{facts.program}__{entrypoint}", facts.program, entrypoint)
    tracer = _ReceiverTracer(sdg, api_set, scope)
    for pos, node in enumerate(related):
        api = _api_statement(sdg, node, sdg.graph.nodes[node]["relation"], ch)
        receiver = tracer.origin(node)
        if receiver in ids:
            receiver = ids[receiver]
        g.add_api(ids[node], api, position=pos, receiver=receiver)

    # 数据边收缩：穿过非框架节点做 BFS，遇到框架节点即停
    for node in related:
        queue = deque([node])
        seen = {node}
        while queue:
            current = queue.popleft()
            for _, succ, data in sdg.graph.out_edges(current, data=True):
                if data["kind"] != DATA or succ not in scope or succ in seen:
                    continue
                seen.add(succ)
                if succ in api_set:
                    # 逆着执行顺序的边（共享上下文、递归）丢弃
                    if order[succ] > order[node]:
                        g.add_data(ids[node], ids[succ])
                else:
                    queue.append(succ)

    end = g.add_end(END_LABEL)
    chain = [g.start, *(ids[n] for n in related), end]
    for u, v in zip(chain, chain[1:]):
        g.add_sequence(u, v)

    g.validate()
    analysis_logger.info(f"{g.graph_id}: {len(related)} API nodes, {len(g.data_edges())} data edges")
    return g
