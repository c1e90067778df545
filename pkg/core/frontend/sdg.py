"""系统依赖图（SDG）：语句按上下文实例化，边为数据依赖与控制依赖。

节点 id 为 `context/index`。数据边属性 var 记录承载数据的变量；
过程间数据边另带 binding=param|return。
"""

import networkx as nx

from core.constant import INIT_MEMBER, THIS
from core.frontend.callgraph import CallGraph
from core.schemas.program_schema import ProgramFacts, Statement, StmtOp

DATA = "data"
CONTROL = "control"


def node_id(ctx: str, index: int) -> str:
    return f"{ctx}/{index}"


class Sdg:
    def __init__(self, call_graph: CallGraph, facts: ProgramFacts, graph: nx.DiGraph | None = None):
        self.call_graph = call_graph
        self.facts = facts
        self.graph = graph if graph is not None else nx.DiGraph()

    def stmt(self, node: str) -> Statement:
        return self.graph.nodes[node]["stmt"]

    def context(self, node: str) -> str:
        return self.graph.nodes[node]["context"]

    def add_edge(self, u: str, v: str, kind: str, var: str | None = None, binding: str | None = None):
        if self.graph.has_edge(u, v):
            data = self.graph.edges[u, v]
            if var:
                data["vars"] = tuple(sorted(set(data["vars"]) | {var}))
            return
        self.graph.add_edge(u, v, kind=kind, vars=(var,) if var else (), binding=binding)

    def edges_of_kind(self, kind: str) -> list[tuple[str, str]]:
        return sorted((u, v) for u, v, k in self.graph.edges(data="kind") if k == kind)

    def data_graph(self) -> nx.DiGraph:
        return self.graph.edge_subgraph(self.edges_of_kind(DATA))

    def subgraph(self, nodes) -> "Sdg":
        return Sdg(self.call_graph, self.facts, self.graph.subgraph(nodes).copy())

    def to_dict(self) -> dict:
        """稳定的可序列化形式，节点与边均排序。"""
        nodes = [
            {"id": n, "context": d["context"], "method": d["method"], "index": d["index"], "op": d["stmt"].op.value}
            for n, d in sorted(self.graph.nodes(data=True))
        ]
        edges = [
            {"source": u, "target": v, "kind": d["kind"], "vars": list(d["vars"]), "binding": d["binding"]}
            for u, v, d in sorted(self.graph.edges(data=True), key=lambda e: (e[0], e[1]))
        ]
        return {"program": self.facts.program, "nodes": nodes, "edges": edges}


def build_sdg(cg: CallGraph, facts: ProgramFacts) -> Sdg:
    """为调用图中的每个上下文实例化语句并连边。"""
    methods = facts.method_map()
    sdg = Sdg(cg, facts)

    for ctx in cg.contexts():
        method = methods[cg.method_of(ctx)]
        for stmt in method.statements:
            sdg.graph.add_node(node_id(ctx, stmt.index), context=ctx, method=method.name, index=stmt.index,
                               stmt=stmt, file=method.file)

    for ctx in cg.contexts():
        method = methods[cg.method_of(ctx)]
        # 过程内数据边
        for du in method.def_use:
            sdg.add_edge(node_id(ctx, du.def_index), node_id(ctx, du.use_index), DATA, var=du.var)
        # 控制边
        for stmt in method.statements:
            if stmt.controlled_by is not None:
                sdg.add_edge(node_id(ctx, stmt.controlled_by), node_id(ctx, stmt.index), CONTROL)

        reaching = {}
        for du in method.def_use:
            reaching.setdefault((du.use_index, du.var), []).append(du.def_index)

        # 过程间：实参 -> 形参，return -> 调用结果
        for stmt in method.statements:
            if stmt.op not in (StmtOp.CALL, StmtOp.NEW):
                continue
            call_node = node_id(ctx, stmt.index)
            for callee_ctx in cg.callees(ctx, stmt.index):
                callee = methods[cg.method_of(callee_ctx)]
                actuals = _actuals(stmt, callee.params)
                for pos, (formal, actual) in enumerate(zip(callee.params, actuals)):
                    param_node = node_id(callee_ctx, pos)
                    if stmt.op == StmtOp.NEW and formal == THIS:
                        sdg.add_edge(call_node, param_node, DATA, var=formal, binding="param")
                        continue
                    if actual is None:
                        continue
                    for d in reaching.get((stmt.index, actual), ()):
                        sdg.add_edge(node_id(ctx, d), param_node, DATA, var=formal, binding="param")
                for ret in callee.statements:
                    if ret.op == StmtOp.RETURN and ret.uses and stmt.defs and stmt.member != INIT_MEMBER:
                        sdg.add_edge(node_id(callee_ctx, ret.index), call_node, DATA, var=stmt.defs[0],
                                     binding="return")
    return sdg


def _actuals(stmt: Statement, formals: list[str]) -> list[str | None]:
    """按形参顺序排列实参变量；实例方法的首个形参 this 绑定接收者。"""
    if formals and formals[0] == THIS:
        return [stmt.receiver, *stmt.args]
    return list(stmt.args)
