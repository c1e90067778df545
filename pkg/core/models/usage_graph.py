"""使用图模型：PrimaryApiUsageGraph、Graam、FSpec。

三者共享节点划分（一个 start、若干 end、API 节点）与 JSON 结构，
区别在于边：primary 有 sequence/data 两类边，Graam 只有 order 边，
FSpec 在 order 边上额外记录 frequency。
"""

import networkx as nx

from core.constant import START_ID
from core.exceptions import GraphInvariantError
from core.schemas.graph_schema import (ApiStatement, EdgeKind, EdgeOrigin, EdgeSchema, GraphKind, NodeRole,
                                       NodeSchema, UsageGraphSchema, node_label)


class UsageGraph:
    """使用图基类。节点属性：role, label, api, position, receiver。"""

    graph_kind: GraphKind
    multigraph = False

    def __init__(self, graph_id: str, program: str = "", entrypoint: str = ""):
        self.graph_id = graph_id
        self.program = program
        self.entrypoint = entrypoint
        self.graph = nx.MultiDiGraph() if self.multigraph else nx.DiGraph()
        self.graph.add_node(START_ID, role=NodeRole.START, label=node_label(NodeRole.START, None),
                            api=None, position=None, receiver=None)

    # ===== 构造 =====

    def add_api(self, node_id: str, api: ApiStatement, position: int | None = None,
                receiver: str | None = None) -> str:
        self.graph.add_node(node_id, role=NodeRole.API, label=api.label, api=api,
                            position=position, receiver=receiver)
        return node_id

    def add_end(self, node_id: str) -> str:
        self.graph.add_node(node_id, role=NodeRole.END, label=node_label(NodeRole.END, None),
                            api=None, position=None, receiver=None)
        return node_id

    # ===== 查询 =====

    @property
    def start(self) -> str:
        return START_ID

    def role(self, node: str) -> NodeRole:
        return self.graph.nodes[node]["role"]

    def label(self, node: str) -> str:
        return self.graph.nodes[node]["label"]

    def api(self, node: str) -> ApiStatement | None:
        return self.graph.nodes[node]["api"]

    def position(self, node: str) -> int | None:
        return self.graph.nodes[node]["position"]

    def receiver(self, node: str) -> str | None:
        return self.graph.nodes[node]["receiver"]

    def api_nodes(self) -> list[str]:
        """API 节点，按执行位置（无位置时按 id）排序。"""
        nodes = [n for n, r in self.graph.nodes(data="role") if r == NodeRole.API]
        return sorted(nodes, key=lambda n: (self.position(n) is None, self.position(n) or 0, n))

    def end_nodes(self) -> list[str]:
        return sorted(n for n, r in self.graph.nodes(data="role") if r == NodeRole.END)

    def labels(self) -> list[str]:
        return sorted(self.label(n) for n in self.api_nodes())

    def __len__(self) -> int:
        return self.graph.number_of_nodes()

    # ===== 校验 =====

    def validate(self):
        """检查节点划分与可达性不变量，失败抛 GraphInvariantError。"""
        g = self.graph
        starts = [n for n, r in g.nodes(data="role") if r == NodeRole.START]
        if starts != [START_ID]:
            self._fail(f"expected exactly one start node, found {starts}")
        if g.in_degree(START_ID) != 0:
            self._fail("start node has incoming edges")
        ends = self.end_nodes()
        for end in ends:
            if g.out_degree(end) != 0:
                self._fail(f"end node {end} has outgoing edges")
        if not ends:
            if g.number_of_nodes() == 1 and self._allow_empty():
                return
            self._fail("no end node")
        reachable = nx.descendants(g, START_ID) | {START_ID}
        coreachable = set(ends)
        for end in ends:
            coreachable |= nx.ancestors(g, end)
        for node in g.nodes:
            if node not in reachable:
                self._fail(f"node {node} unreachable from start")
            if node not in coreachable:
                self._fail(f"node {node} reaches no end node")
        self._validate_edges()

    def _allow_empty(self) -> bool:
        return False

    def _validate_edges(self):
        pass

    def _fail(self, message: str):
        raise GraphInvariantError(f"{self.graph_kind.value} {self.graph_id}: {message}")

    # ===== 序列化 =====

    def _edge_schemas(self) -> list[EdgeSchema]:
        raise NotImplementedError

    def to_schema(self) -> UsageGraphSchema:
        nodes = [
            NodeSchema(id=n, role=d["role"], api=d["api"], position=d["position"], receiver=d["receiver"])
            for n, d in sorted(self.graph.nodes(data=True))
        ]
        edges = sorted(self._edge_schemas(), key=lambda e: (e.source, e.target, e.kind.value))
        return UsageGraphSchema(graph_kind=self.graph_kind, graph_id=self.graph_id, program=self.program,
                                entrypoint=self.entrypoint, nodes=nodes, edges=edges)

    @classmethod
    def from_schema(cls, schema: UsageGraphSchema):
        if schema.graph_kind != cls.graph_kind:
            raise GraphInvariantError(f"{schema.graph_id}: expected a {cls.graph_kind.value} graph, "
                                      f"got {schema.graph_kind.value}")
        obj = cls(schema.graph_id, schema.program, schema.entrypoint)
        for node in schema.nodes:
            if node.role == NodeRole.API:
                obj.add_api(node.id, node.api, node.position, node.receiver)
            elif node.role == NodeRole.END:
                obj.add_end(node.id)
        for edge in schema.edges:
            obj._load_edge(edge)
        return obj

    def _load_edge(self, edge: EdgeSchema):
        raise NotImplementedError

    def copy(self, graph_id: str | None = None):
        clone = self.__class__(graph_id or self.graph_id, self.program, self.entrypoint)
        clone.graph = self.graph.copy()
        return clone


class PrimaryApiUsageGraph(UsageGraph):
    """切片后只含框架语句的图，边分为 sequence 与 data 两类（以 key 区分）。"""

    graph_kind = GraphKind.PRIMARY
    multigraph = True

    def add_sequence(self, u: str, v: str):
        self.graph.add_edge(u, v, key=EdgeKind.SEQUENCE)

    def add_data(self, u: str, v: str):
        self.graph.add_edge(u, v, key=EdgeKind.DATA)

    def sequence_edges(self) -> list[tuple[str, str]]:
        return sorted((u, v) for u, v, k in self.graph.edges(keys=True) if k == EdgeKind.SEQUENCE)

    def data_edges(self) -> list[tuple[str, str]]:
        return sorted((u, v) for u, v, k in self.graph.edges(keys=True) if k == EdgeKind.DATA)

    def _validate_edges(self):
        for u, v, k in self.graph.edges(keys=True):
            ru, rv = self.role(u), self.role(v)
            if k == EdgeKind.DATA and not (ru == NodeRole.API and rv == NodeRole.API):
                self._fail(f"data edge {u}->{v} touches a non-API node")
            if k == EdgeKind.SEQUENCE and (ru == NodeRole.END or rv == NodeRole.START
                                           or (ru == NodeRole.START and rv == NodeRole.END)):
                self._fail(f"sequence edge {u}->{v} violates the node partition")

    def _edge_schemas(self) -> list[EdgeSchema]:
        return [EdgeSchema(source=u, target=v, kind=k) for u, v, k in self.graph.edges(keys=True)]

    def _load_edge(self, edge: EdgeSchema):
        self.graph.add_edge(edge.source, edge.target, key=edge.kind)


class Graam(UsageGraph):
    """API 顺序约束图。边属性 origin 记录来源（data / ifd / start / end）。"""

    graph_kind = GraphKind.GRAAM

    def add_order(self, u: str, v: str, origin: EdgeOrigin, frequency: int | None = None):
        if self.graph.has_edge(u, v):
            return
        attrs = {"origin": origin}
        if frequency is not None:
            attrs["frequency"] = frequency
        self.graph.add_edge(u, v, **attrs)

    def frequency(self, u: str, v: str) -> int:
        return self.graph.edges[u, v].get("frequency", 1)

    def predecessors(self, node: str) -> frozenset[str]:
        return frozenset(self.graph.predecessors(node))

    def _validate_edges(self):
        if not nx.is_directed_acyclic_graph(self.graph):
            self._fail("graph contains a cycle")

    def _edge_schemas(self) -> list[EdgeSchema]:
        return [
            EdgeSchema(source=u, target=v, kind=EdgeKind.ORDER, origin=d.get("origin"), frequency=d.get("frequency"))
            for u, v, d in self.graph.edges(data=True)
        ]

    def _load_edge(self, edge: EdgeSchema):
        self.add_order(edge.source, edge.target, edge.origin or EdgeOrigin.DATA, edge.frequency)


class FSpec(Graam):
    """合并后的规约模型：每条边带 frequency（正整数）。"""

    graph_kind = GraphKind.FSPEC

    def __init__(self, graph_id: str = "fspec", program: str = "", entrypoint: str = ""):
        super().__init__(graph_id, program, entrypoint)
        self._counter = 0

    def new_node_id(self) -> str:
        self._counter += 1
        return f"n{self._counter:04d}"

    def add_order(self, u: str, v: str, origin: EdgeOrigin, frequency: int | None = None):
        super().add_order(u, v, origin, frequency if frequency is not None else 1)

    def increment(self, u: str, v: str, amount: int = 1):
        self.graph.edges[u, v]["frequency"] += amount

    def is_empty(self) -> bool:
        return self.graph.number_of_nodes() == 1

    def _allow_empty(self) -> bool:
        return True

    def _validate_edges(self):
        super()._validate_edges()
        for u, v, f in self.graph.edges(data="frequency"):
            if f is None or f < 1:
                self._fail(f"edge {u}->{v} has frequency {f}")

    @classmethod
    def from_schema(cls, schema: UsageGraphSchema):
        obj = super().from_schema(schema)
        numbered = [int(n[1:]) for n in obj.graph.nodes if n != START_ID and n[1:].isdigit()]
        obj._counter = max(numbered, default=0)
        return obj

    def copy(self, graph_id: str | None = None):
        clone = super().copy(graph_id)
        clone._counter = self._counter
        return clone
