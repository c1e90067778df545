"""带标签有向图的规范形式与语义等价判定。

规范形式：按标签着色后做颜色精化，再对非单元素的颜色类逐个个体化搜索，
取字典序最小的叶子编码。结构孪生节点（前驱集与后继集都相同）只展开一个。
"""

import json
from collections.abc import Callable, Hashable

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher

from core.config import settings
from core.exceptions import SizeLimitExceededError
from core.models.usage_graph import PrimaryApiUsageGraph, UsageGraph
from core.schemas.graph_schema import EdgeOrigin, NodeRole

Encoding = tuple[tuple[str, ...], tuple[tuple[int, int, Hashable], ...]]


class _Refiner:
    def __init__(self, G: nx.DiGraph, node_label: Callable, edge_label: Callable):
        self.nodes = list(G.nodes)
        self.labels = {v: node_label(v) for v in self.nodes}
        self.preds = {v: list(G.predecessors(v)) for v in self.nodes}
        self.succs = {v: list(G.successors(v)) for v in self.nodes}
        self.elabel = {(u, v): edge_label(u, v) for u, v in G.edges}
        self.best: Encoding | None = None

    def initial(self) -> dict:
        ranks = {label: i for i, label in enumerate(sorted(set(self.labels.values())))}
        return {v: ranks[self.labels[v]] for v in self.nodes}

    def refine(self, colours: dict) -> dict:
        while True:
            sigs = {
                v: (colours[v],
                    tuple(sorted((self.elabel[(u, v)], colours[u]) for u in self.preds[v])),
                    tuple(sorted((self.elabel[(v, w)], colours[w]) for w in self.succs[v])))
                for v in self.nodes
            }
            ranks = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
            refined = {v: ranks[sigs[v]] for v in self.nodes}
            if len(ranks) == len(set(colours.values())):
                return refined
            colours = refined

    def leaf(self, colours: dict) -> Encoding:
        order = sorted(self.nodes, key=colours.__getitem__)
        index = {v: i for i, v in enumerate(order)}
        labels = tuple(self.labels[v] for v in order)
        edges = tuple(sorted((index[u], index[v], el) for (u, v), el in self.elabel.items()))
        return labels, edges

    def twins(self, cell: list) -> list:
        """同一颜色类中去掉结构孪生，只留每组的第一个。"""
        seen, reps = set(), []
        for v in cell:
            key = (frozenset((u, self.elabel[(u, v)]) for u in self.preds[v]),
                   frozenset((w, self.elabel[(v, w)]) for w in self.succs[v]))
            if key not in seen:
                seen.add(key)
                reps.append(v)
        return reps

    def search(self, colours: dict):
        colours = self.refine(colours)
        cells: dict[int, list] = {}
        for v in self.nodes:
            cells.setdefault(colours[v], []).append(v)
        target = next((cells[c] for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            encoding = self.leaf(colours)
            if self.best is None or encoding < self.best:
                self.best = encoding
            return
        for v in self.twins(sorted(target, key=str)):
            self.search({x: 2 * c + (0 if x == v else 1) for x, c in colours.items()})


def canonical_encoding(G: nx.DiGraph, node_label: Callable | None = None,
                       edge_label: Callable | None = None) -> Encoding:
    """G 的规范编码；两图同构（标签一致）当且仅当编码相等。"""
    node_label = node_label or (lambda v: G.nodes[v].get("label", ""))
    edge_label = edge_label or (lambda u, v: 0)
    refiner = _Refiner(G, node_label, edge_label)
    if not refiner.nodes:
        return (), ()
    refiner.search(refiner.initial())
    return refiner.best


def canonical_form(g: UsageGraph | nx.DiGraph, with_frequency: bool = False, limit: int | None = None) -> str:
    """规范形式的 JSON 字符串，可直接比较与序列化。

    Raises:
        SizeLimitExceededError: 节点数超过 CANONICAL_NODE_LIMIT。
    """
    G = g.graph if isinstance(g, UsageGraph) else g
    limit = settings.CANONICAL_NODE_LIMIT if limit is None else limit
    if G.number_of_nodes() > limit:
        raise SizeLimitExceededError(f"canonical form limited to {limit} nodes, graph has {G.number_of_nodes()}")
    edge_label = (lambda u, v: G.edges[u, v].get("frequency", 1)) if with_frequency else None
    labels, edges = canonical_encoding(G, edge_label=edge_label)
    return json.dumps({"labels": list(labels), "edges": [list(e) for e in edges]},
                      separators=(",", ":"), ensure_ascii=False)


def data_subgraph(g: UsageGraph) -> nx.DiGraph:
    """只含 API 节点与数据依赖边的子图。"""
    sub = nx.DiGraph()
    for node in g.api_nodes():
        sub.add_node(node, label=g.label(node))
    if isinstance(g, PrimaryApiUsageGraph):
        edges = g.data_edges()
    else:
        edges = [(u, v) for u, v, o in g.graph.edges(data="origin") if o == EdgeOrigin.DATA]
    for u, v in edges:
        if g.role(u) == NodeRole.API and g.role(v) == NodeRole.API:
            sub.add_edge(u, v)
    return sub


def equivalent(a: UsageGraph, b: UsageGraph) -> bool:
    """两组 API 语义等价：存在保持标签的双射，且是数据依赖子图间的同构。"""
    ga, gb = data_subgraph(a), data_subgraph(b)
    if sorted(nx.get_node_attributes(ga, "label").values()) != sorted(nx.get_node_attributes(gb, "label").values()):
        return False
    return DiGraphMatcher(ga, gb, node_match=lambda x, y: x["label"] == y["label"]).is_isomorphic()
