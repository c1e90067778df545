"""使用图之间的嵌入搜索（合并、上下文匹配与缺失检测共用）。

嵌入规则：start 映射到 start；客图节点 v 映射到宿主中未被占用、标签相同、
且前驱集合恰好等于 v 前驱像集的节点 u。于是嵌入的定义域总是包含 start
且对前驱封闭，即一个“上部”。
"""

from collections.abc import Callable, Iterable

import networkx as nx

from core.config import settings
from core.models.usage_graph import UsageGraph
from core.schemas.graph_schema import NodeRole

PredRule = Callable[[str, frozenset[str]], bool]


def guest_order(g: UsageGraph) -> list[str]:
    """确定性的拓扑序：start 最先，end 最后，其余按位置与 id。"""
    rank = {NodeRole.START: 0, NodeRole.API: 1, NodeRole.END: 2}

    def key(n):
        pos = g.position(n)
        return rank[g.role(n)], pos is None, pos or 0, n

    return list(nx.lexicographical_topological_sort(g.graph, key=key))


def exact_preds(host: UsageGraph) -> PredRule:
    def rule(u: str, image: frozenset[str]) -> bool:
        return frozenset(host.graph.predecessors(u)) == image
    return rule


def preds_with_hole(host: UsageGraph, hole: str) -> PredRule:
    """把 hole 当作已匹配：u 的前驱去掉 hole 后等于像集（空集记作 {start}）。"""
    def rule(u: str, image: frozenset[str]) -> bool:
        preds = frozenset(host.graph.predecessors(u)) - {hole}
        return (preds or frozenset({host.start})) == image
    return rule


class Embedder:
    """把客图（GRAAM、查询）嵌入宿主图（FSpec、GRAAM）。"""

    def __init__(self, guest: UsageGraph, host: UsageGraph, include: Iterable[str] | None = None,
                 pred_rule: PredRule | None = None, limit: int | None = None):
        self.guest = guest
        self.host = host
        self.order = [n for n in guest_order(guest) if n != guest.start]
        self.include = set(include) if include is not None else set(guest.graph.nodes)
        self.pred_rule = pred_rule or exact_preds(host)
        self.limit = settings.MERGE_CANDIDATE_LIMIT if limit is None else limit
        self.guest_preds = {v: list(guest.graph.predecessors(v)) for v in self.order}
        self.by_label: dict[str, list[str]] = {}
        for u in sorted(host.graph.nodes):
            if u != host.start:
                self.by_label.setdefault(host.label(u), []).append(u)
        self.results: dict[tuple, dict[str, str]] = {}

    def candidates(self, v: str, phi: dict[str, str], used: set[str]) -> list[str]:
        image = frozenset(phi[p] for p in self.guest_preds[v])
        return [u for u in self.by_label.get(self.guest.label(v), ())
                if u not in used and self.pred_rule(u, image)]

    def _search(self, i: int, phi: dict[str, str], used: set[str]):
        if len(self.results) >= self.limit:
            return
        if i == len(self.order):
            key = tuple(sorted(phi.items()))
            self.results.setdefault(key, dict(phi))
            return
        v = self.order[i]
        options = []
        if v in self.include and all(p in phi for p in self.guest_preds[v]):
            options = self.candidates(v, phi, used)
        if not options:
            self._search(i + 1, phi, used)
            return
        for u in options:
            phi[v] = u
            used.add(u)
            self._search(i + 1, phi, used)
            del phi[v]
            used.discard(u)

    def run(self) -> list[dict[str, str]]:
        self.results = {}
        self._search(0, {self.guest.start: self.host.start}, {self.host.start})
        return list(self.results.values())


def embeddings(guest: UsageGraph, host: UsageGraph, include: Iterable[str] | None = None,
               pred_rule: PredRule | None = None, limit: int | None = None) -> list[dict[str, str]]:
    """所有极大嵌入（guest 节点 -> host 节点），按大小降序、映射对升序。"""
    found = Embedder(guest, host, include, pred_rule, limit).run()
    return sorted(found, key=lambda phi: (-len(phi), sorted(phi.items())))


def region_frequency(host: UsageGraph, nodes: Iterable[str]) -> int:
    """宿主中两端都在 nodes 内的边的频次之和。"""
    region = set(nodes)
    return sum(host.graph.edges[u, v].get("frequency", 1)
               for u, v in host.graph.edges if u in region and v in region)
