"""FSpec 推断：把可靠的 GRAAM 逐个保守地合并进规约模型。

只合并“上部”（含 start、对前驱封闭的子图），未匹配的剩余部分整体嫁接：
新节点的入边来自其在 GRAAM 中全部前驱的像。这样每个 FSpec 节点的祖先
区域都与引入它的那个 GRAAM 中的祖先区域同构，模型里不会出现训练数据中
不存在的交叉路径。
"""

from core import train_logger
from core.canonical import canonical_form
from core.config import settings
from core.matching import embeddings, guest_order
from core.models.usage_graph import FSpec, Graam
from core.schemas.graph_schema import EdgeOrigin, NodeRole
from core.schemas.result_schema import CurveRow, LearningCurve, MergeCandidate, Usage


def _guest_form(g: Graam, nodes: list[str]) -> str:
    return canonical_form(g.graph.subgraph(nodes))


def find_mergeable(fspec: FSpec, g: Graam, limit: int | None = None) -> list[MergeCandidate]:
    """所有极大的可合并上部对，按大小降序、客侧规范形式、映射对排序。"""
    found = embeddings(g, fspec, limit=limit)
    candidates = [
        MergeCandidate(sub1=sorted(phi.values()), sub2=sorted(phi), bijection=phi, size=len(phi))
        for phi in found
    ]
    if len(candidates) > 1:
        top = candidates[0].size
        forms = {tuple(c.sub2): _guest_form(g, c.sub2) for c in candidates if c.size == top}
        candidates.sort(key=lambda c: (-c.size, forms.get(tuple(c.sub2), ""), sorted(c.bijection.items())))
    return candidates


def merge(fspec: FSpec, g: Graam, candidate: MergeCandidate | None = None) -> FSpec:
    """把 g 合并进 fspec 的副本。

    - 匹配到的边频次加上 g 中对应边的频次
    - 未匹配的节点按拓扑序嫁接，入边来自全部前驱的像，频次取 g 中的边频次
    """
    if candidate is None:
        ranked = find_mergeable(fspec, g)
        candidate = ranked[0] if ranked else MergeCandidate(sub1=[fspec.start], sub2=[g.start],
                                                            bijection={g.start: fspec.start}, size=1)
    out = fspec.copy()
    phi = dict(candidate.bijection)

    for u, v in g.graph.edges:
        if u in phi and v in phi:
            out.increment(phi[u], phi[v], g.frequency(u, v))

    grafted = 0
    for v in guest_order(g):
        if v in phi:
            continue
        node = out.new_node_id()
        if g.role(v) == NodeRole.END:
            out.add_end(node)
        else:
            out.add_api(node, g.api(v))
        phi[v] = node
        grafted += 1
        for p in sorted(g.graph.predecessors(v)):
            origin = g.graph.edges[p, v].get("origin", EdgeOrigin.DATA)
            out.add_order(phi[p], node, origin, g.frequency(p, v))

    out.validate()
    train_logger.bind(graph=g.graph_id).debug(f"merged: {candidate.size} nodes matched, {grafted} grafted")
    return out


def train(graams: list[Graam], sort: bool = True) -> tuple[FSpec, LearningCurve]:
    """依次合并训练 GRAAM；默认按节点数降序、id 升序。"""
    ordered = sorted(graams, key=lambda g: (-len(g), g.graph_id)) if sort else list(graams)
    fspec = FSpec()
    rows, cumulative = [], 0
    for k, g in enumerate(ordered, start=1):
        fspec = merge(fspec, g)
        cumulative += len(g)
        rows.append(CurveRow(k=k, cum_graam_nodes=cumulative, fspec_nodes=len(fspec),
                             fspec_edges=fspec.graph.number_of_edges()))
    train_logger.info(f"trained on {len(ordered)} graams: fspec has {len(fspec)} nodes, "
                      f"{fspec.graph.number_of_edges()} edges")
    return fspec, LearningCurve(rows=rows)


def saturation_point(curve: LearningCurve, threshold: float | None = None) -> int:
    """fspec_nodes 首次达到 threshold × 最终节点数时的 k。"""
    threshold = settings.SATURATION_THRESHOLD if threshold is None else threshold
    if not curve.rows:
        raise ValueError("learning curve is empty")
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    final = curve.rows[-1].fspec_nodes
    return next(row.k for row in curve.rows if row.fspec_nodes >= threshold * final)


def enumerate_usages(fspec: FSpec, limit: int = 200) -> list[Usage]:
    """FSpec 中 start 到 end 的全部路径（每条都是一种正确用法）及其瓶颈频次。"""
    usages = []
    ends = set(fspec.end_nodes())

    def walk(path: list[str], bottleneck: int | None):
        if len(usages) >= limit:
            return
        tail = path[-1]
        if tail in ends:
            inner = path[1:-1]
            usages.append(Usage(nodes=tuple(inner), labels=tuple(fspec.label(n) for n in inner),
                                frequency=bottleneck or 0))
            return
        for succ in sorted(fspec.graph.successors(tail)):
            freq = fspec.frequency(tail, succ)
            walk(path + [succ], freq if bottleneck is None else min(bottleneck, freq))

    if not fspec.is_empty():
        walk([fspec.start], None)
    return usages

