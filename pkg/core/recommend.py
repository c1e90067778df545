"""基于 FSpec 的推荐：下一个 API、缺失的 API、误用检测与修复。

所有查询都先把查询 GRAAM 嵌入 FSpec（见 core.matching），再在匹配区域的
边界（frontier）上取候选；分数都来自 FSpec 边上的频次。
"""

import networkx as nx

from core import analysis_logger
from core.exceptions import NoMatchError, NothingMissingError
from core.graam import swap_nodes
from core.ifd import IfdModel, check_violations
from core.matching import embeddings, guest_order, preds_with_hole, region_frequency
from core.models.usage_graph import FSpec, Graam
from core.schemas.graph_schema import ApiRef, NodeRole
from core.schemas.result_schema import Action, ContextMatch, Misuse, Recommendation


def _best(fspec: FSpec, found: list[dict[str, str]]) -> dict[str, str] | None:
    if not found:
        return None
    return min(found, key=lambda phi: (-len(phi), -region_frequency(fspec, phi.values()), sorted(phi.items())))


def frontier(fspec: FSpec, image: set[str]) -> list[str]:
    """区域外、前驱全在区域内的节点；优先保留能通向“祖先覆盖整个区域”的 end 的那些。"""
    outside = [u for u in sorted(fspec.graph.nodes)
               if u not in image and u != fspec.start and set(fspec.graph.predecessors(u)) <= image]
    under = set()
    for end in fspec.end_nodes():
        region = nx.ancestors(fspec.graph, end) | {end}
        if image <= region:
            under |= region
    restricted = [u for u in outside if u in under]
    return restricted or outside


def match_context(fspec: FSpec, partial: Graam) -> ContextMatch:
    """查询（不含 end）在 FSpec 中节点最多的嵌入，平局取区域频次高者。

    Raises:
        NoMatchError: 只有 start 能匹配。
    """
    include = [n for n in partial.graph.nodes if partial.role(n) != NodeRole.END]
    phi = _best(fspec, embeddings(partial, fspec, include=include))
    if phi is None or len(phi) <= 1:
        raise NoMatchError(f"{partial.graph_id}: no API of the query matches the model")
    image = set(phi.values())
    remainder = tuple(n for n in guest_order(partial) if n not in phi and partial.role(n) != NodeRole.END)
    return ContextMatch(
        mapping=phi, region=frozenset(image), remainder=remainder, frontier=tuple(frontier(fspec, image)),
        frequency=region_frequency(fspec, image), inverse={u: v for v, u in phi.items()},
    )


def _api_ref(fspec: FSpec, node: str) -> ApiRef | None:
    api = fspec.api(node)
    return api.ref if api is not None else None


def _anchor(fspec: FSpec, partial: Graam, inverse: dict[str, str], node: str) -> str:
    """node 的前驱中在查询里最靠后的那个所对应的查询节点。"""
    order = {n: i for i, n in enumerate(guest_order(partial))}
    anchors = [inverse[p] for p in fspec.graph.predecessors(node) if p in inverse]
    return max(anchors, key=order.__getitem__, default=partial.start)


def _ranked(items: list[tuple[int, str, str, Recommendation]], k: int) -> list[Recommendation]:
    """按 (-score, label, tie) 排序，同一 API 只留排名最高的一条，截取前 k 个并编号。"""
    items.sort(key=lambda item: (-item[0], item[1], item[2]))
    out, seen = [], set()
    for _, label, _, rec in items:
        if label in seen:
            continue
        seen.add(label)
        out.append(rec.model_copy(update={"rank": len(out) + 1}))
        if len(out) == k:
            break
    return out


def next_api(fspec: FSpec, partial: Graam, k: int) -> list[Recommendation]:
    """匹配区域之后可以接的 API，分数为候选入边频次的最小值。"""
    if k <= 0:
        return []
    match = match_context(fspec, partial)
    items = []
    for node in match.frontier:
        score = min(fspec.frequency(p, node) for p in fspec.graph.predecessors(node))
        anchor = _anchor(fspec, partial, match.inverse, node)
        api = _api_ref(fspec, node)
        rec = Recommendation(action=Action.ADD, api=api, anchor=anchor, model_node=node, score=score, rank=1)
        items.append((score, rec.api_label, f"{partial.label(anchor)}|{node}", rec))
    recs = _ranked(items, k)
    analysis_logger.debug(f"{partial.graph_id}: next_api -> {[r.api_label for r in recs]}")
    return recs


# ===== 缺失检测 =====

def _complete(fspec: FSpec, g: Graam) -> dict[str, str] | None:
    full = [phi for phi in embeddings(g, fspec) if len(phi) == len(g)]
    return _best(fspec, full)


def _hole_fill(fspec: FSpec, g: Graam, hole: str) -> dict[str, str] | None:
    """把 hole 视为已匹配时的最佳嵌入（hole 本身不作为任何查询节点的像）。"""
    relaxed = preds_with_hole(fspec, hole)
    found = embeddings(g, fspec, pred_rule=lambda u, image: u != hole and relaxed(u, image))
    return _best(fspec, found)


def _fill_candidates(fspec: FSpec, g: Graam) -> tuple[dict[str, str], list[tuple[str, dict[str, str]]]]:
    """基础嵌入，以及每个边界节点补上之后的嵌入（补洞无收益时沿用基础嵌入）。"""
    base = _best(fspec, embeddings(g, fspec)) or {g.start: fspec.start}
    image = set(base.values())
    filled = []
    for node in frontier(fspec, image):
        phi = base
        if fspec.role(node) == NodeRole.API:
            candidate = _hole_fill(fspec, g, node)
            if candidate is not None and len(candidate) > len(base):
                phi = candidate
        filled.append((node, phi))
    return base, filled


def detect_missed(fspec: FSpec, g: Graam, k: int) -> list[Recommendation]:
    """查询中漏掉了一个 API 时，给出应补上的 API。

    每个边界节点都试作“洞”，分数为补上之后匹配区域的边频次之和；
    让更多查询节点匹配上的洞自然得分更高。

    Raises:
        NothingMissingError: 查询可以完整嵌入 FSpec。
    """
    if _complete(fspec, g) is not None:
        raise NothingMissingError(f"{g.graph_id}: the query fully matches the model")
    if k <= 0:
        return []
    base, filled = _fill_candidates(fspec, g)
    inverse = {u: v for v, u in base.items()}
    items = []
    for node, phi in filled:
        score = region_frequency(fspec, {*phi.values(), node})
        anchor = _anchor(fspec, g, inverse, node)
        rec = Recommendation(action=Action.ADD, api=_api_ref(fspec, node), anchor=anchor, model_node=node,
                             score=score, rank=1)
        items.append((score, rec.api_label, node, rec))
    return _ranked(items, k)


# ===== 误用检测 =====

def fit_score(fspec: FSpec, g: Graam) -> int | None:
    """查询能完整嵌入（或补一个洞后完整嵌入）时返回区域频次，否则 None。"""
    phi = _complete(fspec, g)
    if phi is not None:
        return region_frequency(fspec, phi.values())
    _, filled = _fill_candidates(fspec, g)
    scores = [region_frequency(fspec, {*phi.values(), node}) for node, phi in filled if len(phi) == len(g)]
    return max(scores, default=None)


def _partial_score(fspec: FSpec, g: Graam) -> int:
    phi = _best(fspec, embeddings(g, fspec))
    return region_frequency(fspec, phi.values()) if phi else 0


def _order_fixes(fspec: FSpec, g: Graam) -> list[tuple[str, str, int]]:
    nodes = g.api_nodes()
    fixes = []
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            if g.label(a) == g.label(b):
                continue
            score = fit_score(fspec, swap_nodes(g, a, b))
            if score is not None:
                fixes.append((a, b, score))
    return fixes


def _replace_fixes(fspec: FSpec, g: Graam) -> list[tuple[str, str, int]]:
    models = {}
    for node in fspec.api_nodes():
        models.setdefault(fspec.label(node), node)
    fixes = []
    for a in g.api_nodes():
        for label, model in sorted(models.items()):
            if label == g.label(a):
                continue
            trial = g.copy()
            trial.graph.nodes[a]["api"] = fspec.api(model)
            trial.graph.nodes[a]["label"] = label
            score = fit_score(fspec, trial)
            if score is not None:
                fixes.append((a, model, score))
    return fixes


def detect_misuse(fspec: FSpec, ifd: IfdModel, g: Graam, k: int) -> tuple[list[Misuse], list[Recommendation]]:
    """误用：(a) IFD 违规；(b) 查询无法（补一个洞后）完整嵌入，但交换某对节点后可以。
    (c) 交换都不行、但替换某个节点后可以时，该节点记为 replace 误用。

    修复按修复后匹配区域的频次排序；交换都不行时才尝试单节点替换。
    """
    misuses, items, pairs = [], [], set()

    for v in check_violations(g, ifd):
        misuses.append(Misuse(kind="ifd-violation", nodes=[v.reader, v.writer], field=v.field,
                              detail=f"{v.reader_api} reads {v.field} before {v.writer_api} writes it"))
        pair = frozenset((v.reader, v.writer))
        if pair in pairs:
            continue
        pairs.add(pair)
        fixed = swap_nodes(g, v.reader, v.writer)
        score = fit_score(fspec, fixed)
        score = _partial_score(fspec, fixed) if score is None else score
        rec = Recommendation(action=Action.REORDER, api=g.api(v.writer).ref, anchor=v.reader, partner=v.writer,
                             score=score, rank=1)
        items.append((score, rec.api_label, f"{v.reader}|{v.writer}", rec))

    if fit_score(fspec, g) is None:
        order = _order_fixes(fspec, g)
        for a, b, score in order:
            misuses.append(Misuse(kind="order", nodes=[a, b], detail=f"{g.label(a)} <-> {g.label(b)}"))
            if frozenset((a, b)) in pairs:
                continue
            pairs.add(frozenset((a, b)))
            rec = Recommendation(action=Action.REORDER, api=g.api(b).ref, anchor=a, partner=b, score=score, rank=1)
            items.append((score, rec.api_label, f"{a}|{b}", rec))
        if not order:
            replaced = []
            for a, model, score in _replace_fixes(fspec, g):
                if a not in replaced:
                    replaced.append(a)
                    misuses.append(Misuse(kind="replace", nodes=[a], detail=f"{g.label(a)} does not fit the model"))
                rec = Recommendation(action=Action.REPLACE, api=_api_ref(fspec, model), anchor=a, model_node=model,
                                     score=score, rank=1)
                items.append((score, rec.api_label, f"{a}|{model}", rec))

    items.sort(key=lambda item: (-item[0], item[1], item[2]))
    fixes = [rec.model_copy(update={"rank": i}) for i, (*_, rec) in enumerate(items[:max(k, 0)], start=1)]
    analysis_logger.debug(f"{g.graph_id}: {len(misuses)} misuse(s), {len(fixes)} fix(es)")
    return misuses, fixes
