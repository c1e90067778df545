"""GRAAM 构建与变形。

GRAAM 只保留 primary 图中的数据边，再补上 IFD 顺序边以及 start/end 连线：
两个既无数据依赖也无 IFD 依赖的 API 之间不再有顺序约束。
"""

import networkx as nx

from core import analysis_logger
from core.exceptions import CycleAfterAugmentationError
from core.ifd import IfdModel
from core.models.usage_graph import Graam, PrimaryApiUsageGraph
from core.schemas.graph_schema import EdgeOrigin, NodeRole


def build_graam(g: PrimaryApiUsageGraph, ifd: IfdModel) -> Graam:
    """primary 图 -> GRAAM。

    Raises:
        CycleAfterAugmentationError: 数据边与 IFD 边合起来成环。
    """
    graam = Graam(g.graph_id, g.program, g.entrypoint)
    api_nodes = g.api_nodes()
    for node in api_nodes:
        graam.add_api(node, g.api(node), g.position(node), g.receiver(node))
    for u, v in g.data_edges():
        graam.add_order(u, v, EdgeOrigin.DATA)

    # 读者只连到同一接收者上最近的前序写者，接收者未知时不连
    for reader in api_nodes:
        reader_key = g.api(reader).method_key
        receiver = g.receiver(reader)
        if reader_key is None or receiver is None:
            continue
        for field in ifd.fields_read_by(reader_key):
            writers = ifd.writers_of(reader_key, field)
            preceding = [w for w in api_nodes
                         if g.position(w) < g.position(reader) and g.api(w).method_key in writers
                         and g.receiver(w) == receiver]
            if preceding:
                writer = max(preceding, key=g.position)
                graam.add_order(writer, reader, EdgeOrigin.IFD)

    end = g.end_nodes()[0]
    graam.add_end(end)
    for node in api_nodes:
        if graam.graph.in_degree(node) == 0:
            graam.add_order(graam.start, node, EdgeOrigin.START)
    for node in api_nodes:
        if graam.graph.out_degree(node) == 0:
            graam.add_order(node, end, EdgeOrigin.END)

    if not nx.is_directed_acyclic_graph(graam.graph):
        cycle = nx.find_cycle(graam.graph)
        raise CycleAfterAugmentationError(f"{g.graph_id}: cycle after adding IFD edges: {cycle}")
    graam.validate()
    analysis_logger.debug(f"{g.graph_id}: graam with {len(api_nodes)} API nodes, "
                          f"{graam.graph.number_of_edges()} edges")
    return graam


def _rewire(graam: Graam, touched: set[str]):
    end = graam.end_nodes()[0]
    for node in sorted(touched):
        if node not in graam.graph or graam.role(node) != NodeRole.API:
            continue
        if graam.graph.in_degree(node) == 0:
            graam.add_order(graam.start, node, EdgeOrigin.START)
        if graam.graph.out_degree(node) == 0:
            graam.add_order(node, end, EdgeOrigin.END)
    if not graam.api_nodes():
        graam.add_order(graam.start, end, EdgeOrigin.END)


def remove_node(graam: Graam, node: str) -> Graam:
    """删除一个 API 节点；失去前驱的接到 start，失去后继的接到 end。不做跨接。"""
    if node not in graam.graph or graam.role(node) != NodeRole.API:
        raise ValueError(f"{graam.graph_id}: {node} is not an API node")
    out = graam.copy()
    touched = set(out.graph.predecessors(node)) | set(out.graph.successors(node))
    out.graph.remove_node(node)
    _rewire(out, touched)
    return out


def swap_nodes(graam: Graam, a: str, b: str) -> Graam:
    """交换两个 API 节点承载的 API，结构、位置与接收者保持不变。"""
    for node in (a, b):
        if node not in graam.graph or graam.role(node) != NodeRole.API:
            raise ValueError(f"{graam.graph_id}: {node} is not an API node")
    out = graam.copy()
    attrs = out.graph.nodes
    for key in ("api", "label"):
        attrs[a][key], attrs[b][key] = attrs[b][key], attrs[a][key]
    return out
