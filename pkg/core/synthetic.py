"""已知真实规约的合成 GRAAM 语料，用于饱和度与准确率实验以及性质测试。

规约由若干“变体”组成，每个变体是 API 名字上的一组顺序边；
生成的 GRAAM 节点 id 随机打乱，结构与标签不变。
"""

import random

from core.constant import END_LABEL
from core.models.usage_graph import Graam
from core.schemas.graph_schema import ApiKind, ApiStatement, EdgeOrigin, Relation, StatementLocation

SYNTHETIC_TYPE = "Api"

# 12 个 API：a,b -> c -> d 为主干；d 后分出 e-f-g 与 h-i，c 后分出 j-k-l
VARIANTS: dict[str, list[tuple[str, str]]] = {
    "V1": [("a", "c"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f"), ("f", "g")],
    "V2": [("a", "c"), ("b", "c"), ("c", "d"), ("d", "h"), ("h", "i")],
    "V3": [("a", "c"), ("b", "c"), ("c", "j"), ("j", "k"), ("k", "l")],
    "V4": [("a", "c"), ("b", "c"), ("c", "d")],
    "V5": [("a", "c"), ("b", "c"), ("c", "j")],
}

# 每个前缀只有一种后续
UNIQUE_VARIANTS: dict[str, list[tuple[str, str]]] = {
    "A": [("a1", "a2"), ("a2", "a3"), ("a3", "a4")],
    "B": [("b1", "b2"), ("b2", "b3"), ("b3", "b4")],
}

# 公共前缀之后二选一
BALANCED_VARIANTS: dict[str, list[tuple[str, str]]] = {
    "X": [("p1", "p2"), ("p2", "p3"), ("p3", "x")],
    "Y": [("p1", "p2"), ("p2", "p3"), ("p3", "y")],
}


def api_statement(name: str, index: int = 0) -> ApiStatement:
    return ApiStatement(
        id=f"synthetic/{name}", kind=ApiKind.METHOD_INVOKE, target_type=SYNTHETIC_TYPE,
        declared_type=SYNTHETIC_TYPE, owner=SYNTHETIC_TYPE, member=f"{name}()", relation=Relation.DIRECT,
        location=StatementLocation(file="synthetic", method="generated", index=index),
    )


def api_label(name: str) -> str:
    return api_statement(name).label


def build_variant(edges: list[tuple[str, str]], graph_id: str, program: str | None = None,
                  rng: random.Random | None = None) -> Graam:
    """按边表构建 GRAAM：入度为 0 的 API 接 start，出度为 0 的接 end。

    rng 给出时节点 id 随机排列；position 始终按名字的拓扑顺序分配。
    """
    names: list[str] = []
    for u, v in edges:
        for name in (u, v):
            if name not in names:
                names.append(name)
    ids = [f"a{i:03d}" for i in range(len(names))]
    if rng is not None:
        rng.shuffle(ids)
    node_of = dict(zip(names, ids))

    g = Graam(graph_id, program or graph_id, "synthetic.main")
    for pos, name in enumerate(names):
        g.add_api(node_of[name], api_statement(name, pos), position=pos, receiver=None)
    for u, v in edges:
        g.add_order(node_of[u], node_of[v], EdgeOrigin.DATA)
    g.add_end(END_LABEL)
    targets = {v for _, v in edges}
    sources = {u for u, _ in edges}
    for name in names:
        if name not in targets:
            g.add_order(g.start, node_of[name], EdgeOrigin.START)
        if name not in sources:
            g.add_order(node_of[name], END_LABEL, EdgeOrigin.END)
    g.validate()
    return g


def _corpus(variants: dict[str, list[tuple[str, str]]], n: int, seed: int, prefix: str) -> list[Graam]:
    rng = random.Random(seed)
    keys = sorted(variants)
    return [build_variant(variants[keys[i % len(keys)]], f"{prefix}{i:03d}", rng=rng) for i in range(n)]


def synthetic_corpus(n: int = 50, seed: int = 1) -> list[Graam]:
    """第 i 个程序取变体 V(i mod 5 + 1)。"""
    return _corpus(VARIANTS, n, seed, "syn")


def unique_continuation_corpus(n: int = 20, seed: int = 1) -> list[Graam]:
    return _corpus(UNIQUE_VARIANTS, n, seed, "uniq")


def balanced_corpus(n: int = 200, seed: int = 1) -> list[Graam]:
    """X、Y 两种结尾各占一半（n 为偶数时）。"""
    return _corpus(BALANCED_VARIANTS, n, seed, "bal")
