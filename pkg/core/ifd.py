"""框架内部依赖（IFD）：写某字段的方法必须先于读它的方法执行。

边 writer -> reader [field] 从框架源码中挖掘；训练程序若在同一接收者上
先调用读者、后调用写者，就是不可靠（unsound）的用法。
"""

from collections import defaultdict

from core import analysis_logger
from core.config import settings
from core.schemas.graph_schema import IfdEdge, IfdModelSchema, UnsoundUsage, Violation
from core.schemas.program_schema import AccessMode, FrameworkModel
from core.utils.concurrency import run_tasks


class IfdModel:
    def __init__(self, edges=(), framework: str = ""):
        self.framework = framework
        self.edges: frozenset[IfdEdge] = frozenset(edges)
        self._writers: dict[tuple[str, str], set[str]] = defaultdict(set)
        for edge in self.edges:
            self._writers[(edge.reader, edge.field)].add(edge.writer)

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, edge: IfdEdge) -> bool:
        return edge in self.edges

    def sorted_edges(self) -> list[IfdEdge]:
        return sorted(self.edges, key=lambda e: (e.writer, e.reader, e.field))

    def fields_read_by(self, reader: str) -> list[str]:
        return sorted({f for r, f in self._writers if r == reader})

    def writers_of(self, reader: str, field: str) -> frozenset[str]:
        return frozenset(self._writers.get((reader, field), ()))

    def depends(self, writer: str, reader: str) -> list[str]:
        """writer -> reader 之间的依赖字段。"""
        return sorted(e.field for e in self.edges if e.writer == writer and e.reader == reader)

    def to_schema(self) -> IfdModelSchema:
        return IfdModelSchema(framework=self.framework, edges=self.sorted_edges())

    @classmethod
    def from_schema(cls, schema: IfdModelSchema) -> "IfdModel":
        return cls(schema.edges, schema.framework)


def _transitive_writes(method: str, writes: dict[str, set[str]], calls: dict[str, list[str]],
                       depth: int) -> set[str]:
    found = set(writes.get(method, ()))
    frontier, seen = [method], {method}
    for _ in range(depth):
        nxt = []
        for m in frontier:
            for callee in calls.get(m, ()):
                if callee not in seen:
                    seen.add(callee)
                    found |= writes.get(callee, set())
                    nxt.append(callee)
        frontier = nxt
    return found


def mine_ifd(framework: FrameworkModel, depth: int | None = None) -> IfdModel:
    """挖掘 writer -> reader [field] 边。

    写集合沿同类内部调用向下展开 depth 层（默认取 IFD_TRANSITIVE_DEPTH）；
    读集合只看方法自身。同一方法既读又写同一字段不构成边。
    """
    depth = settings.IFD_TRANSITIVE_DEPTH if depth is None else depth
    reads: dict[str, set[str]] = defaultdict(set)
    writes: dict[str, set[str]] = defaultdict(set)
    calls = {}
    for body in framework.method_bodies:
        calls[body.method] = list(body.calls)
        for access in body.accesses:
            target = reads if access.mode == AccessMode.READ else writes
            target[body.method].add(access.field)

    methods = sorted(calls)
    edges = set()
    for writer in methods:
        written = _transitive_writes(writer, writes, calls, depth)
        for reader in methods:
            if reader == writer:
                continue
            for field in written & reads.get(reader, set()):
                edges.add(IfdEdge(writer=writer, reader=reader, field=field))
    model = IfdModel(edges, framework.name)
    analysis_logger.info(f"ifd: {len(model)} edges mined from {len(methods)} framework methods (depth={depth})")
    return model


def check_violations(g, ifd: IfdModel) -> list[Violation]:
    """同一接收者上，读者在前而写者只在其后出现时报告违规。

    接收者追溯不到来源（receiver 为 None）的调用不参与比较。

    g 可以是任何带 position/receiver 属性的使用图（primary 或 GRAAM）。
    每个 (读者, 字段) 至多一条违规，指向其后的第一个写者。
    """
    violations = []
    nodes = [n for n in g.api_nodes() if g.api(n).method_key is not None]
    for reader in nodes:
        key = g.api(reader).method_key
        receiver = g.receiver(reader)
        if receiver is None:
            continue
        for field in ifd.fields_read_by(key):
            writers = ifd.writers_of(key, field)
            same = [w for w in nodes if w != reader and g.api(w).method_key in writers
                    and g.receiver(w) == receiver]
            before = [w for w in same if g.position(w) < g.position(reader)]
            after = sorted((w for w in same if g.position(w) > g.position(reader)), key=g.position)
            if before or not after:
                continue
            writer = after[0]
            violations.append(Violation(
                program=g.program, graph_id=g.graph_id, reader=reader, writer=writer,
                reader_api=g.label(reader), writer_api=g.label(writer), field=field,
            ))
            analysis_logger.debug(f"{g.graph_id}: {reader} reads {field} before {writer} writes it")
    return violations


def filter_sound(corpus: list, ifd: IfdModel, mode: str | None = None,
                 worker_count: int | None = None) -> tuple[list, list[UnsoundUsage]]:
    """把语料分成可靠与不可靠两部分，保持原有顺序。"""
    results = run_tasks(check_violations, [(g, ifd) for g in corpus], mode=mode, worker_count=worker_count,
                        logger=analysis_logger)
    sound, unsound = [], []
    for g, violations in zip(corpus, results):
        if violations:
            unsound.append(UnsoundUsage(graph_id=g.graph_id, program=g.program, violations=violations))
            analysis_logger.bind(graph=g.graph_id).warning(f"rejected, {len(violations)} IFD violation(s)")
        else:
            sound.append(g)
    analysis_logger.info(f"validate: {len(sound)} sound, {len(unsound)} unsound")
    return sound, unsound
