import random

from core.frontend.lowering import load_framework
from core.frontend.parser import parse
from core.ifd import IfdModel, check_violations, filter_sound, mine_ifd
from core.models.usage_graph import PrimaryApiUsageGraph
from core.schemas.graph_schema import IfdEdge
from core.synthetic import SYNTHETIC_TYPE, api_statement

BOX_FRAMEWORK = """
class Box {
    int v;
    void set() { v = 1; }
    void init() { set(); }
    int get() { return v; }
    void bump() { v = v + 1; }
}
"""


def _edge(writer: str, reader: str, field: str) -> IfdEdge:
    return IfdEdge(writer=writer, reader=reader, field=field)


def _random_ifd(rng: random.Random, names: list[str]) -> IfdModel:
    """名字顺序上只从前往后连边，保证无环。"""
    edges = set()
    for i, writer in enumerate(names):
        for reader in names[i + 1:]:
            if rng.random() < 0.3:
                field = rng.choice(["f", "g"])
                edges.add(_edge(f"{SYNTHETIC_TYPE}.{writer}", f"{SYNTHETIC_TYPE}.{reader}",
                                f"{SYNTHETIC_TYPE}.{field}"))
    return IfdModel(edges)


def _linear_extension(rng: random.Random, names: list[str], ifd: IfdModel) -> list[str]:
    """随机拓扑序：每次从前驱都已排好的名字里随机取一个。"""
    preds = {n: {e.writer.split(".", 1)[1] for e in ifd.edges if e.reader == f"{SYNTHETIC_TYPE}.{n}"}
             for n in names}
    placed, order = set(), []
    while len(order) < len(names):
        name = rng.choice(sorted(n for n in names if n not in placed and preds[n] <= placed))
        placed.add(name)
        order.append(name)
    return order


def _usage(calls: list[tuple[str, str | None]], graph_id: str = "g") -> PrimaryApiUsageGraph:
    """按给定顺序的 (方法名, 接收者) 构建 primary 图。"""
    g = PrimaryApiUsageGraph(graph_id, "p", "Main.main")
    for pos, (name, receiver) in enumerate(calls):
        g.add_api(f"a{pos:03d}", api_statement(name, pos), position=pos, receiver=receiver)
    g.add_end("end")
    return g


def _pairwise_violations(g, ifd: IfdModel) -> set[tuple[str, str, str]]:
    """逐对比较 (读者, 写者)：读者之前没有同接收者写者、之后有，则记到之后的第一个写者。"""
    found = set()
    for reader in g.api_nodes():
        for field in ifd.fields_read_by(g.api(reader).method_key):
            before, after = [], []
            for writer in g.api_nodes():
                if writer == reader or g.receiver(reader) is None or g.receiver(writer) != g.receiver(reader):
                    continue
                if g.api(writer).method_key not in ifd.writers_of(g.api(reader).method_key, field):
                    continue
                (before if g.position(writer) < g.position(reader) else after).append(writer)
            if after and not before:
                found.add((reader, min(after, key=g.position), field))
    return found


class TestMineIfd:
    """从框架方法体挖掘 writer -> reader 依赖。"""

    def test_fixture_edges(self, jaas_ifd):
        """测试样例框架恰好挖出三条依赖。"""
        assert jaas_ifd.sorted_edges() == [
            _edge("LoginContext.login", "LoginContext.getSubject", "LoginContext.subject"),
            _edge("LoginContext.login", "LoginContext.logout", "LoginContext.loginSucceeded"),
            _edge("LoginContext.login", "LoginContext.logout", "LoginContext.subject"),
        ]
        assert jaas_ifd.depends("LoginContext.login", "LoginContext.logout") == [
            "LoginContext.loginSucceeded", "LoginContext.subject"]
        assert jaas_ifd.fields_read_by("LoginContext.getSubject") == ["LoginContext.subject"]

    def test_no_self_edge(self, jaas_ifd):
        """测试同一方法既读又写同一字段不构成边。"""
        assert all(e.writer != e.reader for e in jaas_ifd.edges)

    def test_transitive_depth(self):
        """测试写集合沿 this 上的内部调用展开。"""
        fw = load_framework([parse(BOX_FRAMEWORK)], "box")
        shallow = mine_ifd(fw, depth=0)
        deep = mine_ifd(fw, depth=1)
        via_call = _edge("Box.init", "Box.get", "Box.v")
        assert via_call not in shallow
        assert via_call in deep
        assert _edge("Box.set", "Box.get", "Box.v") in shallow
        # bump 读写 v：它与 set 互为依赖，但没有自环
        assert _edge("Box.set", "Box.bump", "Box.v") in shallow
        assert _edge("Box.bump", "Box.get", "Box.v") in shallow
        assert not shallow.depends("Box.bump", "Box.bump")

    def test_schema_round_trip(self, jaas_ifd):
        """测试模型序列化后边集合不变。"""
        restored = IfdModel.from_schema(jaas_ifd.to_schema())
        assert restored.sorted_edges() == jaas_ifd.sorted_edges()
        assert restored.framework == "jaas-analog"


class TestViolations:
    """读者先于写者的检测。"""

    def test_sound_programs(self, listing_usages, jaas_ifd):
        """测试两个可靠程序没有违规。"""
        assert check_violations(listing_usages["listing1"], jaas_ifd) == []
        assert check_violations(listing_usages["listing2"], jaas_ifd) == []

    def test_swapped_program(self, listing_usages, jaas_ifd):
        """测试 getSubject 先于 login 调用。"""
        [violation] = check_violations(listing_usages["listing2-swapped"], jaas_ifd)
        assert (violation.reader, violation.writer) == ("a003", "a004")
        assert violation.field == "LoginContext.subject"
        assert violation.reader_api == "MethodInvoke LoginContext.getSubject()"
        assert violation.graph_id == "listing2-swapped__LoginUsecase.main"

    def test_different_receivers_do_not_conflict(self, build_usages):
        """测试不同接收者上的读写互不影响。"""
        [g] = build_usages(
            BOX_FRAMEWORK,
            "class Main { static void main() { Box a = new Box(); Box b = new Box(); a.get(); b.set(); } }",
        )
        ifd = mine_ifd(load_framework([parse(BOX_FRAMEWORK)], "box"), depth=1)
        assert check_violations(g, ifd) == []

    def test_same_receiver_conflicts(self, build_usages):
        """测试同一接收者上先读后写。"""
        [g] = build_usages(
            BOX_FRAMEWORK, "class Main { static void main() { Box a = new Box(); a.get(); a.set(); } }",
        )
        ifd = mine_ifd(load_framework([parse(BOX_FRAMEWORK)], "box"), depth=1)
        [violation] = check_violations(g, ifd)
        assert (violation.reader, violation.writer) == ("a001", "a002")

    def test_untraced_receivers_do_not_conflict(self, build_usages):
        """测试两个追溯不到来源的接收者不被当作同一对象。"""
        [g] = build_usages(
            BOX_FRAMEWORK,
            "class Factory { static Box make() { return null; } }\n"
            "class Main { static void main() { Box a = Factory.make(); Box b = Factory.make(); a.get(); b.set(); } }",
        )
        assert [g.label(n) for n in g.api_nodes()] == ["MethodInvoke Box.get()", "MethodInvoke Box.set()"]
        assert g.receiver("a000") is None and g.receiver("a001") is None
        ifd = mine_ifd(load_framework([parse(BOX_FRAMEWORK)], "box"), depth=1)
        assert check_violations(g, ifd) == []

    def test_filter_sound(self, listing_usages, jaas_ifd):
        """测试语料划分保持原有顺序。"""
        corpus = [listing_usages[p] for p in ("listing1", "listing2-swapped", "listing2")]
        sound, unsound = filter_sound(corpus, jaas_ifd, mode="serial")
        assert [g.program for g in sound] == ["listing1", "listing2"]
        assert [u.program for u in unsound] == ["listing2-swapped"]
        assert len(unsound[0].violations) == 1


class TestViolationProperties:
    """随机图上的违规判定。"""

    def test_property_linear_extensions_are_sound(self):
        """测试按 IFD 偏序的任意线性扩展调用都没有违规，完全倒序时每个读者都违规。"""
        rng = random.Random(5)
        names = [f"m{i}" for i in range(7)]
        for _ in range(200):
            ifd = _random_ifd(rng, names)
            order = _linear_extension(rng, names, ifd)
            assert check_violations(_usage([(n, "r") for n in order]), ifd) == []

            reversed_usage = _usage([(n, "r") for n in reversed(order)])
            readers = {(e.reader, e.field) for e in ifd.edges}
            violations = check_violations(reversed_usage, ifd)
            assert {(reversed_usage.api(v.reader).method_key, v.field) for v in violations} == readers

    def test_property_matches_pairwise_check(self):
        """测试不超过 20 个节点的随机调用序列上与逐对比较的结果一致。"""
        rng = random.Random(9)
        names = [f"m{i}" for i in range(5)]
        for _ in range(300):
            ifd = _random_ifd(rng, names)
            calls = [(rng.choice(names), rng.choice(["r1", "r2", None])) for _ in range(rng.randint(1, 20))]
            g = _usage(calls)
            found = {(v.reader, v.writer, v.field) for v in check_violations(g, ifd)}
            assert found == _pairwise_violations(g, ifd)

    def test_fixtures_match_pairwise_check(self, listing_usages, jaas_ifd):
        """测试样例程序上与逐对比较的结果一致。"""
        for g in listing_usages.values():
            assert len(g.api_nodes()) <= 20
            found = {(v.reader, v.writer, v.field) for v in check_violations(g, jaas_ifd)}
            assert found == _pairwise_violations(g, jaas_ifd)
