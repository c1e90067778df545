import networkx as nx
import pytest

from core.fspec import enumerate_usages, find_mergeable, merge, saturation_point, train
from core.models.usage_graph import FSpec
from core.schemas.result_schema import CurveRow, LearningCurve
from core.synthetic import VARIANTS, api_label, build_variant, synthetic_corpus


def _paths(g) -> set[tuple[str, ...]]:
    """一个图中 start 到各个 end 的全部路径（只取 API 标签）。"""
    out = set()
    for end in g.end_nodes():
        for path in nx.all_simple_paths(g.graph, g.start, end):
            out.add(tuple(g.label(n) for n in path[1:-1]))
    return out


class TestTrainOnFixtures:
    """两个样例程序训练出的 FSpec。"""

    def test_shape(self, jaas_fspec):
        """测试节点、end 与边数。"""
        assert len(jaas_fspec) == 9
        assert len(jaas_fspec.end_nodes()) == 2
        assert jaas_fspec.graph.number_of_edges() == 10
        jaas_fspec.validate()

    def test_frequencies(self, jaas_fspec, find_node):
        """测试两个程序共享的边频次为 2。"""
        sub = find_node(jaas_fspec, "ObjectInit Subject.<init>")
        ch = find_node(jaas_fspec, "ObjectInit CallbackHandler.<init>")
        lc = find_node(jaas_fspec, "ObjectInit LoginContext.<init>")
        login = find_node(jaas_fspec, "MethodInvoke LoginContext.login()")
        get_subject = find_node(jaas_fspec, "MethodInvoke LoginContext.getSubject()")
        shared = {("start", sub), ("start", ch), (sub, lc), (ch, lc), (lc, login)}
        for u, v in jaas_fspec.graph.edges:
            assert jaas_fspec.frequency(u, v) == (2 if (u, v) in shared else 1)
        assert jaas_fspec.graph.has_edge(login, get_subject)
        assert {jaas_fspec.label(p) for p in jaas_fspec.graph.predecessors(jaas_fspec.end_nodes()[1])} == {
            "MethodInvoke LoginContext.login()"}

    def test_curve(self, listing_graams):
        """测试学习曲线：先合并较大的 listing2。"""
        _, curve = train([listing_graams["listing1"], listing_graams["listing2"]])
        assert curve.rows == [
            CurveRow(k=1, cum_graam_nodes=8, fspec_nodes=8, fspec_edges=9),
            CurveRow(k=2, cum_graam_nodes=14, fspec_nodes=9, fspec_edges=10),
        ]

    def test_enumerate_usages(self, jaas_fspec):
        """测试 start 到 end 的路径与瓶颈频次。"""
        usages = enumerate_usages(jaas_fspec)
        assert len(usages) == 6
        shortest = min(usages, key=lambda u: len(u.nodes))
        assert shortest.labels[-1] == "MethodInvoke LoginContext.login()"
        assert shortest.frequency == 1
        assert enumerate_usages(jaas_fspec, limit=2) == usages[:2]

    def test_merge_candidates(self, listing_graams):
        """测试 listing1 与 listing2 模型的最大可合并上部。"""
        fspec, _ = train([listing_graams["listing2"]])
        [best] = find_mergeable(fspec, listing_graams["listing1"])
        assert best.size == 5
        assert fspec.label(best.bijection["a003"]) == "MethodInvoke LoginContext.login()"
        assert "end" not in best.bijection

    def test_merge_does_not_mutate(self, listing_graams):
        """测试 merge 返回新对象。"""
        fspec, _ = train([listing_graams["listing2"]])
        merged = merge(fspec, listing_graams["listing1"])
        assert len(fspec) == 8
        assert len(merged) == 9

    def test_same_graam_twice(self, listing_graams):
        """测试同一 GRAAM 合并两次只增加频次。"""
        g = listing_graams["listing2"]
        fspec, _ = train([g, g.copy("listing2-copy")])
        assert len(fspec) == len(g)
        assert all(f == 2 for _, _, f in fspec.graph.edges(data="frequency"))


class TestMergeProperties:
    """合并不引入训练数据中不存在的路径。"""

    def test_no_cross_paths(self):
        """测试 a-b-c 与 d-b-e 合并后不会出现 a-b-e。"""
        fspec, _ = train([build_variant([("a", "b"), ("b", "c")], "g1"),
                          build_variant([("d", "b"), ("b", "e")], "g2")])
        labels = {u.labels for u in enumerate_usages(fspec)}
        a, b, c, d, e = (api_label(n) for n in "abcde")
        assert labels == {(a, b, c), (d, b, e)}

    def test_property_paths_come_from_training_data(self):
        """测试 50 个 GRAAM 训练出的 FSpec 中每条路径都是某个训练 GRAAM 中的路径。"""
        corpus = synthetic_corpus(50)
        assert len({api for g in corpus for api in g.labels()}) == 12
        fspec, _ = train(corpus)
        allowed = set().union(*(_paths(g) for g in corpus))
        for usage in enumerate_usages(fspec):
            assert usage.labels in allowed

    def test_property_frequency_sum(self):
        """测试频次之和等于训练 GRAAM 的边数之和。"""
        corpus = synthetic_corpus(25, seed=4)
        fspec, _ = train(corpus)
        total = sum(g.graph.number_of_edges() for g in corpus)
        assert sum(f for _, _, f in fspec.graph.edges(data="frequency")) == total

    def test_order_independent_labels(self):
        """测试不排序训练时模型的 API 标签集合不变。"""
        corpus = synthetic_corpus(10)
        sorted_model, _ = train(corpus)
        raw_model, _ = train(corpus, sort=False)
        assert set(sorted_model.labels()) == set(raw_model.labels())


class TestSaturation:
    """合成语料上的饱和点。"""

    def test_synthetic_corpus(self):
        """测试 50 个合成程序：最终 18 个节点，第 31 个程序后达到 90%。"""
        fspec, curve = train(synthetic_corpus(50))
        assert len(fspec) == 18
        assert len({fspec.label(n) for n in fspec.api_nodes()}) == len(
            {name for edges in VARIANTS.values() for edge in edges for name in edge})
        assert saturation_point(curve, 0.9) == 31
        assert saturation_point(curve, 1.0) == 32
        assert saturation_point(curve, 0.5) == 1

    def test_empty_curve(self):
        """测试空曲线。"""
        with pytest.raises(ValueError, match="empty"):
            saturation_point(LearningCurve())

    @pytest.mark.parametrize("threshold", [0, 1.5, -0.1])
    def test_bad_threshold(self, threshold):
        """测试阈值必须在 (0, 1] 内。"""
        curve = LearningCurve(rows=[CurveRow(k=1, cum_graam_nodes=3, fspec_nodes=3, fspec_edges=2)])
        with pytest.raises(ValueError, match="threshold"):
            saturation_point(curve, threshold)


class TestEmptyModel:
    """空模型。"""

    def test_train_on_nothing(self):
        """测试没有训练数据时得到只有 start 的模型。"""
        fspec, curve = train([])
        assert fspec.is_empty()
        assert curve.rows == []
        assert enumerate_usages(fspec) == []

    def test_fresh_model(self):
        """测试新建模型。"""
        assert FSpec().graph_id == "fspec"
