import random

import networkx as nx
import pytest

from core.canonical import canonical_form, data_subgraph
from core.exceptions import NoMatchError, NothingMissingError
from core.fspec import train
from core.graam import remove_node, swap_nodes
from core.ifd import IfdModel
from core.recommend import detect_missed, detect_misuse, fit_score, match_context, next_api
from core.schemas.result_schema import Action
from core.synthetic import VARIANTS, api_label, build_variant, synthetic_corpus

LOGIN = "MethodInvoke LoginContext.login()"
GET_SUBJECT = "MethodInvoke LoginContext.getSubject()"


def _relabelled(g):
    """同构副本：API 节点换成倒序的新 id，接收者随之改名，位置不变。"""
    mapping = {n: f"q{i:03d}" for i, n in enumerate(reversed(g.api_nodes()))}
    out = g.copy(f"{g.graph_id}-relabelled")
    out.graph = nx.relabel_nodes(g.graph, mapping)
    for node in mapping.values():
        receiver = out.graph.nodes[node]["receiver"]
        out.graph.nodes[node]["receiver"] = mapping.get(receiver, receiver)
    return out


class TestNextApi:
    """下一个 API 推荐。"""

    def test_after_login_context(self, jaas_fspec, listing_graams):
        """测试创建 LoginContext 之后只推荐 login。"""
        query = remove_node(listing_graams["listing1"], "a003")
        [rec] = next_api(jaas_fspec, query, 5)
        assert rec.api_label == LOGIN
        assert (rec.action, rec.score, rec.anchor, rec.rank) == (Action.ADD, 2, "a002", 1)

    def test_after_login(self, jaas_fspec, listing_graams):
        """测试 login 之后可以取 subject，也可以直接结束。"""
        recs = next_api(jaas_fspec, listing_graams["listing1"], 5)
        assert [r.api_label for r in recs] == [GET_SUBJECT, "end"]
        assert [r.rank for r in recs] == [1, 2]
        assert recs[1].api is None
        assert all(r.anchor == "a003" for r in recs)

    def test_k_truncates(self, jaas_fspec, listing_graams):
        """测试 k 截断与 k<=0。"""
        assert len(next_api(jaas_fspec, listing_graams["listing1"], 1)) == 1
        assert next_api(jaas_fspec, listing_graams["listing1"], 0) == []

    def test_no_match(self, jaas_fspec):
        """测试查询中没有任何 API 出现在模型里。"""
        with pytest.raises(NoMatchError):
            next_api(jaas_fspec, build_variant([("x", "y")], "unrelated"), 3)

    def test_match_context(self, jaas_fspec, listing_graams, find_node):
        """测试上下文匹配的区域与边界。"""
        match = match_context(jaas_fspec, remove_node(listing_graams["listing1"], "a003"))
        assert len(match.mapping) == 4
        assert match.remainder == ()
        assert match.frontier == (find_node(jaas_fspec, LOGIN),)
        assert match.frequency == 8


class TestDetectMissed:
    """缺失 API 检测。"""

    def test_missing_login(self, jaas_fspec, listing_graams):
        """测试 listing2 去掉 login 后补回 login。"""
        query = remove_node(listing_graams["listing2"], "a003")
        recs = detect_missed(jaas_fspec, query, 3)
        assert recs[0].api_label == LOGIN
        assert recs[0].score == 14
        assert recs[0].anchor == "a002"

    def test_nothing_missing(self, jaas_fspec, listing_graams):
        """测试完整的用法没有缺失。"""
        with pytest.raises(NothingMissingError):
            detect_missed(jaas_fspec, listing_graams["listing2"], 3)

    def test_synthetic_hole(self):
        """测试 a、b 汇入 c 时漏掉 b。"""
        g = build_variant([("a", "c"), ("b", "c")], "g")
        fspec, _ = train([g])
        [rec] = detect_missed(fspec, remove_node(g, "a002"), 3)
        assert rec.api_label == api_label("b")
        assert rec.score == 5
        assert rec.anchor == "start"


class TestDetectMisuse:
    """误用检测与修复。"""

    def test_ifd_violation(self, jaas_fspec, jaas_ifd, listing_graams):
        """测试先 getSubject 后 login 报告 IFD 违规并建议调换。"""
        misuses, fixes = detect_misuse(jaas_fspec, jaas_ifd, listing_graams["listing2-swapped"], 5)
        assert misuses[0].kind == "ifd-violation"
        assert misuses[0].nodes == ["a003", "a004"]
        assert misuses[0].field == "LoginContext.subject"
        fix = next(f for f in fixes if f.action == Action.REORDER and (f.anchor, f.partner) == ("a003", "a004"))
        assert fix.api_label == LOGIN
        assert [f.rank for f in fixes] == list(range(1, len(fixes) + 1))

    def test_sound_usage(self, jaas_fspec, jaas_ifd, listing_graams):
        """测试训练用的程序没有误用。"""
        assert detect_misuse(jaas_fspec, jaas_ifd, listing_graams["listing2"], 5) == ([], [])

    def test_order_misuse(self):
        """测试首尾颠倒的调用链。"""
        g = build_variant([("a", "b"), ("b", "c")], "g")
        fspec, _ = train([g])
        misuses, fixes = detect_misuse(fspec, IfdModel(), swap_nodes(g, "a000", "a002"), 5)
        assert [m.kind for m in misuses] == ["order"]
        [fix] = fixes
        assert (fix.action, fix.anchor, fix.partner, fix.score) == (Action.REORDER, "a000", "a002", 4)

    def test_replace(self):
        """测试换掉一个不认识的 API，且该节点报告为误用。"""
        fspec, _ = train([build_variant([("a", "b"), ("b", "c")], "g")])
        query = build_variant([("a", "x"), ("x", "c")], "q")
        misuses, fixes = detect_misuse(fspec, IfdModel(), query, 5)
        [misuse] = misuses
        assert (misuse.kind, misuse.nodes) == ("replace", ["a001"])
        assert misuse.detail == api_label("x") + " does not fit the model"
        [fix] = fixes
        assert (fix.action, fix.anchor, fix.api_label) == (Action.REPLACE, "a001", api_label("b"))

    def test_fit_score(self):
        """测试完整嵌入、补洞嵌入与不可嵌入。"""
        g = build_variant([("a", "c"), ("b", "c")], "g")
        fspec, _ = train([g])
        assert fit_score(fspec, g) == 5
        assert fit_score(fspec, remove_node(g, "a002")) == 5
        assert fit_score(fspec, build_variant([("c", "a")], "reversed")) is None


class TestRecommendProperties:
    """推荐结果只取决于查询的结构。"""

    @pytest.mark.parametrize("program", ["listing1", "listing2"])
    def test_property_missed_node_is_recommended(self, jaas_fspec, listing_graams, program):
        """测试训练 GRAAM 去掉任一节点后（剩余部分仍连通），被去掉的 API 出现在缺失推荐中。"""
        g = listing_graams[program]
        checked = 0
        for node in g.api_nodes():
            query = remove_node(g, node)
            if not nx.is_weakly_connected(data_subgraph(query)):
                continue
            labels = [r.api_label for r in detect_missed(jaas_fspec, query, len(jaas_fspec))]
            assert g.label(node) in labels, node
            checked += 1
        assert checked >= 3

    def test_property_isomorphic_queries_agree(self, jaas_fspec, jaas_ifd, listing_graams):
        """测试规范形式相同的查询在三种任务上给出相同的推荐列表。"""
        partial = remove_node(listing_graams["listing1"], "a003")
        missing = remove_node(listing_graams["listing2"], "a003")
        swapped = listing_graams["listing2-swapped"]
        for query in (partial, missing, swapped):
            copy = _relabelled(query)
            assert set(copy.api_nodes()).isdisjoint(query.api_nodes())
            assert canonical_form(copy) == canonical_form(query)

        def ranked(recs):
            return [(r.action, r.api_label, r.score, r.rank) for r in recs]

        assert ranked(next_api(jaas_fspec, partial, 5)) == ranked(next_api(jaas_fspec, _relabelled(partial), 5))
        assert ranked(detect_missed(jaas_fspec, missing, 5)) == ranked(
            detect_missed(jaas_fspec, _relabelled(missing), 5))
        misuses, fixes = detect_misuse(jaas_fspec, jaas_ifd, swapped, 5)
        copy_misuses, copy_fixes = detect_misuse(jaas_fspec, jaas_ifd, _relabelled(swapped), 5)
        assert [m.kind for m in misuses] == [m.kind for m in copy_misuses]
        assert ranked(fixes) == ranked(copy_fixes)

    def test_property_synthetic_queries_agree(self):
        """测试同一变体的不同 id 排列得到相同的下一个 API。"""
        fspec, _ = train(synthetic_corpus(25))
        edges = VARIANTS["V1"][:-1]
        ranked = []
        for seed in range(4):
            query = build_variant(edges, f"q{seed}", rng=random.Random(seed))
            ranked.append([(r.api_label, r.score) for r in next_api(fspec, query, 5)])
        assert ranked[0]
        assert all(r == ranked[0] for r in ranked[1:])
