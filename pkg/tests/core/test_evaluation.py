import pytest

from core.evaluation import (evaluate_case, evaluate_corpus, generate_cases, run_eval, split_corpus,
                             usage_statistics)
from core.exceptions import CorpusTooSmallError
from core.fspec import train
from core.ifd import IfdModel
from core.schemas.result_schema import MutationKind
from core.synthetic import balanced_corpus, build_variant, synthetic_corpus, unique_continuation_corpus


class TestSplitCorpus:
    """按程序划分。"""

    def test_ratio(self):
        """测试 10 个程序按 0.8 划分为 8/2。"""
        train_set, test_set = split_corpus(synthetic_corpus(10), 0.8, 1)
        assert (len(train_set), len(test_set)) == (8, 2)
        assert not {g.program for g in train_set} & {g.program for g in test_set}

    def test_deterministic(self):
        """测试相同种子得到相同划分。"""
        first = split_corpus(synthetic_corpus(10), 0.8, 3)
        second = split_corpus(synthetic_corpus(10), 0.8, 3)
        assert [g.graph_id for g in first[1]] == [g.graph_id for g in second[1]]

    def test_both_sides_non_empty(self):
        """测试极端比例下两侧都至少有一个程序。"""
        train_set, test_set = split_corpus(synthetic_corpus(3), 0.99, 1)
        assert (len(train_set), len(test_set)) == (2, 1)

    def test_too_small(self):
        """测试只有一个程序时不能划分。"""
        with pytest.raises(CorpusTooSmallError):
            split_corpus(synthetic_corpus(1), 0.8, 1)

    @pytest.mark.parametrize("ratio", [0, 1, 1.2])
    def test_bad_ratio(self, ratio):
        """测试比例必须在 (0, 1) 内。"""
        with pytest.raises(ValueError, match="ratio"):
            split_corpus(synthetic_corpus(4), ratio, 1)


class TestGenerateCases:
    """变异用例生成。"""

    def test_next(self):
        """测试 next：每个 GRAAM 删掉最后一个 API。"""
        g = build_variant([("a", "b"), ("b", "c")], "g")
        [case] = generate_cases([g], "next", 1)
        assert case.mutation == MutationKind.DROP_LAST
        assert case.nodes == ["a002"]
        assert case.label == g.label("a002")
        assert case.id == "next:g:a002"
        assert "a002" not in {n.id for n in case.query.nodes}

    def test_missed(self):
        """测试 missed：每个 API 各删一次。"""
        cases = generate_cases([build_variant([("a", "b"), ("b", "c")], "g")], "missed", 1)
        assert [c.nodes for c in cases] == [["a000"], ["a001"], ["a002"]]
        assert all(c.mutation == MutationKind.DROP_RANDOM for c in cases)

    def test_misuse_skips_isomorphic_swaps(self):
        """测试交换两个对称的前驱得到同构图，不算误用。"""
        cases = generate_cases([build_variant([("a", "c"), ("b", "c")], "g")], "misuse", 1)
        assert len(cases) == 2
        assert ["a000", "a002"] not in [c.nodes for c in cases]
        assert all(c.label == "|".join(c.nodes) for c in cases)

    def test_swaps_per_graam(self):
        """测试每个 GRAAM 的交换数上限。"""
        corpus = synthetic_corpus(1)
        assert len(generate_cases(corpus, "misuse", 1, swaps_per_graam=3)) <= 3
        assert len(generate_cases(corpus, "misuse", 1)) > 3

    def test_unknown_task(self):
        """测试未知任务。"""
        with pytest.raises(ValueError, match="unknown task"):
            generate_cases(synthetic_corpus(1), "rename", 1)


class TestRunEval:
    """top-k 准确率。"""

    def test_unique_continuation(self):
        """测试每个前缀只有一种后续时 next 与 missed 都是满分。"""
        report = evaluate_corpus(unique_continuation_corpus(20), IfdModel(), ["next", "missed"], 0.8, 1, kmax=3)
        assert report.accuracy("next", 1) == 1.0
        assert report.accuracy("missed", 1) == 1.0
        assert report.split == "train=16 test=4 ratio=0.8"

    def test_balanced_endings(self):
        """测试两种结尾各占一半：top-1 一半，top-2 全中。"""
        fspec, _ = train(balanced_corpus(20))
        cases = generate_cases(balanced_corpus(200, seed=2), "next", 2)
        report = run_eval(fspec, IfdModel(), cases, kmax=2, seed=2)
        assert report.accuracy("next", 1) == 0.5
        assert report.accuracy("next", 2) == 1.0
        assert report.rows[0].n_cases == 200
        assert {row.seed for row in report.rows} == {2}
        with pytest.raises(KeyError):
            report.accuracy("missed", 1)

    def test_misuse_cases(self):
        """测试调用链上的每一种交换都能被换回来。"""
        g = build_variant([("a", "b"), ("b", "c")], "g")
        fspec, _ = train([g])
        cases = generate_cases([g], "misuse", 1)
        assert len(cases) == 3
        outcomes = [evaluate_case(fspec, IfdModel(), case, 3) for case in cases]
        assert [o.rank for o in outcomes] == [1, 1, 1]
        report = run_eval(fspec, IfdModel(), cases, kmax=1)
        assert report.accuracy("misuse", 1) == 1.0

    def test_unmatched_query_counts_as_miss(self):
        """测试查询无法匹配时记为未命中而不是报错。"""
        fspec, _ = train([build_variant([("a", "b")], "g")])
        cases = generate_cases([build_variant([("x", "y")], "h")], "next", 1)
        [outcome] = [evaluate_case(fspec, IfdModel(), case, 3) for case in cases]
        assert outcome.rank is None


class TestUsageStatistics:
    """用法统计。"""

    def test_synthetic(self):
        """测试合成语料的大小分布。"""
        stats = usage_statistics(synthetic_corpus(10))
        assert stats.usages == 10
        assert stats.sizes == {4: 4, 6: 4, 7: 2}
        assert stats.mean_size == pytest.approx(5.4)
        assert len(stats.programs) == 10

    def test_fixture_programs(self, listing_usages):
        """测试样例程序每个一个用法。"""
        stats = usage_statistics(list(listing_usages.values()))
        assert stats.programs == {"listing1": 1, "listing2": 1, "listing2-swapped": 1}
        assert stats.sizes == {4: 1, 6: 2}

    def test_empty(self):
        """测试空语料。"""
        assert usage_statistics([]).mean_size == 0.0
