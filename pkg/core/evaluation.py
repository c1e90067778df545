"""评测：按程序划分语料、生成变异用例、计算 top-k 准确率。

三个任务对应三种变异：
- next：删掉最后一个 API（DropLast），期望推荐被删的 API
- missed：依次删掉每个 API（DropRandom），期望补回被删的 API
- misuse：交换两个标签不同的 API（Swap），期望给出把它们换回来的 Reorder
"""

import random
from collections import Counter

from core import eval_logger
from core.canonical import canonical_form
from core.config import settings
from core.constant import TASKS
from core.exceptions import CorpusTooSmallError, NoMatchError, NothingMissingError
from core.fspec import train
from core.graam import remove_node, swap_nodes
from core.ifd import IfdModel
from core.models.usage_graph import FSpec, Graam, UsageGraph
from core.recommend import detect_misuse, detect_missed, next_api
from core.schemas.result_schema import (Action, CaseOutcome, EvalReport, EvalRow, MutationKind, TestCase,
                                        UsageStats)
from core.utils.concurrency import run_tasks

_MUTATION = {"next": MutationKind.DROP_LAST, "missed": MutationKind.DROP_RANDOM, "misuse": MutationKind.SWAP}


def split_corpus(graams: list[Graam], ratio: float, seed: int) -> tuple[list[Graam], list[Graam]]:
    """按程序划分训练/测试集（同一程序的用法不会跨集合）。

    Raises:
        CorpusTooSmallError: 程序少于两个。
        ValueError: ratio 不在 (0, 1) 内。
    """
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    programs = sorted({g.program for g in graams})
    if len(programs) < 2:
        raise CorpusTooSmallError(f"need at least 2 programs to split, got {len(programs)}")
    random.Random(seed).shuffle(programs)
    n_train = min(max(round(ratio * len(programs)), 1), len(programs) - 1)
    chosen = set(programs[:n_train])
    ordered = sorted(graams, key=lambda g: g.graph_id)
    train_set = [g for g in ordered if g.program in chosen]
    test_set = [g for g in ordered if g.program not in chosen]
    eval_logger.info(f"split: {n_train} train programs ({len(train_set)} graams), "
                     f"{len(programs) - n_train} test programs ({len(test_set)} graams), seed={seed}")
    return train_set, test_set


def _case(task: str, g: Graam, nodes: list[str], label: str, seed: int, query: Graam) -> TestCase:
    return TestCase(id=f"{task}:{g.graph_id}:{'+'.join(nodes)}", source=g.graph_id, mutation=_MUTATION[task],
                    nodes=nodes, label=label, seed=seed, query=query.to_schema())


def generate_cases(test_graams: list[Graam], task: str, seed: int,
                   swaps_per_graam: int | None = None) -> list[TestCase]:
    """为测试 GRAAM 生成某个任务的用例；节点不够的 GRAAM 跳过并记录。"""
    if task not in _MUTATION:
        raise ValueError(f"unknown task: {task}")
    swaps_per_graam = settings.EVAL_SWAPS_PER_GRAAM if swaps_per_graam is None else swaps_per_graam
    rng = random.Random(seed)
    cases = []
    for g in test_graams:
        nodes = g.api_nodes()
        needed = 2 if task == "misuse" else 1
        if len(nodes) < needed:
            eval_logger.warning(f"{g.graph_id}: {len(nodes)} API node(s), skipped for {task}")
            continue
        if task == "next":
            last = nodes[-1]
            cases.append(_case(task, g, [last], g.label(last), seed, remove_node(g, last)))
        elif task == "missed":
            for node in nodes:
                cases.append(_case(task, g, [node], g.label(node), seed, remove_node(g, node)))
        else:
            original = canonical_form(g)
            pairs = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:] if g.label(a) != g.label(b)]
            if swaps_per_graam and len(pairs) > swaps_per_graam:
                pairs = sorted(rng.sample(pairs, swaps_per_graam))
            for a, b in pairs:
                swapped = swap_nodes(g, a, b)
                # 交换后与原图同构（例如两个互不相关的初始化）就不是误用
                if canonical_form(swapped) == original:
                    continue
                cases.append(_case(task, g, [a, b], f"{a}|{b}", seed, swapped))
    eval_logger.info(f"{task}: {len(cases)} cases from {len(test_graams)} test graams")
    return cases


def evaluate_case(fspec: FSpec, ifd: IfdModel, case: TestCase, kmax: int) -> CaseOutcome:
    """执行一个用例，返回正确答案的排名（没给出则为 None）。"""
    query = Graam.from_schema(case.query)
    task = {v: k for k, v in _MUTATION.items()}[case.mutation]
    rank = None
    if task == "misuse":
        _, fixes = detect_misuse(fspec, ifd, query, kmax)
        expected = set(case.nodes)
        rank = next((r.rank for r in fixes if r.action == Action.REORDER and {r.anchor, r.partner} == expected), None)
    else:
        try:
            recs = next_api(fspec, query, kmax) if task == "next" else detect_missed(fspec, query, kmax)
        except (NoMatchError, NothingMissingError):
            recs = []
        rank = next((r.rank for r in recs if r.api_label == case.label), None)
    return CaseOutcome(case_id=case.id, task=task, label=case.label, rank=rank)


def run_eval(fspec: FSpec, ifd: IfdModel, cases: list[TestCase], kmax: int | None = None, seed: int = 0,
             split: str = "", mode: str | None = None, worker_count: int | None = None) -> EvalReport:
    """逐个用例查询推荐器并汇总 top-1..kmax 准确率。"""
    kmax = settings.EVAL_KMAX if kmax is None else kmax
    outcomes = run_tasks(evaluate_case, [(fspec, ifd, case, kmax) for case in cases], mode=mode,
                         worker_count=worker_count, logger=eval_logger)
    rows = []
    for task in TASKS:
        ranks = [o.rank for o in outcomes if o.task == task]
        if not ranks:
            continue
        for k in range(1, kmax + 1):
            hits = sum(1 for r in ranks if r is not None and r <= k)
            rows.append(EvalRow(task=task, k=k, accuracy=round(hits / len(ranks), 4), n_cases=len(ranks), seed=seed))
        eval_logger.info(f"{task}: top-1 {rows[-kmax].accuracy:.4f}, top-{kmax} {rows[-1].accuracy:.4f} "
                         f"over {len(ranks)} cases")
    return EvalReport(rows=rows, split=split, seed=seed, outcomes=outcomes)


def evaluate_corpus(graams: list[Graam], ifd: IfdModel, tasks: list[str], ratio: float, seed: int,
                    kmax: int | None = None, mode: str | None = None) -> EvalReport:
    """完整流程：划分 -> 在训练集上训练 -> 为测试集生成用例 -> 评测。"""
    train_set, test_set = split_corpus(graams, ratio, seed)
    fspec, _ = train(train_set)
    cases = []
    for task in tasks:
        cases.extend(generate_cases(test_set, task, seed))
    split = f"train={len(train_set)} test={len(test_set)} ratio={ratio}"
    return run_eval(fspec, ifd, cases, kmax, seed=seed, split=split, mode=mode)


def usage_statistics(graphs: list[UsageGraph]) -> UsageStats:
    """每个程序的用法数，以及用法 API 节点数的分布。"""
    programs = Counter(g.program for g in graphs)
    sizes = Counter(len(g.api_nodes()) for g in graphs)
    return UsageStats(usages=len(graphs), programs=dict(sorted(programs.items())), sizes=dict(sorted(sizes.items())))
