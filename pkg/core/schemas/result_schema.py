"""推荐、评测与学习曲线的结果结构。"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.schemas.graph_schema import ApiRef, UsageGraphSchema

_Frozen = ConfigDict(frozen=True)


class Action(str, Enum):
    ADD = "Add"
    REMOVE = "Remove"
    REPLACE = "Replace"
    REORDER = "Reorder"


class Recommendation(BaseModel):
    model_config = _Frozen

    action: Action
    api: ApiRef | None = Field(default=None, description="None 表示建议在此结束使用")
    anchor: str = Field(..., description="查询 GRAAM 中动作作用的节点")
    partner: str | None = Field(default=None, description="Reorder 的另一节点")
    model_node: str | None = Field(default=None, description="对应的 FSpec 节点")
    score: int = Field(..., ge=0)
    rank: int = Field(..., ge=1)

    @property
    def api_label(self) -> str:
        return self.api.label if self.api else "end"


class Misuse(BaseModel):
    model_config = _Frozen

    kind: str = Field(..., description="ifd-violation | order | replace")
    nodes: list[str]
    field: str | None = None
    detail: str = ""


class MutationKind(str, Enum):
    DROP_LAST = "DropLast"
    DROP_RANDOM = "DropRandom"
    SWAP = "Swap"


class TestCase(BaseModel):
    __test__ = False  # 不是 pytest 测试类

    model_config = _Frozen

    id: str
    source: str = Field(..., description="源 GRAAM id")
    mutation: MutationKind
    nodes: list[str] = Field(..., description="被删除或交换的节点")
    label: str = Field(..., description="期望的 API 标签，或 Swap 的 a|b")
    seed: int
    query: UsageGraphSchema


class CaseOutcome(BaseModel):
    model_config = _Frozen

    case_id: str
    task: str
    label: str
    rank: int | None = None


class EvalRow(BaseModel):
    model_config = _Frozen

    task: str
    k: int = Field(..., ge=1)
    accuracy: float = Field(..., ge=0.0, le=1.0)
    n_cases: int
    seed: int


class EvalReport(BaseModel):
    model_config = _Frozen

    rows: list[EvalRow] = Field(default_factory=list)
    split: str = Field(default="", description="例如 train=8 test=2 ratio=0.8")
    seed: int = 0
    outcomes: list[CaseOutcome] = Field(default_factory=list)

    def accuracy(self, task: str, k: int) -> float:
        for row in self.rows:
            if row.task == task and row.k == k:
                return row.accuracy
        raise KeyError((task, k))


class CurveRow(BaseModel):
    model_config = _Frozen

    k: int
    cum_graam_nodes: int
    fspec_nodes: int
    fspec_edges: int


class LearningCurve(BaseModel):
    model_config = _Frozen

    rows: list[CurveRow] = Field(default_factory=list)

    @field_validator("rows")
    @classmethod
    def _monotone(cls, rows: list[CurveRow]) -> list[CurveRow]:
        for prev, cur in zip(rows, rows[1:]):
            if (cur.cum_graam_nodes < prev.cum_graam_nodes or cur.fspec_nodes < prev.fspec_nodes
                    or cur.fspec_edges < prev.fspec_edges):
                raise ValueError(f"learning curve decreases at k={cur.k}")
        return rows


class MergeCandidate(BaseModel):
    model_config = _Frozen

    sub1: list[str] = Field(..., description="FSpec 侧节点（含 start）")
    sub2: list[str] = Field(..., description="GRAAM 侧节点（含 start）")
    bijection: dict[str, str] = Field(..., description="GRAAM 节点 -> FSpec 节点")
    size: int


class UsageStats(BaseModel):
    model_config = _Frozen

    usages: int = 0
    programs: dict[str, int] = Field(default_factory=dict, description="每个程序抽取出的用法数")
    sizes: dict[int, int] = Field(default_factory=dict, description="API 节点数 -> 用法数")

    @property
    def mean_size(self) -> float:
        if not self.usages:
            return 0.0
        return sum(size * count for size, count in self.sizes.items()) / self.usages


class ContextMatch(BaseModel):
    """查询在 FSpec 中的最佳嵌入。"""
    model_config = _Frozen

    mapping: dict[str, str] = Field(..., description="查询节点 -> FSpec 节点")
    region: frozenset[str]
    remainder: tuple[str, ...] = Field(default=(), description="未匹配的查询节点，按查询拓扑序")
    frontier: tuple[str, ...] = ()
    frequency: int = 0
    inverse: dict[str, str] = Field(default_factory=dict)


class Usage(BaseModel):
    """FSpec 中一条 start 到 end 的路径。"""
    model_config = _Frozen

    nodes: tuple[str, ...]
    labels: tuple[str, ...]
    frequency: int = Field(..., ge=0, description="路径上的最小边频次")
