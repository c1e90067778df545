"""API 语句与使用图（primary / graam / fspec）的序列化结构。"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from core.constant import END_LABEL, START_LABEL

_Frozen = ConfigDict(frozen=True)


class ApiKind(str, Enum):
    OBJECT_INIT = "ObjectInit"
    METHOD_INVOKE = "MethodInvoke"
    FIELD_READ = "FieldRead"
    FIELD_WRITE = "FieldWrite"


class Relation(str, Enum):
    DIRECT = "Direct"
    INDIRECT = "IndirectViaInheritance"
    NONE = "None"


class NodeRole(str, Enum):
    START = "start"
    END = "end"
    API = "api"


class EdgeKind(str, Enum):
    SEQUENCE = "sequence"
    DATA = "data"
    ORDER = "order"


class EdgeOrigin(str, Enum):
    DATA = "data"
    IFD = "ifd"
    START = "start"
    END = "end"


class GraphKind(str, Enum):
    PRIMARY = "primary"
    GRAAM = "graam"
    FSPEC = "fspec"


class ApiRef(BaseModel):
    """An API identity: kind, framework target type and member."""

    model_config = _Frozen

    kind: ApiKind
    target_type: str
    member: str

    @property
    def label(self) -> str:
        return f"{self.kind.value} {self.target_type}.{self.member}"

    @property
    def method_name(self) -> str:
        return self.member.split("(", 1)[0]


class StatementLocation(BaseModel):
    model_config = _Frozen

    file: str
    method: str
    index: int


class ApiStatement(BaseModel):
    model_config = _Frozen

    id: str = Field(..., description="SDG 节点 id（context/index），图内唯一")
    kind: ApiKind
    target_type: str = Field(..., description="框架类型；间接语句取最近的框架父类型")
    declared_type: str = Field(..., description="语句实际作用的静态类型（可能是应用类）")
    owner: str | None = Field(default=None, description="声明该成员的类型")
    member: str
    relation: Relation
    location: StatementLocation

    @property
    def ref(self) -> ApiRef:
        return ApiRef(kind=self.kind, target_type=self.target_type, member=self.member)

    @property
    def label(self) -> str:
        return self.ref.label

    @property
    def method_key(self) -> str | None:
        """`Owner.method` used to look up IFD edges; None for non-invocations."""
        if self.kind != ApiKind.METHOD_INVOKE or self.owner is None:
            return None
        return f"{self.owner}.{self.ref.method_name}"


def node_label(role: NodeRole, api: ApiStatement | None) -> str:
    if role == NodeRole.START:
        return START_LABEL
    if role == NodeRole.END:
        return END_LABEL
    return api.label


class NodeSchema(BaseModel):
    model_config = _Frozen

    id: str
    role: NodeRole
    api: ApiStatement | None = None
    position: int | None = None
    receiver: str | None = None


class EdgeSchema(BaseModel):
    model_config = _Frozen

    source: str
    target: str
    kind: EdgeKind
    origin: EdgeOrigin | None = None
    frequency: int | None = Field(default=None, ge=1)


class UsageGraphSchema(BaseModel):
    model_config = _Frozen

    graph_kind: GraphKind
    graph_id: str
    program: str = ""
    entrypoint: str = ""
    nodes: list[NodeSchema] = Field(default_factory=list)
    edges: list[EdgeSchema] = Field(default_factory=list)


# ===== IFD =====

class IfdEdge(BaseModel):
    model_config = ConfigDict(frozen=True)

    writer: str = Field(..., description="限定方法名，例如 LoginContext.login")
    reader: str
    field: str = Field(..., description="限定字段名，例如 LoginContext.subject")


class IfdModelSchema(BaseModel):
    model_config = _Frozen

    framework: str = ""
    edges: list[IfdEdge] = Field(default_factory=list)


class Violation(BaseModel):
    model_config = _Frozen

    program: str
    graph_id: str = ""
    reader: str = Field(..., description="先执行的读者节点 id")
    writer: str = Field(..., description="之后才执行的写者节点 id")
    reader_api: str = ""
    writer_api: str = ""
    field: str
    rule: str = "reader-before-writer"


class UnsoundUsage(BaseModel):
    model_config = _Frozen

    graph_id: str
    program: str
    violations: list[Violation]


class UnsoundReport(BaseModel):
    model_config = _Frozen

    rejected: list[UnsoundUsage] = Field(default_factory=list)
