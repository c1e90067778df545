"""框架模型与程序事实（ProgramFacts）的数据结构。

全部为不可变 pydantic 模型，可直接 JSON 序列化；字段名统一 snake_case。
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class TypeKind(str, Enum):
    CLASS = "class"
    INTERFACE = "interface"


class Origin(str, Enum):
    FRAMEWORK = "framework"
    APP = "app"


class AccessMode(str, Enum):
    READ = "read"
    WRITE = "write"


class StmtOp(str, Enum):
    PARAM = "param"
    ASSIGN = "assign"
    NEW = "new"
    CALL = "call"
    FIELD_READ = "field_read"
    FIELD_WRITE = "field_write"
    COMPUTE = "compute"
    BRANCH = "branch"
    RETURN = "return"
    TRY_ENTER = "try_enter"
    CATCH = "catch"


_Frozen = ConfigDict(frozen=True)


# ===== 类型声明 =====

class FieldDecl(BaseModel):
    model_config = _Frozen

    name: str
    type_name: str
    is_static: bool = False


class ParamDecl(BaseModel):
    model_config = _Frozen

    name: str
    type_name: str


class MethodSig(BaseModel):
    model_config = _Frozen

    name: str = Field(..., description="方法名；构造器为 <init>")
    params: list[ParamDecl] = Field(default_factory=list)
    return_type: str = "void"
    is_static: bool = False
    has_body: bool = True

    @property
    def signature(self) -> str:
        return f"{self.name}({','.join(p.type_name for p in self.params)})"


class TypeDecl(BaseModel):
    model_config = _Frozen

    name: str
    kind: TypeKind = TypeKind.CLASS
    extends: list[str] = Field(default_factory=list, description="父类；接口的父接口也写在这里")
    implements: list[str] = Field(default_factory=list)
    fields: list[FieldDecl] = Field(default_factory=list)
    methods: list[MethodSig] = Field(default_factory=list)
    origin: Origin = Origin.APP
    file: str = ""

    @property
    def supertypes(self) -> list[str]:
        return [*self.extends, *self.implements]

    def field(self, name: str) -> FieldDecl | None:
        return next((f for f in self.fields if f.name == name), None)

    def method(self, name: str) -> MethodSig | None:
        return next((m for m in self.methods if m.name == name), None)


# ===== 框架模型 =====

class FieldAccess(BaseModel):
    model_config = _Frozen

    field: str = Field(..., description="限定字段名，例如 LoginContext.subject")
    mode: AccessMode


class FrameworkMethodBody(BaseModel):
    model_config = _Frozen

    method: str = Field(..., description="限定方法名，例如 LoginContext.login")
    accesses: list[FieldAccess] = Field(default_factory=list)
    calls: list[str] = Field(default_factory=list, description="同类内部调用的限定方法名")


class FrameworkModel(BaseModel):
    model_config = _Frozen

    name: str
    types: list[TypeDecl] = Field(default_factory=list)
    method_bodies: list[FrameworkMethodBody] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_accesses(self):
        declared = {f"{t.name}.{f.name}" for t in self.types for f in t.fields}
        for body in self.method_bodies:
            for access in body.accesses:
                if access.field not in declared:
                    raise ValueError(f"{body.method} accesses undeclared field {access.field}")
        return self

    def type_map(self) -> dict[str, TypeDecl]:
        return {t.name: t for t in self.types}


# ===== 程序事实 =====

class Statement(BaseModel):
    """一条三地址语句。target_type 为 None 表示外部（未声明）类型。"""

    model_config = _Frozen

    index: int
    op: StmtOp
    defs: list[str] = Field(default_factory=list)
    uses: list[str] = Field(default_factory=list)
    receiver: str | None = None
    args: list[str | None] = Field(default_factory=list)
    target_type: str | None = None
    owner: str | None = Field(default=None, description="声明该成员的类型")
    member: str | None = None
    signature: str | None = None
    is_static: bool = False
    controlled_by: int | None = None
    line: int = 0


class DefUse(BaseModel):
    model_config = _Frozen

    def_index: int
    use_index: int
    var: str


class MethodFacts(BaseModel):
    model_config = _Frozen

    name: str = Field(..., description="限定方法名 Class.method")
    class_name: str
    params: list[str] = Field(default_factory=list, description="形参名，实例方法首位为 this")
    is_static: bool = False
    file: str = ""
    statements: list[Statement] = Field(default_factory=list)
    def_use: list[DefUse] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_pairs(self):
        n = len(self.statements)
        for du in self.def_use:
            if not (0 <= du.def_index < n and 0 <= du.use_index < n):
                raise ValueError(f"{self.name}: def/use pair {du.def_index}->{du.use_index} out of range")
        return self


class CallSite(BaseModel):
    model_config = _Frozen

    method: str
    index: int
    static_target: str | None = None
    receiver_type: str | None = None

    @property
    def site_id(self) -> str:
        return f"{self.method}#{self.index}"


class ProgramFacts(BaseModel):
    model_config = _Frozen

    program: str
    types: list[TypeDecl] = Field(default_factory=list)
    methods: list[MethodFacts] = Field(default_factory=list)
    entrypoints: list[str] = Field(default_factory=list)
    call_sites: list[CallSite] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_entrypoints(self):
        names = {m.name for m in self.methods}
        missing = [e for e in self.entrypoints if e not in names]
        if missing:
            raise ValueError(f"entrypoints not found among methods: {missing}")
        return self

    def method_map(self) -> dict[str, MethodFacts]:
        return {m.name: m for m in self.methods}
