from pydantic import BaseModel, Field, field_validator

from core.constant import DEFAULT_SPLIT


class ProgramEntry(BaseModel):
    id: str = Field(..., description="程序标识，用于产物文件名与语料划分")
    path: str = Field(..., description="MiniLang 源码目录，相对 manifest")
    entrypoints: list[str] = Field(default_factory=list, description="为空时取所有 static main")


class ProjectSection(BaseModel):
    name: str
    framework: str = Field(..., description="框架源码目录，相对 manifest")
    workspace: str = "out"
    seed: int | None = Field(default=None, description="eval 的默认种子，缺省取 SPECMINER_DEFAULT_SEED")
    split: float = Field(default=DEFAULT_SPLIT, gt=0, lt=1, description="eval 的默认训练集比例")
    threshold: float = Field(default=0.9, gt=0, le=1)


class Manifest(BaseModel):
    project: ProjectSection
    programs: list[ProgramEntry] = Field(default_factory=list)

    @field_validator("programs")
    @classmethod
    def _unique_ids(cls, programs: list[ProgramEntry]) -> list[ProgramEntry]:
        ids = [p.id for p in programs]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"duplicate program ids: {duplicates}")
        return programs
