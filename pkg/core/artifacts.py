"""产物读写：JSON（pydantic 模型 / 使用图）、CSV 与 TOML manifest。

读失败一律转成 ArtifactError / ManifestError，附带出错的路径。
输出保证字节稳定：键顺序固定、列表已排序、统一换行。
"""

import csv
import io

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import TypeVar

from pydantic import BaseModel, ValidationError

from core.exceptions import ArtifactError, ManifestError
from core.models.usage_graph import FSpec, Graam, PrimaryApiUsageGraph, UsageGraph
from core.schemas.graph_schema import GraphKind, UsageGraphSchema
from core.schemas.manifest_schema import Manifest

M = TypeVar("M", bound=BaseModel)
G = TypeVar("G", bound=UsageGraph)


def write_model(path: str | Path, model: BaseModel):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")


def read_model(path: str | Path, cls: type[M]) -> M:
    path = Path(path)
    try:
        return cls.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ArtifactError(f"{path}: file not found") from None
    except ValidationError as e:
        raise ArtifactError(f"{path}: invalid {cls.__name__}: {e.error_count()} error(s)\n{e}") from None
    except (OSError, UnicodeDecodeError) as e:
        raise ArtifactError(f"{path}: {e}") from None


def write_graph(path: str | Path, graph: UsageGraph):
    write_model(path, graph.to_schema())


def read_graph(path: str | Path, cls: type[G]) -> G:
    return cls.from_schema(read_model(path, UsageGraphSchema))


def write_graph_dir(directory: str | Path, graphs: list[UsageGraph]) -> list[Path]:
    """每个图写一个 `<graph_id>.json`；目录中原有的 `*.json` 先删除，重跑时不留旧图。"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for stale in directory.glob("*.json"):
        stale.unlink()
    written = []
    for g in graphs:
        path = directory / f"{g.graph_id}.json"
        write_graph(path, g)
        written.append(path)
    return written


def read_graph_dir(directory: str | Path, cls: type[G]) -> list[G]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ArtifactError(f"{directory}: not a directory")
    return [read_graph(p, cls) for p in sorted(directory.glob("*.json"))]


def csv_text(columns: list[str], rows: list[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row[c] for c in columns})
    return buffer.getvalue()


def write_csv(path: str | Path, columns: list[str], rows: list[dict]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(columns, rows), encoding="utf-8")


def load_manifest(path: str | Path) -> tuple[Manifest, Path]:
    """读取并校验 manifest，返回 (manifest, manifest 所在目录)。

    Raises:
        ManifestError: 文件缺失、TOML 语法错误、字段不合法或引用的目录不存在。
    """
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ManifestError(f"{path}: manifest not found") from None
    except tomllib.TOMLDecodeError as e:
        raise ManifestError(f"{path}: malformed TOML: {e}") from None
    try:
        manifest = Manifest.model_validate(data)
    except ValidationError as e:
        raise ManifestError(f"{path}: invalid manifest\n{e}") from None

    root = path.parent
    framework = root / manifest.project.framework
    if not framework.is_dir():
        raise ManifestError(f"{path}: framework directory not found: {framework}")
    for program in manifest.programs:
        source = root / program.path
        if not source.is_dir():
            raise ManifestError(f"{path}: program {program.id}: directory not found: {source}")
    return manifest, root


GRAPH_TYPES: dict[GraphKind, type[UsageGraph]] = {
    GraphKind.PRIMARY: PrimaryApiUsageGraph,
    GraphKind.GRAAM: Graam,
    GraphKind.FSPEC: FSpec,
}


def read_any_graph_dir(directory: str | Path) -> list[UsageGraph]:
    """目录中的使用图，按各文件自带的 graph_kind 还原。"""
    directory = Path(directory)
    if not directory.is_dir():
        raise ArtifactError(f"{directory}: not a directory")
    graphs = []
    for path in sorted(directory.glob("*.json")):
        schema = read_model(path, UsageGraphSchema)
        graphs.append(GRAPH_TYPES[schema.graph_kind].from_schema(schema))
    return graphs
