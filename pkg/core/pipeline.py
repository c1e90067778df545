"""分阶段的处理流程，CLI 子命令与 `pipeline` 共用。

收集（解析 + 抽取用法）-> 验证（IFD）-> GRAAM -> 训练。
"""

from pathlib import Path

from pydantic import BaseModel, ConfigDict

from core import analysis_logger, sys_logger, train_logger
from core.artifacts import load_manifest, write_csv, write_graph_dir, write_model
from core.constant import (CURVE_COLUMNS, CURVE_FILE, FACTS_DIR, FRAMEWORK_FILE, FSPEC_FILE, GRAAMS_DIR, IFD_FILE,
                           SOUND_DIR, UNSOUND_FILE, USAGES_DIR)
from core.exceptions import EmptyUsageError
from core.fspec import saturation_point, train
from core.frontend.callgraph import build_call_graph
from core.frontend.lowering import load_framework, lower
from core.frontend.parser import parse_directory
from core.frontend.sdg import build_sdg
from core.graam import build_graam
from core.ifd import IfdModel, filter_sound, mine_ifd
from core.models.hierarchy import build_class_hierarchy
from core.models.usage_graph import FSpec, Graam, PrimaryApiUsageGraph
from core.schemas.graph_schema import UnsoundReport
from core.schemas.program_schema import FrameworkModel, ProgramFacts
from core.schemas.result_schema import LearningCurve
from core.slicer import build_primary_graph, slice_sdg
from core.utils.concurrency import run_tasks


def load_framework_dir(path: str | Path, name: str | None = None) -> FrameworkModel:
    path = Path(path)
    framework = load_framework(parse_directory(path), name or path.name)
    analysis_logger.info(f"framework {framework.name}: {len(framework.types)} types, "
                         f"{len(framework.method_bodies)} method bodies")
    return framework


def analyze_program(program: str, source: str | Path, framework: FrameworkModel,
                    entrypoints: list[str] | None = None) -> ProgramFacts:
    """解析并降级一个程序。"""
    facts = lower(parse_directory(source), framework, program, entrypoints or None)
    n_stmts = sum(len(m.statements) for m in facts.methods)
    analysis_logger.bind(program=program).info(
        f"{len(facts.methods)} methods, {n_stmts} statements, entrypoints {facts.entrypoints}")
    return facts


def extract_usages(facts: ProgramFacts, framework: FrameworkModel) -> list[PrimaryApiUsageGraph]:
    """每个入口一个 primary 图；没有框架 API 的入口跳过。

    Raises:
        EmptyUsageError: 所有入口都没有用到框架 API。
    """
    ch = build_class_hierarchy(framework, facts.types)
    cg = build_call_graph(facts, ch)
    sdg = build_sdg(cg, facts)
    sliced = slice_sdg(sdg, framework, ch)
    log = analysis_logger.bind(program=facts.program)
    log.info(f"{len(cg.contexts())} contexts, {sdg.graph.number_of_nodes()} SDG nodes, "
             f"{sliced.graph.number_of_nodes()} in slice")
    usages = []
    for entry in facts.entrypoints:
        try:
            usages.append(build_primary_graph(sliced, entry, ch, graph_id=f"{facts.program}__{entry}"))
        except EmptyUsageError as e:
            log.warning(str(e))
    if not usages:
        raise EmptyUsageError(f"{facts.program}: no entrypoint uses the framework")
    return usages


def collect_program(program: str, source: str | Path, framework: FrameworkModel,
                    entrypoints: list[str] | None = None) -> tuple[ProgramFacts, list[PrimaryApiUsageGraph]]:
    facts = analyze_program(program, source, framework, entrypoints)
    return facts, extract_usages(facts, framework)


def build_graams(usages: list[PrimaryApiUsageGraph], ifd: IfdModel, mode: str | None = None) -> list[Graam]:
    graams = run_tasks(build_graam, [(g, ifd) for g in usages], mode=mode, logger=analysis_logger)
    analysis_logger.info(f"built {len(graams)} graams")
    return graams


def program_graams(source: str | Path, framework: FrameworkModel, ifd: IfdModel, program: str = "query",
                   entrypoints: list[str] | None = None) -> list[Graam]:
    """把一个（可能不完整的）程序直接变成 GRAAM，不做可靠性过滤。"""
    _, usages = collect_program(program, source, framework, entrypoints)
    return [build_graam(g, ifd) for g in usages]


class PipelineResult(BaseModel):
    """pipeline 的摘要；fspec 是 networkx 模型，不做校验。"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    workspace: Path
    usages: int
    sound: int
    unsound: int
    fspec: FSpec
    curve: LearningCurve
    saturation: int | None


def run_pipeline(manifest_path: str | Path, mode: str | None = None, ifd_depth: int | None = None) -> PipelineResult:
    """按 manifest 跑完收集、验证、GRAAM、训练四个阶段，所有产物写进 workspace。"""
    manifest, root = load_manifest(manifest_path)
    workspace = root / manifest.project.workspace
    sys_logger.info(f"pipeline {manifest.project.name}: {len(manifest.programs)} programs -> {workspace}")

    framework = load_framework_dir(root / manifest.project.framework, manifest.project.name)
    write_model(workspace / FRAMEWORK_FILE, framework)

    collected = run_tasks(collect_program,
                          [(p.id, root / p.path, framework, p.entrypoints) for p in manifest.programs],
                          mode=mode, logger=analysis_logger)
    usages = []
    for facts, graphs in collected:
        write_model(workspace / FACTS_DIR / f"{facts.program}.json", facts)
        usages.extend(graphs)
    write_graph_dir(workspace / USAGES_DIR, usages)

    ifd = mine_ifd(framework, ifd_depth)
    write_model(workspace / IFD_FILE, ifd.to_schema())
    sound, unsound = filter_sound(usages, ifd, mode=mode)
    write_graph_dir(workspace / SOUND_DIR, sound)
    write_model(workspace / UNSOUND_FILE, UnsoundReport(rejected=unsound))

    graams = build_graams(sound, ifd, mode)
    write_graph_dir(workspace / GRAAMS_DIR, graams)

    fspec, curve = train(graams)
    write_model(workspace / FSPEC_FILE, fspec.to_schema())
    write_csv(workspace / CURVE_FILE, CURVE_COLUMNS, [row.model_dump() for row in curve.rows])
    saturation = saturation_point(curve, manifest.project.threshold) if curve.rows else None
    train_logger.info(f"pipeline done: {len(sound)} sound usages, fspec {len(fspec)} nodes, saturation {saturation}")
    return PipelineResult(workspace=workspace, usages=len(usages), sound=len(sound), unsound=len(unsound),
                          fspec=fspec, curve=curve, saturation=saturation)
