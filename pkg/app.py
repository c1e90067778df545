"""specminer 命令行入口。

    python app.py pipeline fixtures/jaas-analog/manifest.toml
    python app.py recommend --fspec out/fspec.json --program partial/ --framework fw/ --task next

退出码：0 成功，1 用法错误，2 输入错误，3 分析错误。
"""

import argparse
import json
import sys
from pathlib import Path

from core import sys_logger
from core.artifacts import (csv_text, load_manifest, read_any_graph_dir, read_graph, read_graph_dir, read_model,
                            write_csv, write_graph_dir, write_model)
from core.config import settings
from core.constant import (CURVE_COLUMNS, DEFAULT_SPLIT, EXIT_ANALYSIS_ERROR, EXIT_OK, EXIT_USAGE, FRAMEWORK_FILE,
                           GRAAMS_DIR, REPORT_COLUMNS, TASKS)
from core.exceptions import InputError, SpecMinerError
from core.evaluation import evaluate_corpus, generate_cases, run_eval, split_corpus, usage_statistics
from core.fspec import enumerate_usages, saturation_point, train
from core.ifd import IfdModel, filter_sound, mine_ifd
from core.models.usage_graph import FSpec, Graam, PrimaryApiUsageGraph
from core.pipeline import (analyze_program, build_graams, extract_usages, load_framework_dir, program_graams,
                           run_pipeline)
from core.recommend import detect_misuse, detect_missed, next_api
from core.schemas.graph_schema import IfdModelSchema, UnsoundReport
from core.schemas.program_schema import FrameworkModel, ProgramFacts


class _Parser(argparse.ArgumentParser):
    """用法错误以退出码 1 结束（argparse 默认是 2，与输入错误冲突）。"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(data, fmt: str, table):
    if fmt == "json":
        print(json.dumps(data, ensure_ascii=False, indent=2))
    else:
        print(table())


# ===== 子命令注册 =====

def add_parse_command(subparsers):
    parser = subparsers.add_parser("parse", help="parse and lower one program")
    parser.add_argument("source", help="directory of MiniLang sources")
    parser.add_argument("--framework", required=True, help="directory of framework MiniLang sources")
    parser.add_argument("-o", "--output", required=True, help="facts JSON")
    parser.add_argument("--framework-out", help="also write the framework model JSON")
    parser.add_argument("--entrypoint", action="append", default=[], help="Class.method (repeatable)")
    parser.add_argument("--program", help="program id (default: source directory name)")


def add_extract_command(subparsers):
    parser = subparsers.add_parser("extract", help="extract primary API usage graphs")
    parser.add_argument("facts", help="facts JSON")
    parser.add_argument("--framework", required=True, help="framework model JSON")
    parser.add_argument("-o", "--output", required=True, help="usage graph directory")


def add_validate_command(subparsers):
    parser = subparsers.add_parser("validate", help="reject usages that violate framework dependencies")
    parser.add_argument("usages", help="usage graph directory")
    parser.add_argument("--framework", required=True, help="framework model JSON")
    parser.add_argument("-o", "--output", required=True, help="directory for sound usages")
    parser.add_argument("--rejected", required=True, help="JSON report of unsound usages")
    parser.add_argument("--ifd-out", help="write the mined dependency model")
    parser.add_argument("--ifd-transitive-depth", type=int, default=None)


def add_graam_command(subparsers):
    parser = subparsers.add_parser("graam", help="build GRAAMs from sound usages")
    parser.add_argument("sound", help="sound usage directory")
    parser.add_argument("--ifd", required=True, help="dependency model JSON")
    parser.add_argument("-o", "--output", required=True, help="GRAAM directory")


def add_train_command(subparsers):
    parser = subparsers.add_parser("train", help="merge GRAAMs into a specification model")
    parser.add_argument("graams", help="GRAAM directory")
    parser.add_argument("-o", "--output", required=True, help="FSpec JSON")
    parser.add_argument("--curve", help="learning curve CSV")
    parser.add_argument("--threshold", type=float, default=None)


def add_recommend_command(subparsers):
    parser = subparsers.add_parser("recommend", help="query a trained model with a partial program")
    parser.add_argument("--fspec", required=True)
    parser.add_argument("--program", required=True, help="MiniLang file or directory")
    parser.add_argument("--framework", required=True, help="directory of framework MiniLang sources")
    parser.add_argument("--task", required=True, choices=TASKS)
    parser.add_argument("--ifd", help="dependency model JSON (default: mined from --framework)")
    parser.add_argument("--entrypoint", action="append", default=[])
    parser.add_argument("-k", type=int, default=None)
    parser.add_argument("--format", choices=("json", "table"), default="json")


def add_eval_command(subparsers):
    parser = subparsers.add_parser("eval", help="top-k accuracy on a held-out split")
    parser.add_argument("--manifest", help="manifest TOML: seed, split and the pipeline workspace as defaults")
    parser.add_argument("--corpus", help="GRAAM directory (default: <workspace>/graams)")
    parser.add_argument("--framework", help="framework model JSON (default: <workspace>/framework.json)")
    parser.add_argument("--task", required=True, choices=(*TASKS, "all"))
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--split", type=float, default=None, help=f"train ratio (default: manifest or {DEFAULT_SPLIT})")
    parser.add_argument("-k", type=int, default=None)
    parser.add_argument("-o", "--output", required=True, help="report CSV")
    parser.add_argument("--cases", help="per-case log JSON")


def add_pipeline_command(subparsers):
    parser = subparsers.add_parser("pipeline", help="run every phase from a manifest")
    parser.add_argument("manifest", help="manifest TOML")
    parser.add_argument("--ifd-transitive-depth", type=int, default=None)


def add_paths_command(subparsers):
    parser = subparsers.add_parser("paths", help="list the usages encoded in a model")
    parser.add_argument("fspec")
    parser.add_argument("--limit", type=int, default=200)
    parser.add_argument("--format", choices=("json", "table"), default="table")


def add_stats_command(subparsers):
    parser = subparsers.add_parser("stats", help="usage counts per program and size distribution")
    parser.add_argument("usages", help="usage or GRAAM directory")
    parser.add_argument("--format", choices=("json", "table"), default="table")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specminer", description="Learn framework API specifications from example programs")
    parser.add_argument("--workers", type=int, default=None, help="worker count")
    parser.add_argument("--worker-mode", choices=("serial", "thread", "process"), default=None)
    subparsers = parser.add_subparsers(dest="cmd", parser_class=_Parser)
    subparsers.required = True
    for add in (add_parse_command, add_extract_command, add_validate_command, add_graam_command,
                add_train_command, add_recommend_command, add_eval_command, add_pipeline_command,
                add_paths_command, add_stats_command):
        add(subparsers)
    return parser


# ===== 子命令实现 =====

def handle_parse(args) -> int:
    framework = load_framework_dir(args.framework)
    program = args.program or Path(args.source).resolve().name
    facts = analyze_program(program, args.source, framework, args.entrypoint)
    write_model(args.output, facts)
    if args.framework_out:
        write_model(args.framework_out, framework)
    return EXIT_OK


def handle_extract(args) -> int:
    facts = read_model(args.facts, ProgramFacts)
    framework = read_model(args.framework, FrameworkModel)
    usages = extract_usages(facts, framework)
    write_graph_dir(args.output, usages)
    return EXIT_OK


def handle_validate(args) -> int:
    framework = read_model(args.framework, FrameworkModel)
    usages = read_graph_dir(args.usages, PrimaryApiUsageGraph)
    ifd = mine_ifd(framework, args.ifd_transitive_depth)
    sound, unsound = filter_sound(usages, ifd, mode=args.worker_mode, worker_count=args.workers)
    write_graph_dir(args.output, sound)
    write_model(args.rejected, UnsoundReport(rejected=unsound))
    if args.ifd_out:
        write_model(args.ifd_out, ifd.to_schema())
    return EXIT_OK


def handle_graam(args) -> int:
    ifd = IfdModel.from_schema(read_model(args.ifd, IfdModelSchema))
    usages = read_graph_dir(args.sound, PrimaryApiUsageGraph)
    write_graph_dir(args.output, build_graams(usages, ifd, args.worker_mode))
    return EXIT_OK


def handle_train(args) -> int:
    graams = read_graph_dir(args.graams, Graam)
    fspec, curve = train(graams)
    write_model(args.output, fspec.to_schema())
    if args.curve:
        write_csv(args.curve, CURVE_COLUMNS, [row.model_dump() for row in curve.rows])
    if curve.rows:
        print(f"saturation: {saturation_point(curve, args.threshold)} of {len(curve.rows)}")
    return EXIT_OK


def _recommend_table(results: list[dict]) -> str:
    lines = []
    for result in results:
        lines.append(f"# {result['graph_id']} ({result['task']})")
        if result.get("error"):
            lines.append(f"  {result['error']}")
        for misuse in result.get("misuses", []):
            lines.append(f"  misuse {misuse['kind']}: {', '.join(misuse['nodes'])} {misuse.get('field') or ''}".rstrip())
        for rec in result["recommendations"]:
            api = rec["api"]
            label = f"{api['kind']} {api['target_type']}.{api['member']}" if api else "end"
            partner = f" <-> {rec['partner']}" if rec.get("partner") else ""
            lines.append(f"  {rec['rank']:>3}  {rec['action']:<8} {label}  @{rec['anchor']}{partner}  "
                         f"score={rec['score']}")
    return "\n".join(lines)


def handle_recommend(args) -> int:
    fspec = read_graph(args.fspec, FSpec)
    framework = load_framework_dir(args.framework)
    ifd = IfdModel.from_schema(read_model(args.ifd, IfdModelSchema)) if args.ifd else mine_ifd(framework)
    k = settings.EVAL_KMAX if args.k is None else args.k
    source = Path(args.program)
    if source.is_file():
        source = source.parent
    results = []
    for g in program_graams(source, framework, ifd, "query", args.entrypoint):
        result = {"graph_id": g.graph_id, "task": args.task, "misuses": [], "recommendations": []}
        try:
            if args.task == "next":
                recs = next_api(fspec, g, k)
            elif args.task == "missed":
                recs = detect_missed(fspec, g, k)
            else:
                misuses, recs = detect_misuse(fspec, ifd, g, k)
                result["misuses"] = [m.model_dump(mode="json") for m in misuses]
        except SpecMinerError as e:
            # 查询结果类异常（无匹配 / 无缺失）照常输出
            recs = []
            result["error"] = str(e)
        result["recommendations"] = [r.model_dump(mode="json") for r in recs]
        results.append(result)
    _emit(results, args.format, lambda: _recommend_table(results))
    return EXIT_OK


def _eval_inputs(args) -> tuple[Path, Path, float, int]:
    """命令行参数优先，其次 manifest，最后是全局默认值。"""
    corpus, framework, split, seed = args.corpus, args.framework, args.split, args.seed
    if args.manifest:
        manifest, root = load_manifest(args.manifest)
        workspace = root / manifest.project.workspace
        corpus = corpus or workspace / GRAAMS_DIR
        framework = framework or workspace / FRAMEWORK_FILE
        split = manifest.project.split if split is None else split
        seed = manifest.project.seed if seed is None else seed
    if corpus is None or framework is None:
        raise InputError("eval needs --manifest, or both --corpus and --framework")
    split = DEFAULT_SPLIT if split is None else split
    seed = settings.DEFAULT_SEED if seed is None else seed
    return Path(corpus), Path(framework), split, seed


def handle_eval(args) -> int:
    corpus, framework_path, split, seed = _eval_inputs(args)
    graams = read_graph_dir(corpus, Graam)
    framework = read_model(framework_path, FrameworkModel)
    ifd = mine_ifd(framework)
    tasks = list(TASKS) if args.task == "all" else [args.task]
    if args.cases:
        train_set, test_set = split_corpus(graams, split, seed)
        fspec, _ = train(train_set)
        cases = [c for task in tasks for c in generate_cases(test_set, task, seed)]
        report = run_eval(fspec, ifd, cases, args.k, seed=seed,
                          split=f"train={len(train_set)} test={len(test_set)} ratio={split}",
                          mode=args.worker_mode, worker_count=args.workers)
        by_id = {o.case_id: o for o in report.outcomes}
        log = [{"id": c.id, "task": by_id[c.id].task, "mutation": c.mutation.value, "nodes": c.nodes,
                "label": c.label, "rank": by_id[c.id].rank} for c in cases]
        Path(args.cases).parent.mkdir(parents=True, exist_ok=True)
        Path(args.cases).write_text(json.dumps(log, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    else:
        report = evaluate_corpus(graams, ifd, tasks, split, seed, args.k, mode=args.worker_mode)
    rows = [{**row.model_dump(), "accuracy": f"{row.accuracy:.4f}"} for row in report.rows]
    write_csv(args.output, REPORT_COLUMNS, rows)
    print(csv_text(REPORT_COLUMNS, rows), end="")
    return EXIT_OK


def handle_pipeline(args) -> int:
    result = run_pipeline(args.manifest, mode=args.worker_mode, ifd_depth=args.ifd_transitive_depth)
    print(f"workspace: {result.workspace}")
    print(f"usages: {result.usages} (sound {result.sound}, unsound {result.unsound})")
    print(f"fspec: {len(result.fspec)} nodes, {result.fspec.graph.number_of_edges()} edges")
    if result.saturation is not None:
        print(f"saturation: {result.saturation} of {len(result.curve.rows)}")
    return EXIT_OK


def handle_paths(args) -> int:
    fspec = read_graph(args.fspec, FSpec)
    usages = enumerate_usages(fspec, args.limit)
    data = [{"frequency": u.frequency, "nodes": list(u.nodes), "apis": list(u.labels)} for u in usages]
    _emit(data, args.format, lambda: "\n".join(f"{u.frequency:>5}  {' -> '.join(u.labels)}" for u in usages))
    return EXIT_OK


def handle_stats(args) -> int:
    stats = usage_statistics(read_any_graph_dir(args.usages))

    def table() -> str:
        lines = [f"usages: {stats.usages}  programs: {len(stats.programs)}  mean API nodes: {stats.mean_size:.2f}"]
        lines += [f"  {program:<30} {count}" for program, count in stats.programs.items()]
        lines += [f"  size {size:>3}: {count}" for size, count in stats.sizes.items()]
        return "\n".join(lines)

    _emit(stats.model_dump(mode="json"), args.format, table)
    return EXIT_OK


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    handler = globals()[f"handle_{args.cmd}"]
    try:
        return handler(args)
    except SpecMinerError as e:
        sys_logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception:
        sys_logger.opt(exception=True).error(f"{args.cmd} failed")
        return EXIT_ANALYSIS_ERROR


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
