import shutil

import pytest

from core.artifacts import read_graph, read_graph_dir, read_model
from core.exceptions import ManifestError
from core.models.usage_graph import FSpec, Graam, PrimaryApiUsageGraph
from core.pipeline import program_graams, run_pipeline
from core.schemas.graph_schema import UnsoundReport


@pytest.fixture
def project(tmp_path, fixture_root):
    """样例项目的一份可写副本。"""
    target = tmp_path / "jaas-analog"
    shutil.copytree(fixture_root, target, ignore=shutil.ignore_patterns("out"))
    return target


def _snapshot(workspace) -> dict:
    return {p.relative_to(workspace).as_posix(): p.read_bytes()
            for p in sorted(workspace.rglob("*")) if p.is_file()}


class TestRunPipeline:
    """manifest 驱动的完整流程。"""

    def test_pipeline_counts(self, project):
        """测试三个程序：两个可靠、一个不可靠。"""
        result = run_pipeline(project / "manifest.toml", mode="serial")
        assert (result.usages, result.sound, result.unsound) == (3, 2, 1)
        assert len(result.fspec) == 9
        assert result.saturation == 2
        assert result.workspace == project / "out"

    def test_pipeline_artifacts(self, project):
        """测试每个阶段的产物都写进 workspace。"""
        run_pipeline(project / "manifest.toml", mode="serial")
        out = project / "out"
        assert sorted(p.name for p in (out / "facts").iterdir()) == [
            "listing1.json", "listing2-swapped.json", "listing2.json"]
        assert len(read_graph_dir(out / "usages", PrimaryApiUsageGraph)) == 3
        assert [g.program for g in read_graph_dir(out / "sound", PrimaryApiUsageGraph)] == ["listing1", "listing2"]
        report = read_model(out / "unsound.json", UnsoundReport)
        assert [r.graph_id for r in report.rejected] == ["listing2-swapped__LoginUsecase.main"]
        assert len(read_graph_dir(out / "graams", Graam)) == 2
        assert len(read_graph(out / "fspec.json", FSpec)) == 9
        assert (out / "curve.csv").read_text(encoding="utf-8") == (
            "k,cum_graam_nodes,fspec_nodes,fspec_edges\n1,8,8,9\n2,14,9,10\n")
        assert (out / "ifd.json").exists() and (out / "framework.json").exists()

    def test_pipeline_is_deterministic(self, project, tmp_path, fixture_root):
        """测试两次运行（含不同目录、不同并发方式）产物逐字节相同。"""
        run_pipeline(project / "manifest.toml", mode="serial")
        other = tmp_path / "second"
        shutil.copytree(fixture_root, other, ignore=shutil.ignore_patterns("out"))
        run_pipeline(other / "manifest.toml", mode="thread")
        assert _snapshot(project / "out") == _snapshot(other / "out")

    def test_pipeline_bad_manifest(self, tmp_path):
        """测试 manifest 不存在。"""
        with pytest.raises(ManifestError):
            run_pipeline(tmp_path / "manifest.toml")


class TestProgramGraams:
    """直接把查询程序变成 GRAAM。"""

    def test_partial_login(self, fixture_root, jaas_framework, jaas_ifd):
        """测试只创建了 LoginContext 的查询程序。"""
        [g] = program_graams(fixture_root / "queries" / "partial-login", jaas_framework, jaas_ifd)
        assert g.graph_id == "query__PartialLogin.main"
        assert [g.label(n) for n in g.api_nodes()] == [
            "ObjectInit Subject.<init>", "ObjectInit CallbackHandler.<init>", "ObjectInit LoginContext.<init>"]
