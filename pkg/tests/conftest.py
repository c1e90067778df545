# tests/conftest.py
import pytest
import sys
import os
from pathlib import Path

# -------------------------
# 自动添加项目根目录到 Python 搜索路径
# -------------------------
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from core.frontend.lowering import load_framework, lower  # noqa: E402
from core.frontend.parser import parse  # noqa: E402
from core.fspec import train  # noqa: E402
from core.graam import build_graam  # noqa: E402
from core.ifd import mine_ifd  # noqa: E402
from core.pipeline import collect_program, extract_usages, load_framework_dir  # noqa: E402

FIXTURE_ROOT = Path(project_root) / "fixtures" / "jaas-analog"

# -------------------------
# Pytest 插件声明（如果需要可扩展）
# -------------------------
pytest_plugins = []

# -------------------------
# 自定义 marker 注册
# -------------------------
def pytest_configure(config):
    """注册自定义 pytest marker"""
    config.addinivalue_line(
        "markers",
        "slow: marks tests as slow (skip with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers",
        "integration: marks tests as integration tests"
    )

# -------------------------
# 自动给测试打 marker
# -------------------------
def pytest_collection_modifyitems(config, items):
    """在测试收集后修改测试 item"""
    for item in items:
        # 名称包含 "performance" 或 "property" 自动打 slow
        if "performance" in item.name or "property" in item.name:
            item.add_marker(pytest.mark.slow)

        # 名称包含 "pipeline" 或 "mixed_scenario" 打 integration
        if "pipeline" in item.name or "mixed_scenario" in item.name:
            item.add_marker(pytest.mark.integration)


# -------------------------
# JAAS 样例框架与程序
# -------------------------
@pytest.fixture(scope="session")
def fixture_root() -> Path:
    return FIXTURE_ROOT


@pytest.fixture(scope="session")
def jaas_framework():
    return load_framework_dir(FIXTURE_ROOT / "framework", "jaas-analog")


@pytest.fixture(scope="session")
def jaas_ifd(jaas_framework):
    return mine_ifd(jaas_framework, depth=1)


@pytest.fixture(scope="session")
def listing_usages(jaas_framework) -> dict:
    """程序 id -> 该程序唯一入口的 primary 图。"""
    usages = {}
    for program in ("listing1", "listing2", "listing2-swapped"):
        _, graphs = collect_program(program, FIXTURE_ROOT / "programs" / program, jaas_framework)
        usages[program] = graphs[0]
    return usages


@pytest.fixture(scope="session")
def listing_graams(listing_usages, jaas_ifd) -> dict:
    return {program: build_graam(g, jaas_ifd) for program, g in listing_usages.items()}


@pytest.fixture(scope="session")
def jaas_fspec(listing_graams):
    """由两个可靠程序训练出的 FSpec。"""
    fspec, _ = train([listing_graams["listing1"], listing_graams["listing2"]])
    return fspec


@pytest.fixture
def build_usages():
    """从内联源码构建 primary 图：build_usages(framework_src, program_src, entrypoints=None)。"""
    def _build(framework_src: str, program_src: str, entrypoints=None, program: str = "inline"):
        framework = load_framework([parse(framework_src, "Framework.mini")], "inline-fw")
        facts = lower([parse(program_src, "Main.mini")], framework, program, entrypoints)
        return extract_usages(facts, framework)
    return _build


def node_with_label(g, label: str) -> str:
    """图中带某标签的唯一节点。"""
    nodes = [n for n in g.graph.nodes if g.label(n) == label]
    assert len(nodes) == 1, f"{label}: {nodes}"
    return nodes[0]


@pytest.fixture
def find_node():
    return node_with_label
