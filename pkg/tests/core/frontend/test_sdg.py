from core.frontend.callgraph import build_call_graph
from core.frontend.lowering import load_framework, lower
from core.frontend.parser import parse
from core.frontend.sdg import CONTROL, DATA, build_sdg
from core.models.hierarchy import build_class_hierarchy

FRAMEWORK_SRC = "class Conn { void open() { } }"


def _sdg(source: str):
    framework = load_framework([parse(FRAMEWORK_SRC, "Fw.mini")])
    facts = lower([parse(source, "Main.mini")], framework, "p")
    return build_sdg(build_call_graph(facts, build_class_hierarchy(framework, facts.types)), facts)


class TestSdg:
    """语句实例化与数据/控制边。"""

    def test_intraprocedural_data_edge(self):
        """测试过程内 def-use 变成数据边。"""
        sdg = _sdg("class Main { static void main() { Conn c = new Conn(); c.open(); } }")
        edge = sdg.graph.edges["Main.main@root/0", "Main.main@root/1"]
        assert edge["kind"] == DATA
        assert edge["vars"] == ("c",)
        assert edge["binding"] is None

    def test_parameter_binding(self):
        """测试实参到形参的过程间数据边。"""
        sdg = _sdg(
            "class Main { static void main() { Conn x = new Conn(); use(x); }"
            " static void use(Conn c) { c.open(); } }"
        )
        edge = sdg.graph.edges["Main.main@root/0", "Main.use@Main.main#1/0"]
        assert edge["binding"] == "param"
        assert edge["vars"] == ("c",)
        assert sdg.graph.has_edge("Main.use@Main.main#1/0", "Main.use@Main.main#1/1")

    def test_return_binding(self):
        """测试 return 到调用结果的过程间数据边。"""
        sdg = _sdg(
            "class Main { static void main() { Conn a = make(); a.open(); }"
            " static Conn make() { return new Conn(); } }"
        )
        ret = "Main.make@Main.main#0/1"
        assert sdg.stmt(ret).op.value == "return"
        edge = sdg.graph.edges[ret, "Main.main@root/0"]
        assert edge["binding"] == "return"
        assert edge["vars"] == ("a",)

    def test_control_edges(self):
        """测试分支语句到受控语句的控制边。"""
        sdg = _sdg(
            "class Main { static void main(boolean f) { if (f) { Conn c = new Conn(); } } }"
        )
        assert sdg.edges_of_kind(CONTROL) == [("Main.main@root/1", "Main.main@root/2")]

    def test_contexts_get_separate_nodes(self):
        """测试同一方法的不同上下文各有一份语句节点。"""
        sdg = _sdg(
            "class Main { static void main() { Conn a = make(); Conn b = make(); }"
            " static Conn make() { return new Conn(); } }"
        )
        news = sorted(n for n in sdg.graph.nodes if sdg.stmt(n).op.value == "new")
        assert news == ["Main.make@Main.main#0/0", "Main.make@Main.main#1/0"]

    def test_to_dict_is_sorted(self):
        """测试可序列化形式中的节点按 id 排序。"""
        sdg = _sdg("class Main { static void main() { Conn c = new Conn(); c.open(); } }")
        data = sdg.to_dict()
        assert data["program"] == "p"
        assert [n["id"] for n in data["nodes"]] == ["Main.main@root/0", "Main.main@root/1"]
        assert data["edges"][0]["kind"] == DATA
