import json

import pytest
from loguru import logger

from core.utils import log_manager as log_module
from core.utils.log_manager import LogManager


@pytest.fixture
def manager_factory():
    """创建 LogManager，并在测试结束时移除它添加的 sink。"""
    created = []

    def _make(config, **kwargs):
        manager = LogManager(config, **kwargs)
        created.append(manager)
        return manager

    yield _make
    for manager in created:
        manager.remove_all()


class TestLogManager:
    """LogManager 测试。"""

    def test_console_only_creates_no_directory(self, tmp_path, manager_factory):
        """测试只有控制台 logger 时不创建日志目录。"""
        log_dir = tmp_path / "logs"
        manager = manager_factory({"loggers": [{"name": "analysis", "level": "INFO"}]}, log_dir=str(log_dir))
        assert not log_dir.exists()
        assert list(manager.loggers) == ["analysis"]

    def test_file_logger_writes_to_log_dir(self, tmp_path, manager_factory):
        """测试文件 logger 写进 log_dir，且只收到自己名字的日志。"""
        log_dir = tmp_path / "logs"
        config = {"loggers": [
            {"name": "train", "file": "nested/train.log", "level": "DEBUG"},
            {"name": "eval", "file": "eval.log", "level": "INFO"},
        ]}
        manager = manager_factory(config, log_dir=str(log_dir))
        manager.get_logger("train").debug("merged graam")
        manager.get_logger("eval").debug("filtered by level")
        manager.remove_all()

        assert "merged graam" in (log_dir / "train.log").read_text(encoding="utf-8")
        assert (log_dir / "eval.log").read_text(encoding="utf-8") == ""

    def test_console_sink_uses_stderr(self, capsys, manager_factory):
        """测试控制台输出走 stderr，stdout 留给数据。"""
        manager = manager_factory({"loggers": [{"name": "cli", "level": "INFO"}]})
        manager.get_logger("cli").info("hello")
        captured = capsys.readouterr()
        assert "hello" in captured.err
        assert "| cli |" in captured.err
        assert captured.out == ""

    def test_console_level_override(self, capsys, manager_factory):
        """测试 console_level 覆盖配置中的级别。"""
        manager = manager_factory({"loggers": [{"name": "cli", "level": "WARNING"}]}, console_level="DEBUG")
        manager.get_logger("cli").debug("verbose")
        assert "verbose" in capsys.readouterr().err

    def test_level_filters(self, capsys, manager_factory):
        """测试低于配置级别的日志被丢弃。"""
        manager = manager_factory({"loggers": [{"name": "cli", "level": "WARNING"}]})
        manager.get_logger("cli").info("quiet")
        assert "quiet" not in capsys.readouterr().err

    def test_unknown_logger(self, manager_factory):
        """测试获取不存在的 logger。"""
        manager = manager_factory({"loggers": []})
        with pytest.raises(ValueError, match="Logger 'missing' not found"):
            manager.get_logger("missing")

    def test_default_name(self, manager_factory):
        """测试未给名字时使用 default。"""
        manager = manager_factory({"loggers": [{"level": "INFO"}]})
        assert "default" in manager.loggers

    def test_remove_all(self, manager_factory):
        """测试 remove_all 之后 sink 被移除，且可以重复调用。"""
        manager = manager_factory({"loggers": [{"name": "a"}, {"name": "b"}]})
        handler_ids = list(manager.loggers.values())
        manager.remove_all()
        assert manager.loggers == {}
        for handler_id in handler_ids:
            with pytest.raises(ValueError):
                logger.remove(handler_id)
        manager.remove_all()

    def test_name_filter(self):
        """测试过滤器只接收目标 logger 的记录。"""
        assert log_module._logger_name_filter({"extra": {"logger_name": "a"}}, "a")
        assert not log_module._logger_name_filter({"extra": {}}, "a")

    def test_bound_scope_in_console(self, capsys, manager_factory):
        """测试绑定的 program 显示在 logger 名后面。"""
        manager = manager_factory({"loggers": [{"name": "analysis", "level": "INFO"}]})
        manager.get_logger("analysis").bind(program="listing1").info("3 methods")
        manager.get_logger("analysis").bind(graph="g1").info("rejected")
        err = capsys.readouterr().err
        assert "| analysis[listing1] | 3 methods" in err
        assert "| analysis[g1] | rejected" in err

    def test_serialized_file_sink(self, tmp_path, manager_factory):
        """测试 serialize 的文件 sink 每行一条 JSON 记录。"""
        config = {"loggers": [{"name": "train", "file": "train.jsonl", "level": "DEBUG", "serialize": True}]}
        manager = manager_factory(config, log_dir=str(tmp_path))
        manager.get_logger("train").bind(graph="g1").debug("merged")
        manager.remove_all()

        [line] = (tmp_path / "train.jsonl").read_text(encoding="utf-8").splitlines()
        record = json.loads(line)["record"]
        assert record["message"] == "merged"
        assert record["extra"]["logger_name"] == "train"
        assert record["extra"]["graph"] == "g1"
