import os
import sys
from functools import partial

from loguru import logger

CONSOLE_FORMAT = "{time:HH:mm:ss} | {level: <7} | {extra[logger_name]}{extra[_scope]} | {message}\n{exception}"


# 模块级函数，可以被 pickle
def _logger_name_filter(record, target_name):
    """过滤器函数：只接收指定 logger_name 的日志"""
    return record["extra"].get("logger_name") == target_name


def _stderr_sink(message):
    sys.stderr.write(message)


def _console_format(record) -> str:
    # 绑定了 program / graph 时显示在 logger 名后面
    scope = record["extra"].get("program") or record["extra"].get("graph")
    record["extra"]["_scope"] = f"[{scope}]" if scope else ""
    return CONSOLE_FORMAT


class LogManager:
    def __init__(self, config: dict, log_dir: str = "logs", enqueue: bool = False,
                 console_level: str | None = None):
        """按配置创建若干命名 logger（loguru sink + 名称过滤）。

        控制台 sink 一律写 stderr，数据输出（JSON、CSV、表格）留给 stdout。
        文件 sink 写到 log_dir 下，`serialize: true` 时每行一条 JSON 记录。

        Args:
            config (dict): {"loggers": [{"name", "file", "level", "rotate", "serialize"}]}。
            log_dir (str, optional): 文件日志目录，只在配置了文件 sink 时创建。
            enqueue (bool, optional): 文件 sink 是否走队列，进程池场景下使用。
            console_level (str, optional): 覆盖所有控制台 sink 的级别（例如 DEBUG 模式）。

        Example:
            >>> log_config = {
            ...     "loggers": [
            ...         {"name": "analysis", "file": None, "level": "INFO"},
            ...         {"name": "train", "file": "train.jsonl", "level": "DEBUG", "serialize": True}
            ...     ]
            ... }
            >>> log_manager = LogManager(log_config, log_dir="my_logs")
            >>> log_manager.get_logger("analysis").bind(program="listing1").info("3 methods")
        """
        self.loggers = {}
        self.log_dir = log_dir
        self.enqueue = enqueue
        self.console_level = console_level
        self.load_config(config)

    def load_config(self, config: dict):
        loggers_config = config.get("loggers", [])
        if any(lg_conf.get("file") for lg_conf in loggers_config):
            os.makedirs(self.log_dir, exist_ok=True)

        for lg_conf in loggers_config:
            file_name = lg_conf.get("file")
            self.add_logger(
                name=lg_conf.get("name", "default"),
                file=os.path.join(self.log_dir, os.path.basename(file_name)) if file_name else None,
                level=lg_conf.get("level", "INFO"),
                rotate=lg_conf.get("rotate"),
                serialize=lg_conf.get("serialize", False),
            )

    def add_logger(self, name: str, file: str | None, level: str = "INFO", rotate=None, serialize: bool = False):
        logger_filter = partial(_logger_name_filter, target_name=name)
        if file:
            os.makedirs(os.path.dirname(file) or ".", exist_ok=True)
            handler_id = logger.add(file, level=level, rotation=rotate, enqueue=self.enqueue,
                                    serialize=serialize, backtrace=True, diagnose=False, filter=logger_filter)
        else:
            handler_id = logger.add(_stderr_sink, level=self.console_level or level,
                                    format=_console_format, filter=logger_filter)
        self.loggers[name] = handler_id

    def get_logger(self, name: str):
        if name not in self.loggers:
            raise ValueError(f"Logger '{name}' not found.")
        return logger.bind(logger_name=name)

    def remove_all(self):
        """移除本管理器添加的所有 sink，可重复调用。"""
        for handler_id in self.loggers.values():
            try:
                logger.remove(handler_id)
            except ValueError:
                pass
        self.loggers.clear()
