import traceback


class ConcurrencyStrategy:
    """并发策略基类，定义统一接口和通用属性。"""

    def __init__(self, logger=None, error_handling='log', timeout=None):
        """初始化并发策略基类。

        Args:
            logger (Logger, optional): loguru 绑定后的日志对象。
            error_handling (str): 错误处理策略，'log'记录错误继续执行，'raise'遇错即停。
            timeout (float, optional): 单个任务超时时间（秒）。
        """
        if error_handling not in ('log', 'raise'):
            raise ValueError(f"Unknown error_handling: {error_handling}")
        self.logger = logger
        self.error_handling = error_handling
        self.timeout = timeout

    def execute(self, tasks_with_args, worker_count, **kwargs):
        """执行任务的抽象方法。

        Args:
            tasks_with_args (list): [(func, args), ...] 任务及参数列表。
            worker_count (int): 工作单元数（线程/进程数）。
            **kwargs: 其他扩展参数。

        Returns:
            list: [(success, result_or_error), ...]，顺序与提交顺序一致。
        """
        raise NotImplementedError("Strategy must implement execute method.")

    @staticmethod
    def _task_name(task, index):
        name = getattr(task, '__name__', None)
        if not name or name in ("<lambda>", "lambda"):
            return f"task_{index}"
        return f"{name}#{index}"

    def _log_debug(self, message):
        if self.logger:
            self.logger.debug(message)

    def _log_error(self, message):
        if self.logger:
            self.logger.error(message)

    def _handle_error(self, error, context="Task execution"):
        """统一的错误处理。"""
        error_str = str(error).strip() or f"<{error.__class__.__name__}>"
        error_msg = f"{context} failed: {error_str}"
        self._log_error(error_msg)
        self._log_error("".join(traceback.format_exception(type(error), error, error.__traceback__)))

        if self.error_handling == 'raise':
            raise error

        return (False, error_msg)

    def _summarize(self, kind, results):
        ok = sum(1 for r in results if r[0])
        self._log_debug(f"{kind} finished: {ok} succeeded, {len(results) - ok} failed")
