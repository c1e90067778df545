from concurrent.futures import ThreadPoolExecutor

from .base_strategy import ConcurrencyStrategy


class ThreadPoolStrategy(ConcurrencyStrategy):
    """线程池并发策略，适合只读共享模型上的查询（例如评测用例）。"""

    def __init__(self, logger=None, error_handling='log', timeout=None,
                 thread_name_prefix='specminer', **thread_kwargs):
        """初始化线程池策略。

        Args:
            logger (Logger, optional): 日志对象。
            error_handling (str): 错误处理策略。
            timeout (float, optional): 任务超时时间。
            thread_name_prefix (str): 线程名称前缀。
            **thread_kwargs: 传递给 ThreadPoolExecutor 的其他参数。
        """
        super().__init__(logger, error_handling, timeout)
        self.thread_name_prefix = thread_name_prefix
        self.thread_kwargs = thread_kwargs

    def execute(self, tasks_with_args, worker_count, **kwargs):
        self._log_debug(f"Thread pool starting with {worker_count} workers for {len(tasks_with_args)} tasks")

        executor_kwargs = {
            'max_workers': worker_count if worker_count > 0 else 1,
            'thread_name_prefix': self.thread_name_prefix,
            **self.thread_kwargs
        }

        results = [None] * len(tasks_with_args)
        with ThreadPoolExecutor(**executor_kwargs) as executor:
            futures = []
            for i, (task, args) in enumerate(tasks_with_args):
                try:
                    futures.append((executor.submit(task, *args), i, self._task_name(task, i)))
                except Exception as e:
                    results[i] = self._handle_error(e, f"Task {i} submission")

            # 按提交顺序收集，保证输出稳定
            for future, index, name in futures:
                try:
                    results[index] = (True, future.result(timeout=self.timeout))
                except Exception as e:
                    results[index] = self._handle_error(e, f"Task {name}")

        self._summarize("Thread pool", results)
        return results
