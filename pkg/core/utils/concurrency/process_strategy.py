from concurrent.futures import ProcessPoolExecutor

from .base_strategy import ConcurrencyStrategy


class ProcessPoolStrategy(ConcurrencyStrategy):
    """进程池并发策略，适用于逐程序的解析与切片（CPU 密集）。

    任务函数与参数必须可 pickle：模块级函数加 pydantic 模型即可。
    """

    def __init__(self, logger=None, error_handling='log', timeout=None,
                 max_tasks_per_child=None, **process_kwargs):
        """初始化进程池策略。

        Args:
            logger (Logger, optional): 日志对象。
            error_handling (str): 错误处理策略。
            timeout (float, optional): 任务超时时间。
            max_tasks_per_child (int, optional): 每个子进程最大任务数。
            **process_kwargs: 传递给 ProcessPoolExecutor 的其他参数。
        """
        super().__init__(logger, error_handling, timeout)
        self.max_tasks_per_child = max_tasks_per_child
        self.process_kwargs = process_kwargs

    def execute(self, tasks_with_args, worker_count, **kwargs):
        self._log_debug(f"Process pool starting with {worker_count} workers for {len(tasks_with_args)} tasks")

        executor_kwargs = {
            'max_workers': worker_count if worker_count > 0 else 1,
            **self.process_kwargs
        }
        if self.max_tasks_per_child:
            executor_kwargs['max_tasks_per_child'] = self.max_tasks_per_child

        results = [None] * len(tasks_with_args)
        with ProcessPoolExecutor(**executor_kwargs) as executor:
            futures = []
            for i, (task, args) in enumerate(tasks_with_args):
                try:
                    futures.append((executor.submit(task, *args), i, self._task_name(task, i)))
                except Exception as e:
                    results[i] = self._handle_error(e, f"Task {i} submission")

            for future, index, name in futures:
                try:
                    results[index] = (True, future.result(timeout=self.timeout))
                except Exception as e:
                    results[index] = self._handle_error(e, f"Task {name}")

        self._summarize("Process pool", results)
        return results
