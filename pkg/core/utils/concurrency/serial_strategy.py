from .base_strategy import ConcurrencyStrategy


class SerialStrategy(ConcurrencyStrategy):
    """串行策略：在当前线程按顺序执行，默认使用，结果完全可复现。"""

    def execute(self, tasks_with_args, worker_count=1, **kwargs):
        results = []
        for i, (task, args) in enumerate(tasks_with_args):
            try:
                results.append((True, task(*args)))
            except Exception as e:
                results.append(self._handle_error(e, f"Task {self._task_name(task, i)}"))
        self._summarize("Serial execution", results)
        return results
