"""并发策略模块，提供串行、线程池、进程池三种执行策略。

Usage:
    from core.utils.concurrency import get_strategy, run_tasks

    strategy = get_strategy("thread", logger=analysis_logger)
    results = strategy.execute([(func, (arg,)), ...], worker_count=4)

    # 领域代码一般直接用 run_tasks：遇错即抛，返回纯结果列表
    graams = run_tasks(build_graam, [(g, ifd) for g in graphs])
"""

from .base_strategy import ConcurrencyStrategy
from .serial_strategy import SerialStrategy
from .thread_strategy import ThreadPoolStrategy
from .process_strategy import ProcessPoolStrategy

_STRATEGIES = {
    "serial": SerialStrategy,
    "thread": ThreadPoolStrategy,
    "process": ProcessPoolStrategy,
}


def get_strategy(mode: str, logger=None, error_handling: str = "raise", timeout=None) -> ConcurrencyStrategy:
    """按名称创建策略实例。

    Raises:
        ValueError: 未知的策略名称。
    """
    try:
        cls = _STRATEGIES[mode]
    except KeyError:
        raise ValueError(f"Unknown worker mode: {mode}") from None
    return cls(logger=logger, error_handling=error_handling, timeout=timeout)


def run_tasks(func, args_list, mode: str | None = None, worker_count: int | None = None, logger=None) -> list:
    """对每组参数执行 func，按提交顺序返回结果；第一个异常原样抛出。"""
    from core.config import settings

    strategy = get_strategy(mode or settings.WORKER_MODE, logger=logger)
    results = strategy.execute([(func, tuple(args)) for args in args_list],
                               worker_count or settings.WORKER_COUNT)
    return [result for _, result in results]


__all__ = [
    'ConcurrencyStrategy',
    'SerialStrategy',
    'ThreadPoolStrategy',
    'ProcessPoolStrategy',
    'get_strategy',
    'run_tasks',
]
