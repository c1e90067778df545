from loguru import logger

from core.config import settings
from core.utils.log_manager import LogManager

"""
global log management
"""
# loguru 默认 handler 会把所有日志再打印一遍
logger.remove()

logger_mger = LogManager(
    config=settings.LOG_CONFIG,
    log_dir=settings.LOG_BASE_PATH,
    console_level="DEBUG" if settings.DEBUG else None,
)
sys_logger = logger_mger.get_logger("sys")
analysis_logger = logger_mger.get_logger("analysis")
train_logger = logger_mger.get_logger("train")
eval_logger = logger_mger.get_logger("eval")
