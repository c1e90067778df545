from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


def _default_log_config() -> dict:
    # 控制台 sink，写入 stderr
    return {
        "loggers": [
            {"name": "sys", "file": None, "level": "INFO"},
            {"name": "analysis", "file": None, "level": "INFO"},
            {"name": "train", "file": None, "level": "INFO"},
            {"name": "eval", "file": None, "level": "INFO"},
        ]
    }


class Settings(BaseSettings):
    """全局配置，可通过 SPECMINER_ 前缀的环境变量或 .env 覆盖。"""

    model_config = SettingsConfigDict(
        env_prefix="SPECMINER_", env_file=".env", extra="ignore"
    )

    DEBUG: bool = False
    LOG_BASE_PATH: str = "logs"
    LOG_CONFIG: dict = Field(default_factory=_default_log_config)

    WORKER_MODE: Literal["serial", "thread", "process"] = "serial"
    WORKER_COUNT: int = Field(default=4, ge=1)

    CANONICAL_NODE_LIMIT: int = Field(default=64, ge=1)
    IFD_TRANSITIVE_DEPTH: int = Field(default=1, ge=0)
    MERGE_CANDIDATE_LIMIT: int = Field(default=256, ge=1)

    EVAL_KMAX: int = Field(default=10, ge=1)
    EVAL_SWAPS_PER_GRAAM: int = Field(default=0, ge=0)
    SATURATION_THRESHOLD: float = Field(default=0.9, gt=0, le=1)
    DEFAULT_SEED: int = 1


settings = Settings()
