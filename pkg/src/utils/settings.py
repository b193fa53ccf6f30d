import logging
from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="PEACE_", case_sensitive=False)

    OUTPUT_ROOT: str = "runs"
    NUM_THREADS: int = 1
    DETERMINISTIC: bool = True
    LOG_LEVEL: str = "INFO"

    def __init__(self, **values):
        super().__init__(**values)
        self._validate()

    def _validate(self):
        problems = []
        if self.NUM_THREADS <= 0:
            problems.append(f"NUM_THREADS must be positive, got {self.NUM_THREADS}")
        if logging.getLevelName(self.LOG_LEVEL.upper()) not in (10, 20, 30, 40, 50):
            problems.append(f"LOG_LEVEL {self.LOG_LEVEL!r} is not a logging level")
        if problems:
            raise ValueError("Invalid settings: " + "; ".join(problems))

    def get_output_root(self) -> Path:
        return Path(self.OUTPUT_ROOT)

    def get_log_level(self) -> int:
        return logging.getLevelName(self.LOG_LEVEL.upper())

@lru_cache()
def get_settings() -> Settings:
    return Settings()
