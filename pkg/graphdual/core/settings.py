# graphdual/core/settings.py
from __future__ import annotations
import os
from typing import Literal
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator


class Settings(BaseSettings):
    # --- App ---
    APP_NAME: str = "graphdual"
    ENV: Literal["development", "staging", "production"] = "development"
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: Literal["auto", "console", "json"] = "auto"

    # --- Monte Carlo workers ---
    THREADS: int = 0          # 0 -> os.cpu_count()
    CHUNK_SIZE: int = 10_000  # replicates per RNG stream

    # --- Guards ---
    STATE_SPACE_GUARD: int = 100_000
    EVENT_BUDGET: int = 10_000_000
    ENUMERATION_GUARD: int = 24
    SERIES_INDEX_CAP: int = 10_000
    INCLUSION_EXCLUSION_GUARD: int = 12

    # --- Outputs ---
    OUTPUT_DIR: str = "./runs"

    model_config = SettingsConfigDict(env_prefix="GRAPHDUAL_", env_file=".env", case_sensitive=False, extra="ignore")

    @property
    def DEV_MODE(self) -> bool:
        return self.ENV == "development"

    @field_validator("LOG_LEVEL")
    @classmethod
    def _norm_level(cls, v: str) -> str:
        return v.strip().upper() if v else "INFO"

    def worker_count(self, requested: int | None = None) -> int:
        n = requested if requested is not None else self.THREADS
        if n <= 0:
            n = os.cpu_count() or 1
        return n

    def validate_guards(self) -> None:
        for name in (
            "CHUNK_SIZE",
            "STATE_SPACE_GUARD",
            "EVENT_BUDGET",
            "ENUMERATION_GUARD",
            "SERIES_INDEX_CAP",
            "INCLUSION_EXCLUSION_GUARD",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.THREADS < 0:
            raise ValueError("THREADS must be >= 0")


settings = Settings()
# Post init checks that are cross-field aware
settings.validate_guards()
