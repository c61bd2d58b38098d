"""Application configuration using Pydantic Settings."""

from functools import lru_cache
from pathlib import Path

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide configuration loaded from ``KTO_*`` environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="KTO_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        env_parse_none_str="null",
    )

    # Application
    app_name: str = "kernel-transfer-operators"
    version: str = "0.1.0"
    environment: str = "development"
    log_level: str = "INFO"

    # Runs
    output_dir: Path = Path("runs")

    # Numerics
    gram_block_rows: int = 2048
    workers: int = 1

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v: str) -> str:
        """Upper-case the log level so ``debug`` and ``DEBUG`` are equivalent.

        Args:
            v: Raw log level string

        Returns:
            Upper-cased log level
        """
        return v.strip().upper()

    @field_validator("gram_block_rows", "workers")
    @classmethod
    def require_positive(cls, v: int) -> int:
        """Reject non-positive block sizes and worker counts.

        Args:
            v: Candidate value

        Returns:
            The unchanged value

        Raises:
            ValueError: If the value is smaller than 1
        """
        if v < 1:
            raise ValueError("must be at least 1")
        return v


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance.

    Returns:
        Settings: Cached settings object loaded from environment.
    """
    return Settings()
