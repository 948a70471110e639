"""Configuration settings for qbailey."""

from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Engine settings loaded from environment variables."""

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # Logging
    DEBUG: bool = False

    # Truncation (orders are powers of q, not grid numerators)
    DEFAULT_ORDER: int = 20
    MAX_PRECISION_RETRIES: int = 6

    # Enumeration of negative occupation numbers
    ENUM_SHELL_LIMIT: int = 80
    ENUM_CERT_SHELLS: int = 3

    # Infinite sums over an index
    SUM_TAIL_TERMS: int = 3
    MAX_SUM_TERMS: int = 400

    # Multiplication kernel
    KARATSUBA_THRESHOLD: int = 64

    # Sweeps and audits
    WORKERS: int = 1
    OUTPUT_DIR: str = "./reports"
    AUDIT_CASES: int = 200
    AUDIT_SEED: int = 1

    @property
    def output_path(self) -> Path:
        """Get the absolute output directory path."""
        return Path(self.OUTPUT_DIR).resolve()

    @property
    def reports_file(self) -> Path:
        """Get the default JSON-lines report path."""
        return self.output_path / "reports.jsonl"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Global settings instance
settings = get_settings()
