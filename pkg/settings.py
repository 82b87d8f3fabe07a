"""Settings module."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    seed_offset: int = Field(default=0, alias="SAWEI_SEED_OFFSET")
    log_level: str = Field(default="INFO", alias="SAWEI_LOG_LEVEL")
    workers: int = Field(default=1, alias="SAWEI_WORKERS")
    plot_format: str = Field(default="svg", alias="SAWEI_PLOT_FORMAT")

    model_config = SettingsConfigDict(env_file=".env", extra="allow")


@lru_cache
def get_settings() -> Settings:
    """Get application settings."""
    return Settings()
