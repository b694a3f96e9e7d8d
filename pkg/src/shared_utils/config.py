"""Configuration management for training and evaluation runs."""

from pathlib import Path
from functools import lru_cache
from typing import Literal
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field


class Settings(BaseSettings):
    """Application settings loaded from environment."""

    # App Info
    app_name: str = Field(default="Boosted Autoencoder Ensembles")
    app_version: str = Field(default="1.0.0")
    environment: str = Field(default="dev")
    log_level: str = Field(default="INFO")

    # Paths
    data_directory: Path = Field(default=Path("./data"))
    output_directory: Path = Field(default=Path("./outputs"))
    fmnist_directory: Path | None = Field(default=None)

    # Training defaults
    default_seed: int = Field(default=0)
    init_scheme: Literal["paper_normal", "scaled"] = Field(default="paper_normal")
    validate_every: int = Field(default=100, ge=1)
    eval_batch_size: int = Field(default=256, ge=1)

    # Numerics
    debug_finite_checks: bool = Field(default=False)

    # Clustering
    kmeans_restarts: int = Field(default=10, ge=1)

    # Deployment
    work_pool_name: str = Field(default="local-process-pool")

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8")


@lru_cache
def get_settings(environment: str = None) -> Settings:
    """Get settings for specified environment."""
    if environment:
        env_file = Path(f"config/environments/{environment}.env")
        if env_file.exists():
            return Settings(_env_file=env_file)
    return Settings()
