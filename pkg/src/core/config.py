from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Toolkit settings.

    Loads configuration from OPENLOC_* environment variables and, when given, a flat
    KEY=value config file. Command-line flags override both.
    """

    # Reproducibility
    SEED: int = Field(default=20130101, ge=0, lt=2**64)

    # Output and runtime
    OUTPUT_DIR: Path = Path("results")
    LOG_LEVEL: str = "INFO"
    WORKERS: int = Field(default=1, ge=1)

    # Two-level model
    FC: float = Field(default=0.5, gt=0.0, lt=1.0)

    # Random-matrix ensemble
    ENSEMBLE_N: int = Field(default=300, ge=2)
    ENSEMBLE_REALIZATIONS: int = Field(default=20, ge=1)
    SOLVER_METHOD: str = "lapack"

    # Stadium geometry
    STADIUM_RADIUS: float = Field(default=1.0, gt=0.0)
    STADIUM_HALF_LENGTH: float | None = Field(default=None, gt=0.0)

    model_config = SettingsConfigDict(
        env_prefix="OPENLOC_",
        env_file=None,
        env_file_encoding="utf-8",
        extra="ignore",
    )


def load_settings(config_file: Path | str | None = None) -> Settings:
    """
    Builds settings from the environment and an optional config file.

    Environment variables take precedence over the file; the caller layers
    command-line flags on top.
    """
    if config_file is None:
        return Settings()
    return Settings(_env_file=str(config_file))
