"""
Environment-driven configuration using Pydantic Settings.

Every field can be overridden with an environment variable carrying the
``SISREC_`` prefix (for example ``SISREC_THREADS=4``) or through a ``.env``
file in the working directory.
"""

import logging

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """
    Runtime settings for the estimators, the Monte Carlo harness and logging.

    Values are validated on load; solver fields provide the defaults used when
    a ``SolverConfig`` is built without explicit arguments.
    """

    # Execution
    threads: int = Field(default=1, ge=1, description="Maximum Monte Carlo worker processes")

    # Logging Configuration
    log_level: str = Field(
        default="WARNING",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    )
    log_json: bool = Field(default=True, description="Emit JSON log lines instead of plain text")

    # Solver defaults
    max_iter: int = Field(default=2000, ge=1, description="Projected-gradient iteration cap")
    solver_tol: float = Field(
        default=1e-8, gt=0.0, description="Relative objective decrease that stops the solver"
    )
    lipschitz_iters: int = Field(
        default=30, ge=1, description="Power iterations for the Lipschitz estimate"
    )
    restart: bool = Field(default=True, description="Adaptive momentum restart")

    # Numerical constants
    c1: float = Field(default=1.0, ge=0.0, description="Causal budget constant")
    fft_crossover: int = Field(
        default=64, ge=1, description="Length above which convolution switches to FFT"
    )
    rank_tol: float = Field(
        default=1e-10, gt=0.0, description="Relative rank tolerance for subspace bases"
    )

    model_config = SettingsConfigDict(
        env_prefix="SISREC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate that log level is a valid logging level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(f"Invalid log level: {v}. Must be one of {', '.join(valid_levels)}")
        return v_upper


# Global settings instance
_settings: Settings | None = None


def get_settings() -> Settings:
    """
    Get the global settings instance.

    Settings are read from the environment once per process; call
    ``reset_settings`` to force a reload.

    Returns:
        Settings: Process-wide settings instance
    """
    global _settings
    if _settings is None:
        _settings = Settings()
        logger.info(f"Settings loaded (threads={_settings.threads}, c1={_settings.c1})")
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the next ``get_settings`` re-reads the environment."""
    global _settings
    _settings = None
