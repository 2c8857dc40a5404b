"""
Application configuration using pydantic-settings.
All settings can be overridden via environment variables.
"""

import logging
import sys
from functools import lru_cache

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Global application settings loaded from environment variables."""

    # App metadata
    APP_NAME: str = "Hex Borel Toolkit"
    APP_VERSION: str = "1.0.0"
    APP_DESCRIPTION: str = (
        "Finite-resolution evaluators, boundary tracing and the hardness reduction for infinite Hex"
    )

    # Default resolution for formula evaluation
    DEFAULT_N_MAX: int = 3
    DEFAULT_R_MAX: int = 6
    DEFAULT_SIZE_THRESHOLD: int = 40
    DEFAULT_TRACE_BUDGET: int = 10_000
    DEFAULT_WINDOW_RADIUS: int = 60
    DEFAULT_WITNESS_BUDGET: int = 8
    DEFAULT_COMPONENT_BUDGET: int = 500_000

    # Per-n sub-searches (1 = sequential)
    N_JOBS: int = 1

    # Comb fixture
    COMB_AMPLITUDE_OFFSET: int = 1
    COMB_AMPLITUDE_STEP: int = 1
    COMB_JOG_PAIRS: int = 1

    # Reduction geometry: g(j) = GAP_SCALE * j + GAP_OFFSET
    GAP_SCALE: int = 8
    GAP_OFFSET: int = 10

    # Rendering
    SVG_HEX_SIZE: float = 12.0
    SVG_MARGIN: float = 16.0

    # Random scenarios (--seed)
    RANDOM_DENSITY: float = 0.45
    RANDOM_RADIUS: int = 8

    # Logging
    LOG_LEVEL: str = "INFO"

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": True,
    }


@lru_cache()
def get_settings() -> Settings:
    """Cached settings singleton."""
    return Settings()


def configure_logging(level: str | None = None) -> None:
    """Route all package logs to stderr so stdout stays a clean JSON report."""
    settings = get_settings()
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
