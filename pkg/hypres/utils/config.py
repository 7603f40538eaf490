"""
Configuration management for hypres.

Handles environment variables, numerical defaults and cache settings
with validation and default values.
"""

from typing import Optional

import structlog
from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from .env file
load_dotenv()

logger = structlog.get_logger()


class HypresSettings(BaseSettings):
    """Process-wide settings; every field can be overridden by a HYPRES_* variable."""

    model_config = SettingsConfigDict(
        env_prefix="HYPRES_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Orbit cache
    cache: str = Field("data/cache/orbits.json")
    cache_enabled: bool = Field(True)

    # Logging
    log_level: str = Field("WARNING")
    log_format: str = Field("json")

    # Fan-out for energy-grid and (k, alpha)-grid work
    max_workers: int = Field(4)

    # Integrator defaults
    rtol: float = Field(1e-10)
    atol: float = Field(1e-12)
    method: str = Field("DOP853")
    horizon: float = Field(100.0)
    max_energy_drift_rate: float = Field(1e-6)

    # Orbit search
    max_newton_steps: int = Field(40)
    newton_tolerance: float = Field(1e-11)
    orbit_samples: int = Field(256)

    # Floquet analysis
    pairing_tolerance: float = Field(1e-7)
    hypothesis_lattice_bound: int = Field(12)
    hypothesis_tolerance: float = Field(1e-7)

    # Continuation grid
    default_grid_points: int = Field(21)
    default_epsilon0: float = Field(0.1)


# Global configuration instance
config = HypresSettings()


def get_config() -> HypresSettings:
    """Get the global configuration instance."""
    return config


def validate_config(settings: Optional[HypresSettings] = None) -> bool:
    """Validate that numeric settings are in range."""
    settings = settings or config
    try:
        if not 0.0 < settings.rtol < 1e-3:
            raise ValueError("HYPRES_RTOL must be in (0, 1e-3)")
        if not 0.0 < settings.atol < 1e-3:
            raise ValueError("HYPRES_ATOL must be in (0, 1e-3)")
        if settings.method not in ("DOP853", "RK45", "Radau", "gauss-legendre"):
            raise ValueError(f"HYPRES_METHOD {settings.method!r} is not supported")
        if settings.max_workers < 1:
            raise ValueError("HYPRES_MAX_WORKERS must be at least 1")
        if settings.hypothesis_lattice_bound < 1:
            raise ValueError("HYPRES_HYPOTHESIS_LATTICE_BOUND must be at least 1")
        if settings.orbit_samples < 16:
            raise ValueError("HYPRES_ORBIT_SAMPLES must be at least 16")
        if settings.log_format not in ("json", "console"):
            raise ValueError("HYPRES_LOG_FORMAT must be 'json' or 'console'")
        return True

    except Exception as e:
        logger.error("Configuration validation failed", error=str(e))
        return False
