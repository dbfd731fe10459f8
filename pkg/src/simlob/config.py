"""Configuration management for SimLOB."""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from dotenv import dotenv_values, load_dotenv

from simlob.exceptions import ConfigError, ParameterError

SUPPORTED_DTYPES = ("float32", "float64")


@dataclass
class Config:
    """Application configuration."""

    workers: int = 1
    dtype: str = "float32"  # float64 for gradient checks and tests
    log_level: str = "WARNING"
    output_dir: Path = Path("output")

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.dtype not in SUPPORTED_DTYPES:
            raise ConfigError(f"dtype must be one of {SUPPORTED_DTYPES}, got {self.dtype!r}")

    @classmethod
    def from_env(cls) -> "Config":
        """Load configuration from environment variables."""
        # override=False ensures environment variables take precedence over .env
        load_dotenv(override=False)

        workers_raw = os.getenv("SIMLOB_WORKERS")
        try:
            workers = int(workers_raw) if workers_raw else (os.cpu_count() or 1)
        except ValueError as e:
            raise ConfigError(f"SIMLOB_WORKERS must be an integer, got {workers_raw!r}") from e

        return cls(
            workers=workers,
            dtype=os.getenv("SIMLOB_DTYPE", "float32"),
            log_level=os.getenv("SIMLOB_LOG_LEVEL", "WARNING").upper(),
            output_dir=Path(os.getenv("SIMLOB_OUTPUT_DIR", "output")),
        )


# Global config instance
_config: Config | None = None


def get_config() -> Config:
    """Get or create the global configuration instance."""
    global _config
    if _config is None:
        _config = Config.from_env()
    return _config


def set_config(config: Config | None) -> None:
    """Set the global configuration instance (useful for testing)."""
    global _config
    _config = config


def load_sim_file(path: Path) -> tuple[Any, Any]:
    """Read a flat key=value simulation file into (PgpsParams, SimConfig).

    Keys not given fall back to the model defaults. Example file:

        lambda0=80
        c_lambda=8
        alpha=0.1
        mu=0.02
        delta_s=0.002
        delta=0.02
        horizon=3600
        seed=7

    Raises:
        ConfigError: If the file is missing, has unknown keys, or values fail validation
    """
    from simlob.models.base import build_model
    from simlob.models.params import PgpsParams, SimConfig

    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")

    values = {k.strip().lower(): v for k, v in dotenv_values(path).items() if v is not None}
    param_keys = set(PgpsParams.model_fields)
    sim_keys = set(SimConfig.model_fields)

    unknown = sorted(set(values) - param_keys - sim_keys)
    if unknown:
        raise ConfigError(f"Unknown keys in {path}: {', '.join(unknown)}")

    try:
        params = build_model(PgpsParams, {k: v for k, v in values.items() if k in param_keys})
        sim_config = build_model(SimConfig, {k: v for k, v in values.items() if k in sim_keys})
    except ParameterError as e:
        raise ConfigError(f"Invalid values in {path}: {e}") from e
    return params, sim_config
