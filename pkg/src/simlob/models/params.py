"""PGPS model parameters and simulation settings."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Canonical calibration order: w = [delta, lambda0, c_lambda, delta_s, alpha, mu]
PARAM_ORDER: tuple[str, ...] = ("delta", "lambda0", "c_lambda", "delta_s", "alpha", "mu")

# Sampling / calibration box for each parameter
PARAM_BOUNDS: dict[str, tuple[float, float]] = {
    "delta": (0.005, 0.05),
    "lambda0": (1.0, 200.0),
    "c_lambda": (1.0, 20.0),
    "delta_s": (0.0005, 0.003),
    "alpha": (0.05, 0.45),
    "mu": (0.005, 0.085),
}


def bounds_arrays() -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper bound vectors in PARAM_ORDER."""
    lower = np.array([PARAM_BOUNDS[name][0] for name in PARAM_ORDER])
    upper = np.array([PARAM_BOUNDS[name][1] for name in PARAM_ORDER])
    return lower, upper


def _mid(name: str) -> float:
    lo, hi = PARAM_BOUNDS[name]
    return (lo + hi) / 2


class PgpsParams(BaseModel):
    """The six calibratable PGPS parameters. Defaults are the midpoints of PARAM_BOUNDS."""

    model_config = ConfigDict(frozen=True)

    lambda0: float = Field(default=_mid("lambda0"), gt=0)  # price spread of limit orders
    c_lambda: float = Field(default=_mid("c_lambda"), gt=0)
    delta_s: float = Field(default=_mid("delta_s"), gt=0, lt=0.5)  # q_taker step size
    alpha: float = Field(default=_mid("alpha"), ge=0, le=1)  # limit order probability per provider
    mu: float = Field(default=_mid("mu"), ge=0, le=1)  # market order probability per taker
    delta: float = Field(default=_mid("delta"), ge=0, le=1)  # cancel probability per taker

    def to_vector(self) -> np.ndarray:
        """Parameters as a vector in PARAM_ORDER."""
        return np.array([getattr(self, name) for name in PARAM_ORDER], dtype=np.float64)

    @classmethod
    def from_vector(cls, vector: np.ndarray | list[float]) -> "PgpsParams":
        values = [float(v) for v in vector]
        return cls(**dict(zip(PARAM_ORDER, values, strict=True)))

    def within_bounds(self) -> bool:
        """Check every parameter against PARAM_BOUNDS."""
        return all(
            PARAM_BOUNDS[name][0] <= getattr(self, name) <= PARAM_BOUNDS[name][1]
            for name in PARAM_ORDER
        )

    @classmethod
    def midpoint(cls) -> "PgpsParams":
        return cls(**{name: _mid(name) for name in PARAM_ORDER})


# Target tuples used as calibration benchmarks
TARGET_TUPLES: dict[str, PgpsParams] = {
    "data-1": PgpsParams(lambda0=80, c_lambda=8, alpha=0.1, mu=0.02, delta_s=0.002, delta=0.02),
    "data-2": PgpsParams(lambda0=120, c_lambda=11, alpha=0.2, mu=0.03, delta_s=0.003, delta=0.03),
    "data-3": PgpsParams(lambda0=130, c_lambda=12, alpha=0.3, mu=0.04, delta_s=0.003, delta=0.04),
    "data-4": PgpsParams(lambda0=90, c_lambda=9, alpha=0.15, mu=0.02, delta_s=0.001, delta=0.02),
    "data-5": PgpsParams(
        lambda0=70, c_lambda=7, alpha=0.15, mu=0.015, delta_s=0.0015, delta=0.03
    ),
    "data-6": PgpsParams(
        lambda0=134.64, c_lambda=15.45, alpha=0.3275, mu=0.07116, delta_s=0.002, delta=0.0324
    ),
    "data-7": PgpsParams(
        lambda0=17.7, c_lambda=11.36, alpha=0.2639, mu=0.067, delta_s=0.00066, delta=0.03644
    ),
    "data-8": PgpsParams(
        lambda0=153.53, c_lambda=9.27, alpha=0.2983, mu=0.07343, delta_s=0.00238, delta=0.01278
    ),
    "data-9": PgpsParams(
        lambda0=48.13, c_lambda=3.54, alpha=0.4374, mu=0.02645, delta_s=0.00077, delta=0.01674
    ),
    "data-10": PgpsParams(
        lambda0=7.13, c_lambda=7.04, alpha=0.1106, mu=0.05609, delta_s=0.00217, delta=0.01389
    ),
}


class SimConfig(BaseModel):
    """Simulation settings that are not calibrated."""

    model_config = ConfigDict(frozen=True)

    n_providers: int = Field(default=125, ge=0)
    n_takers: int = Field(default=125, ge=0)
    horizon: int = Field(default=3600, gt=0)  # recorded steps T
    seed: int = Field(default=0, ge=0)
    initial_price: int = Field(default=10000, gt=0)  # p0, in base price units
    warmup: int = Field(default=100, ge=0)  # discarded steps before recording
    order_volume: int = Field(default=100, gt=0)
    tick_size: int = Field(default=1, gt=0)
    depth: int = Field(default=10, gt=0)
    q_var_iters: int = Field(default=100_000, gt=0)
    cancel_scope: Literal["book", "own"] = "book"

    @model_validator(mode="after")
    def _check_price_grid(self) -> "SimConfig":
        if self.initial_price % self.tick_size:
            raise ValueError("initial_price must be a multiple of tick_size")
        if self.initial_price <= self.tick_size:
            raise ValueError("initial_price must exceed one tick")
        return self
