"""Calibration task and result models."""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

import numpy as np
from pydantic import BaseModel, Field

from simlob.exceptions import CalibrationError
from simlob.models.analytics import StylizedFactsReport
from simlob.models.book import LobSeries
from simlob.models.dataset import DEFAULT_TAU, NormStats
from simlob.models.params import PARAM_BOUNDS, PARAM_ORDER, PgpsParams, SimConfig

if TYPE_CHECKING:
    from simlob.network.autoencoder import SimLOB

Objective = Literal["midprice", "rawlob", "latent"]
OBJECTIVES: tuple[str, ...] = ("midprice", "rawlob", "latent")


@dataclass
class CalibrationTask:
    """What to calibrate against and how hard to search.

    `sim_config` supplies the non-calibrated simulator settings; its horizon is replaced by the
    target length and its seed by `sim_seed`. `norm` defaults to the model's normalization.
    """

    target: LobSeries
    objective: Objective = "latent"
    model: "SimLOB | None" = None
    norm: NormStats | None = None
    population: int = 40
    iterations: int = 100
    seed: int = 0  # swarm randomness
    sim_seed: int = 0  # simulator seed shared by all evaluations
    common_random_numbers: bool = True
    inertia: float = 0.8
    c1: float = 0.5
    c2: float = 0.5
    tau: int = DEFAULT_TAU
    sim_config: SimConfig = field(default_factory=SimConfig)
    bounds: dict[str, tuple[float, float]] = field(default_factory=lambda: dict(PARAM_BOUNDS))

    def __post_init__(self) -> None:
        if self.objective not in OBJECTIVES:
            raise CalibrationError(f"Unknown objective {self.objective!r}")
        if self.objective == "latent" and self.model is None:
            raise CalibrationError("The latent objective requires a trained model")
        if self.model is not None:
            self.tau = self.model.config.tau
            if self.norm is None:
                self.norm = self.model.norm
        if len(self.target) < self.tau:
            raise CalibrationError(
                f"Target has {len(self.target)} steps, fewer than one window of {self.tau}"
            )
        if self.population <= 0 or self.iterations < 0:
            raise CalibrationError("population must be positive and iterations non-negative")
        if set(self.bounds) != set(PARAM_ORDER):
            raise CalibrationError(f"bounds must cover exactly {PARAM_ORDER}")
        if any(lo > hi for lo, hi in self.bounds.values()):
            raise CalibrationError("Every lower bound must not exceed its upper bound")

    @property
    def horizon(self) -> int:
        return len(self.target)

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lower = np.array([self.bounds[name][0] for name in PARAM_ORDER])
        upper = np.array([self.bounds[name][1] for name in PARAM_ORDER])
        return lower, upper

    def simulation_config(self, seed: int | None = None) -> SimConfig:
        return self.sim_config.model_copy(
            update={"horizon": self.horizon, "seed": self.sim_seed if seed is None else seed}
        )


class CalibrationReport(BaseModel):
    """Metrics of one simulation at the calibrated parameters against the target."""

    err_r: float = Field(ge=0)
    midprice_objective: float = Field(ge=0)
    rawlob_objective: float = Field(ge=0)
    latent_objective: float | None = None
    facts: StylizedFactsReport | None = None
    seed: int = 0


class CalibrationResult(BaseModel):
    objective: str
    best_params: PgpsParams
    best_value: float
    trace: list[float]  # best value after initialization and after each iteration
    evaluations: int
    wall_time: float
    positions: list[list[float]]  # every evaluated position, PARAM_ORDER
    values: list[float]
    failures: int = 0
    report: CalibrationReport | None = None
