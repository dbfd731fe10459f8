"""Scoring calibrated parameters against the target with every metric family."""

import logging
from typing import TYPE_CHECKING

from simlob.analytics.stylized_facts import compare_stylized_facts
from simlob.calibration.objectives import objective_latent, objective_midprice, objective_rawlob
from simlob.exceptions import SimLOBError
from simlob.models.book import LobSeries
from simlob.models.calibration import CalibrationReport
from simlob.models.dataset import DEFAULT_TAU, NormStats
from simlob.models.params import PgpsParams, SimConfig
from simlob.sim.pgps import simulate

if TYPE_CHECKING:
    from simlob.network.autoencoder import SimLOB

logger = logging.getLogger(__name__)


def score_pair(
    target: LobSeries,
    simulated: LobSeries,
    model: "SimLOB | None" = None,
    norm: NormStats | None = None,
    tau: int = DEFAULT_TAU,
) -> CalibrationReport:
    """All metrics of a simulated series against the target."""
    if model is not None:
        tau = model.config.tau
        norm = norm or model.norm
    err_r = objective_rawlob(target, simulated, tau, norm)
    try:
        facts = compare_stylized_facts(target, simulated)
    except SimLOBError as e:
        logger.warning("Stylized facts unavailable: %s", e)
        facts = None
    return CalibrationReport(
        err_r=err_r,
        midprice_objective=objective_midprice(target, simulated, tau, norm),
        rawlob_objective=err_r,
        latent_objective=objective_latent(target, simulated, model) if model else None,
        facts=facts,
    )


def evaluate_calibration(
    target: LobSeries,
    params: PgpsParams,
    seed: int = 0,
    sim_config: SimConfig | None = None,
    model: "SimLOB | None" = None,
    norm: NormStats | None = None,
    tau: int = DEFAULT_TAU,
) -> CalibrationReport:
    """Simulate once at `params` (horizon = target length) and report every metric."""
    config = (sim_config or SimConfig()).model_copy(
        update={"horizon": len(target), "seed": seed}
    )
    report = score_pair(target, simulate(params, config), model, norm, tau)
    report.seed = seed
    return report
