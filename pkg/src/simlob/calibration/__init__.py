"""Calibration of PGPS parameters against a target LOB series."""

from simlob.calibration.evaluate import evaluate_calibration, score_pair
from simlob.calibration.objectives import (
    ObjectiveEvaluator,
    objective_latent,
    objective_midprice,
    objective_rawlob,
    window_count,
)
from simlob.calibration.pso import SwarmState, move_swarm, pso_calibrate, pso_minimize

__all__ = [
    "evaluate_calibration",
    "score_pair",
    "ObjectiveEvaluator",
    "objective_latent",
    "objective_midprice",
    "objective_rawlob",
    "window_count",
    "SwarmState",
    "move_swarm",
    "pso_calibrate",
    "pso_minimize",
]
