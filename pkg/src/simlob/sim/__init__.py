"""PGPS agent-based market simulation."""

from simlob.sim.pgps import (
    PgpsSimulator,
    TakerSideState,
    draw_limit_order,
    lambda_t,
    limit_price,
    precompute_q_variance,
    simulate,
    step_q_taker,
)

__all__ = [
    "PgpsSimulator",
    "TakerSideState",
    "draw_limit_order",
    "lambda_t",
    "limit_price",
    "precompute_q_variance",
    "simulate",
    "step_q_taker",
]
