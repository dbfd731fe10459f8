"""Global-best particle swarm optimization and its use for PGPS calibration."""

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from simlob.calibration.objectives import ObjectiveEvaluator
from simlob.models.calibration import CalibrationResult, CalibrationTask
from simlob.models.params import PgpsParams, SimConfig
from simlob.sim.pgps import simulate
from simlob.utils.parallel import WorkerPool
from simlob.utils.seeding import child_rng, child_seed

logger = logging.getLogger(__name__)

BatchObjective = Callable[[np.ndarray, int], np.ndarray]


@dataclass
class SwarmState:
    """Positions, velocities and personal/global bests of the whole swarm (rows = particles)."""

    x: np.ndarray
    v: np.ndarray
    pbest_x: np.ndarray
    pbest_y: np.ndarray
    gbest_x: np.ndarray
    gbest_y: float

    @classmethod
    def start(cls, x: np.ndarray, y: np.ndarray) -> "SwarmState":
        best = int(np.argmin(y))
        return cls(
            x=x,
            v=np.zeros_like(x),
            pbest_x=x.copy(),
            pbest_y=y.copy(),
            gbest_x=x[best].copy(),
            gbest_y=float(y[best]),
        )

    def record(self, y: np.ndarray) -> None:
        """Fold new values at the current positions into the bests."""
        improved = y < self.pbest_y
        self.pbest_x[improved] = self.x[improved]
        self.pbest_y[improved] = y[improved]
        best = int(np.argmin(self.pbest_y))
        if self.pbest_y[best] < self.gbest_y:
            self.gbest_y = float(self.pbest_y[best])
            self.gbest_x = self.pbest_x[best].copy()


def move_swarm(
    state: SwarmState,
    rng: np.random.Generator,
    lower: np.ndarray,
    upper: np.ndarray,
    inertia: float = 0.8,
    c1: float = 0.5,
    c2: float = 0.5,
) -> None:
    """v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x); x <- clamp(x + v).

    Velocity is zeroed on every clamped coordinate.
    """
    r1 = rng.random(state.x.shape)
    r2 = rng.random(state.x.shape)
    state.v = (
        inertia * state.v
        + c1 * r1 * (state.pbest_x - state.x)
        + c2 * r2 * (state.gbest_x - state.x)
    )
    moved = state.x + state.v
    clamped = (moved < lower) | (moved > upper)
    state.x = np.clip(moved, lower, upper)
    state.v[clamped] = 0.0


def pso_minimize(
    objective: BatchObjective,
    lower: np.ndarray,
    upper: np.ndarray,
    population: int = 40,
    iterations: int = 100,
    rng: np.random.Generator | None = None,
    inertia: float = 0.8,
    c1: float = 0.5,
    c2: float = 0.5,
    on_iteration: Callable[[int, float], None] | None = None,
) -> tuple[SwarmState, list[float], list[np.ndarray], list[np.ndarray]]:
    """Minimize `objective(positions, iteration) -> values` inside the box [lower, upper].

    Returns:
        Final swarm, best-value trace (initial population first), and the positions and values
        evaluated at every round
    """
    rng = rng or np.random.default_rng(0)
    x = lower + (upper - lower) * rng.random((population, lower.size))
    y = np.asarray(objective(x, 0), dtype=np.float64)
    state = SwarmState.start(x, y)
    trace = [state.gbest_y]
    positions, values = [x.copy()], [y]

    for it in range(1, iterations + 1):
        move_swarm(state, rng, lower, upper, inertia, c1, c2)
        y = np.asarray(objective(state.x, it), dtype=np.float64)
        state.record(y)
        trace.append(state.gbest_y)
        positions.append(state.x.copy())
        values.append(y)
        logger.info("PSO iteration %d: best %.6g", it, state.gbest_y)
        if on_iteration is not None:
            on_iteration(it, state.gbest_y)
    return state, trace, positions, values


# ------------------------------------------------------------- calibration

# Per-process evaluation context, installed by the pool initializer
_evaluator: ObjectiveEvaluator | None = None


def _install_evaluator(evaluator: ObjectiveEvaluator) -> None:
    global _evaluator
    _evaluator = evaluator


def _evaluate_position(job: tuple[list[float], SimConfig]) -> tuple[float, str | None]:
    """Simulate at one position and score it; any failure scores +inf."""
    position, sim_config = job
    try:
        series = simulate(PgpsParams.from_vector(position), sim_config)
        value = _evaluator(series)
        if not math.isfinite(value):
            return math.inf, f"objective is {value}"
        return value, None
    except Exception as e:  # noqa: BLE001
        return math.inf, f"{type(e).__name__}: {e}"


def build_evaluator(task: CalibrationTask) -> ObjectiveEvaluator:
    return ObjectiveEvaluator(task.objective, task.target, task.tau, task.norm, task.model)


def pso_calibrate(
    task: CalibrationTask,
    workers: int | None = None,
    on_iteration: Callable[[int, float], None] | None = None,
) -> CalibrationResult:
    """Search PGPS parameters minimizing the task's objective against its target.

    Every particle evaluation runs one simulation: with common random numbers all of them
    share task.sim_seed, otherwise each (iteration, particle) gets its own derived seed.
    Evaluations within an iteration run in parallel; the swarm update is serial.
    """
    started = time.perf_counter()
    lower, upper = task.bounds_arrays()
    evaluator = build_evaluator(task)
    failures = 0

    with WorkerPool(workers, initializer=_install_evaluator, initargs=(evaluator,)) as pool:

        def evaluate(x: np.ndarray, iteration: int) -> np.ndarray:
            nonlocal failures
            jobs = []
            for i, row in enumerate(x):
                seed = (
                    task.sim_seed
                    if task.common_random_numbers
                    else child_seed(task.sim_seed, iteration, i)
                )
                jobs.append((row.tolist(), task.simulation_config(seed)))
            outcomes = pool.map(_evaluate_position, jobs)
            for i, (_, error) in enumerate(outcomes):
                if error is not None:
                    failures += 1
                    logger.warning(
                        "Iteration %d particle %d scored +inf: %s", iteration, i, error
                    )
            return np.array([value for value, _ in outcomes])

        state, trace, positions, values = pso_minimize(
            evaluate,
            lower,
            upper,
            population=task.population,
            iterations=task.iterations,
            rng=child_rng(task.seed, 0),
            inertia=task.inertia,
            c1=task.c1,
            c2=task.c2,
            on_iteration=on_iteration,
        )

    all_positions = np.concatenate(positions)
    result = CalibrationResult(
        objective=task.objective,
        best_params=PgpsParams.from_vector(state.gbest_x),
        best_value=state.gbest_y,
        trace=trace,
        evaluations=len(all_positions),
        wall_time=time.perf_counter() - started,
        positions=all_positions.tolist(),
        values=np.concatenate(values).tolist(),
        failures=failures,
    )
    logger.info(
        "Calibration done: best %s = %.6g after %d evaluations",
        task.objective,
        result.best_value,
        result.evaluations,
    )
    return result
