"""Utility modules for SimLOB."""

from simlob.utils.parallel import WorkerPool, parallel_map, resolve_workers
from simlob.utils.seeding import child_rng, child_seed, step_generator

__all__ = [
    "child_rng",
    "child_seed",
    "step_generator",
    "WorkerPool",
    "parallel_map",
    "resolve_workers",
]
