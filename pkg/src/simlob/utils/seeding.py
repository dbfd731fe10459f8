"""Reproducible random streams.

Simulations draw from a counter-based Philox generator addressed by (seed, step, stream), so the
numbers one step sees do not depend on how many draws earlier steps consumed. Everything else
(dataset splits, PSO, weight init) derives child generators from a seed plus integer keys.
"""

import numpy as np

# Philox counters are four 64-bit words; word 0 advances as draws are made, so the
# step and stream live in words 1 and 2.
_STEP_WORD = 1
_STREAM_WORD = 2


def step_generator(seed: int, step: int, stream: int = 0) -> np.random.Generator:
    """Generator for one simulation step of one stream."""
    counter = np.zeros(4, dtype=np.uint64)
    counter[_STEP_WORD] = step
    counter[_STREAM_WORD] = stream
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, *keys); identical keys give identical streams."""
    return np.random.default_rng([seed, *keys])


def child_seed(seed: int, *keys: int) -> int:
    """A 32-bit seed derived from (seed, *keys)."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])
