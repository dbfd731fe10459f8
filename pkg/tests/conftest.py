"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from simlob.config import Config, set_config
from simlob.models.dataset import NormStats
from simlob.models.params import PgpsParams, SimConfig
from simlob.network.training import toy_config


@pytest.fixture(autouse=True)
def reset_globals():
    """Run every test with a fresh single-worker float64 configuration."""
    set_config(Config(workers=1, dtype="float64", log_level="WARNING"))
    yield
    set_config(None)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_sim_config():
    """Few agents and a short horizon; the q variance uses a short walk."""
    return SimConfig(n_providers=10, n_takers=10, horizon=300, seed=7, q_var_iters=2000)


@pytest.fixture
def mid_params():
    return PgpsParams.midpoint()


@pytest.fixture
def tiny_model_config():
    """tau=4, d=8, latent 4, one block per side, float64."""
    return toy_config(n_blocks=1)


@pytest.fixture
def unit_norm():
    return NormStats(price_center=0.0, price_scale=1.0, volume_center=0.0, volume_scale=1.0)

