"""SimLOB - limit order book simulation, representation learning and calibration.

The toolkit covers:
- A price-time priority order book and the PGPS agent-based simulator
- Synthetic corpus generation with per-tuple train/test splits
- A Transformer autoencoder (SimLOB) on a small reverse-mode autodiff engine
- Simulator calibration with particle swarm optimization
- Stylized-fact and reconstruction-error analytics

Example usage:
    ```python
    from simlob import CalibrationTask, TARGET_TUPLES, SimConfig, pso_calibrate, simulate

    target = simulate(TARGET_TUPLES["data-1"], SimConfig(horizon=1000, seed=1))
    result = pso_calibrate(CalibrationTask(target=target, objective="midprice", iterations=5))
    print(result.best_params)
    ```
"""

from simlob.calibration import evaluate_calibration, pso_calibrate
from simlob.config import Config, get_config, load_sim_file, set_config
from simlob.data import build_dataset, load_manifest, load_segments
from simlob.exceptions import (
    CalibrationError,
    ConfigError,
    EmptyBookSideError,
    NonFiniteError,
    OrderValidationError,
    ParameterError,
    PersistenceError,
    ShapeError,
    SimLOBError,
    SimulationError,
    TrainingError,
    ValidationError,
)
from simlob.lob import OrderBook, read_lobs, write_lobs
from simlob.models import (
    TARGET_TUPLES,
    CalibrationResult,
    CalibrationTask,
    LobSeries,
    LobSnapshot,
    ModelConfig,
    PgpsParams,
    SimConfig,
)
from simlob.network import SimLOB, load_checkpoint, save_checkpoint, train
from simlob.sim import simulate

try:
    from simlob._version import version as __version__
except ImportError:
    __version__ = "0.0.0.dev0"

__all__ = [
    # Configuration
    "Config",
    "get_config",
    "set_config",
    "load_sim_file",
    # Exceptions
    "SimLOBError",
    "ValidationError",
    "OrderValidationError",
    "ParameterError",
    "ShapeError",
    "EmptyBookSideError",
    "NonFiniteError",
    "PersistenceError",
    "SimulationError",
    "TrainingError",
    "CalibrationError",
    "ConfigError",
    # Order book
    "OrderBook",
    "LobSnapshot",
    "LobSeries",
    "read_lobs",
    "write_lobs",
    # Simulation
    "PgpsParams",
    "SimConfig",
    "TARGET_TUPLES",
    "simulate",
    # Data
    "build_dataset",
    "load_manifest",
    "load_segments",
    # Model
    "ModelConfig",
    "SimLOB",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    # Calibration
    "CalibrationTask",
    "CalibrationResult",
    "pso_calibrate",
    "evaluate_calibration",
]
