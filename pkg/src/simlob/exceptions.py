"""Exceptions for the SimLOB toolkit.

Exception Hierarchy:
    SimLOBError (base)
    ├── ValidationError (contract violations on inputs, also a ValueError)
    │   ├── OrderValidationError (non-positive or off-tick price/volume)
    │   ├── ParameterError (PGPS parameters, simulation or model configs)
    │   └── ShapeError (tensor, segment or series shape mismatch)
    ├── EmptyBookSideError (mid-price requested with an empty book side)
    ├── NonFiniteError (NaN/Inf produced by a tensor operation)
    ├── PersistenceError (bad magic, version, truncated file, checksum mismatch)
    ├── SimulationError (simulator failure for one parameter tuple)
    ├── TrainingError (NaN loss during training)
    ├── CalibrationError (invalid calibration task)
    └── ConfigError (bad environment values or config-file keys)

Usage:
    - The CLI maps every SimLOBError to exit status 1 and usage errors to exit status 2.
    - NonFiniteError carries the name of the operation that produced the bad value;
      TrainingError carries the offending batch id.
"""

__all__ = [
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
]


class SimLOBError(Exception):
    """Base exception for all SimLOB errors."""

    pass


class ValidationError(SimLOBError, ValueError):
    """Base exception for invalid inputs."""

    pass


class OrderValidationError(ValidationError):
    """Raised when an order has a non-positive or off-tick price, or a non-positive volume."""

    def __init__(self, message: str, price: int | None = None, volume: int | None = None):
        super().__init__(message)
        self.price = price
        self.volume = volume


class ParameterError(ValidationError):
    """Raised when simulator, model or calibration parameters are invalid."""

    pass


class ShapeError(ValidationError):
    """Raised when array or tensor shapes do not conform."""

    def __init__(self, message: str, expected: tuple | None = None, got: tuple | None = None):
        super().__init__(message)
        self.expected = expected
        self.got = got


class EmptyBookSideError(SimLOBError):
    """Raised when a mid-price is requested but one side of the book is empty."""

    def __init__(self, side: str, time: int | None = None):
        where = f" at step {time}" if time is not None else ""
        super().__init__(f"Cannot compute mid-price: {side} side is empty{where}")
        self.side = side
        self.time = time


class NonFiniteError(SimLOBError):
    """Raised when a tensor operation produces NaN or Inf."""

    def __init__(self, op: str, phase: str = "forward"):
        super().__init__(f"Non-finite values produced by '{op}' during {phase} pass")
        self.op = op
        self.phase = phase


class PersistenceError(SimLOBError):
    """Raised when a LOBS1/SLOB1 file or a dataset manifest cannot be read or verified."""

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path


class SimulationError(SimLOBError):
    """Raised when a simulation run fails."""

    pass


class TrainingError(SimLOBError):
    """Raised when training hits a non-finite loss."""

    def __init__(self, message: str, batch_id: int | None = None, epoch: int | None = None):
        super().__init__(message)
        self.batch_id = batch_id
        self.epoch = epoch


class CalibrationError(SimLOBError):
    """Raised when a calibration task is invalid."""

    pass


class ConfigError(SimLOBError):
    """Raised when environment configuration or a config file is invalid."""

    pass
