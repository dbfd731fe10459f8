"""Data models for SimLOB."""

from simlob.models.analytics import (
    FACT_ESTIMATORS,
    ErrorDistribution,
    StylizedFacts,
    StylizedFactsReport,
)
from simlob.models.book import (
    DEFAULT_DEPTH,
    FIELDS_PER_LEVEL,
    LobSeries,
    LobSnapshot,
    Order,
    Side,
    Trade,
    column_labels,
    mid_price,
)
from simlob.models.calibration import (
    OBJECTIVES,
    CalibrationReport,
    CalibrationResult,
    CalibrationTask,
)
from simlob.models.dataset import DEFAULT_TAU, DatasetManifest, NormStats, Segment, ShardInfo
from simlob.models.network import EpochStats, ModelConfig, SweepPoint
from simlob.models.params import (
    PARAM_BOUNDS,
    PARAM_ORDER,
    TARGET_TUPLES,
    PgpsParams,
    SimConfig,
)

__all__ = [
    "DEFAULT_DEPTH",
    "FIELDS_PER_LEVEL",
    "Side",
    "Order",
    "Trade",
    "LobSnapshot",
    "LobSeries",
    "column_labels",
    "mid_price",
    "PARAM_ORDER",
    "PARAM_BOUNDS",
    "TARGET_TUPLES",
    "PgpsParams",
    "SimConfig",
    "DEFAULT_TAU",
    "NormStats",
    "Segment",
    "ShardInfo",
    "DatasetManifest",
    "ModelConfig",
    "EpochStats",
    "SweepPoint",
    "OBJECTIVES",
    "CalibrationTask",
    "CalibrationReport",
    "CalibrationResult",
    "FACT_ESTIMATORS",
    "StylizedFacts",
    "StylizedFactsReport",
    "ErrorDistribution",
]
