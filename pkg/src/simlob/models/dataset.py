"""Dataset models: segments, normalization statistics and the corpus manifest."""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from simlob.exceptions import ShapeError
from simlob.models.book import DEFAULT_DEPTH, FIELDS_PER_LEVEL
from simlob.models.params import PgpsParams

DEFAULT_TAU = 100
PADDING_RULE = "extend-last-price-by-one-tick-volume-0"

Split = Literal["train", "test"]


class NormStats(BaseModel):
    """Global affine maps for price columns and volume columns."""

    model_config = ConfigDict(frozen=True)

    price_center: float
    price_scale: float = Field(gt=0)
    volume_center: float
    volume_scale: float = Field(gt=0)

    def column_affine(self, width: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-column (center, scale) vectors for a row of `width` snapshot features."""
        is_price = (np.arange(width) % 2) == 0
        center = np.where(is_price, self.price_center, self.volume_center)
        scale = np.where(is_price, self.price_scale, self.volume_scale)
        return center, scale


@dataclass
class Segment:
    """A tau x (4 * depth) window cut from one simulated series.

    `source` is (tuple index, offset of the first step in the source series).
    """

    values: np.ndarray
    source: tuple[int, int] = (0, 0)
    normalized: bool = False

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[1] % FIELDS_PER_LEVEL:
            raise ShapeError(
                "Segment values must be tau x (4 * depth)",
                expected=(DEFAULT_TAU, FIELDS_PER_LEVEL * DEFAULT_DEPTH),
                got=self.values.shape,
            )

    @property
    def tau(self) -> int:
        return self.values.shape[0]


class ShardInfo(BaseModel):
    """One LOBS1 shard holding consecutive segments of one tuple and one split."""

    path: str  # relative to the manifest directory
    split: Split
    tuple_index: int
    count: int  # segments in the shard
    offsets: list[int]  # source offsets of each segment, in shard order
    sha256: str


class DatasetManifest(BaseModel):
    """Everything needed to reload and verify a generated corpus."""

    n_param_tuples: int
    segments_per_tuple: int
    split_fraction: float = Field(ge=0, le=1)
    seed: int
    tau: int = DEFAULT_TAU
    steps: int
    warmup: int
    depth: int = DEFAULT_DEPTH
    tick_size: int = 1
    padding_rule: str = PADDING_RULE
    norm: NormStats
    params: list[PgpsParams]
    shards: list[ShardInfo]

    def shards_for(self, split: Split) -> list[ShardInfo]:
        return [s for s in self.shards if s.split == split]

    def count(self, split: Split) -> int:
        return sum(s.count for s in self.shards_for(split))
