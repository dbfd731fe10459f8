"""Limit order book data models.

Prices are integer base price units (multiples of the tick size) and volumes integer
shares. Snapshot rows use the column order p_b, v_b, p_a, v_a per level, levels 1..depth.
"""

from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from simlob.exceptions import EmptyBookSideError, ShapeError

DEFAULT_DEPTH = 10
FIELDS_PER_LEVEL = 4

# Column offsets inside one level
BID_PRICE, BID_VOLUME, ASK_PRICE, ASK_VOLUME = range(FIELDS_PER_LEVEL)


class Side(str, Enum):
    """Order side."""

    BID = "bid"
    ASK = "ask"

    @property
    def opposite(self) -> "Side":
        return Side.ASK if self is Side.BID else Side.BID


@dataclass(slots=True, eq=False)
class Order:
    """A resting or incoming limit order."""

    id: int
    side: Side
    price: int
    volume: int
    arrival_seq: int
    owner: int


@dataclass(frozen=True, slots=True)
class Trade:
    """An execution between a resting (maker) order and an incoming (taker) order."""

    price: int
    volume: int
    maker_id: int
    taker_id: int
    time: int


def column_labels(depth: int = DEFAULT_DEPTH) -> list[str]:
    """Snapshot column names: pb1, vb1, pa1, va1, ..., pb{depth}, vb{depth}, ..."""
    return [f"{name}{i}" for i in range(1, depth + 1) for name in ("pb", "vb", "pa", "va")]


@dataclass
class LobSnapshot:
    """Top-of-book state at one step: `levels` is a depth x 4 integer array."""

    levels: np.ndarray
    time: int = 0

    def __post_init__(self) -> None:
        self.levels = np.asarray(self.levels, dtype=np.int64)
        if self.levels.ndim != 2 or self.levels.shape[1] != FIELDS_PER_LEVEL:
            raise ShapeError(
                "Snapshot levels must be depth x 4",
                expected=(None, FIELDS_PER_LEVEL),
                got=self.levels.shape,
            )

    @property
    def depth(self) -> int:
        return self.levels.shape[0]

    @property
    def bid_prices(self) -> np.ndarray:
        return self.levels[:, BID_PRICE]

    @property
    def bid_volumes(self) -> np.ndarray:
        return self.levels[:, BID_VOLUME]

    @property
    def ask_prices(self) -> np.ndarray:
        return self.levels[:, ASK_PRICE]

    @property
    def ask_volumes(self) -> np.ndarray:
        return self.levels[:, ASK_VOLUME]

    def flatten(self) -> np.ndarray:
        """Row in LOBS1 column order."""
        return self.levels.reshape(-1)

    def satisfies_precedence(self) -> bool:
        """Check ask > bid across occupied levels and strict monotonicity on each side."""
        bids = self.bid_prices[self.bid_volumes > 0]
        asks = self.ask_prices[self.ask_volumes > 0]
        if bids.size > 1 and np.any(np.diff(bids) >= 0):
            return False
        if asks.size > 1 and np.any(np.diff(asks) <= 0):
            return False
        if bids.size and asks.size and asks.min() <= bids.max():
            return False
        return True


def mid_price(snapshot: LobSnapshot) -> float:
    """Return (p_a_1 + p_b_1) / 2 in price units.

    Raises:
        EmptyBookSideError: If either best level is unoccupied
    """
    if snapshot.levels[0, BID_VOLUME] <= 0:
        raise EmptyBookSideError("bid", snapshot.time)
    if snapshot.levels[0, ASK_VOLUME] <= 0:
        raise EmptyBookSideError("ask", snapshot.time)
    return (int(snapshot.levels[0, ASK_PRICE]) + int(snapshot.levels[0, BID_PRICE])) / 2


@dataclass
class LobSeries:
    """A stream of snapshots stored as a T x (4 * depth) integer matrix."""

    values: np.ndarray
    times: np.ndarray = field(default=None)  # type: ignore[assignment]
    tick_size: int = 1

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.int64)
        if self.values.ndim != 2 or self.values.shape[1] % FIELDS_PER_LEVEL:
            raise ShapeError(
                "Series values must be T x (4 * depth)",
                expected=(None, FIELDS_PER_LEVEL * DEFAULT_DEPTH),
                got=self.values.shape,
            )
        if self.times is None:
            self.times = np.arange(self.values.shape[0], dtype=np.uint32)
        self.times = np.asarray(self.times, dtype=np.uint32)
        if self.times.shape != (self.values.shape[0],):
            raise ShapeError(
                "Series times must have one entry per row",
                expected=(self.values.shape[0],),
                got=self.times.shape,
            )

    @classmethod
    def from_snapshots(cls, snapshots: list[LobSnapshot], tick_size: int = 1) -> "LobSeries":
        if not snapshots:
            return cls(np.zeros((0, FIELDS_PER_LEVEL * DEFAULT_DEPTH), dtype=np.int64))
        return cls(
            values=np.stack([s.flatten() for s in snapshots]),
            times=np.array([s.time for s in snapshots], dtype=np.uint32),
            tick_size=tick_size,
        )

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, index: int) -> LobSnapshot:
        row = self.values[index]
        return LobSnapshot(row.reshape(self.depth, FIELDS_PER_LEVEL), int(self.times[index]))

    def __iter__(self) -> Iterator[LobSnapshot]:
        for i in range(len(self)):
            yield self[i]

    @property
    def depth(self) -> int:
        return self.values.shape[1] // FIELDS_PER_LEVEL

    def slice(self, start: int, stop: int) -> "LobSeries":
        return LobSeries(self.values[start:stop], self.times[start:stop], self.tick_size)

    def mid_prices(self, carry_forward: bool = True) -> np.ndarray:
        """Mid-price per step in base price units.

        Steps where either side is empty repeat the previous valid mid-price; leading
        empty steps take the first valid one. With carry_forward=False an empty side raises.

        Raises:
            EmptyBookSideError: If carry_forward is False and a side is empty, or if no
                step has both sides occupied
        """
        bid_p = self.values[:, BID_PRICE].astype(np.float64)
        ask_p = self.values[:, ASK_PRICE].astype(np.float64)
        valid = (self.values[:, BID_VOLUME] > 0) & (self.values[:, ASK_VOLUME] > 0)
        mids = (bid_p + ask_p) / 2
        if valid.all():
            return mids
        if not carry_forward or not valid.any():
            bad = int(np.argmin(valid))
            side = "bid" if self.values[bad, BID_VOLUME] <= 0 else "ask"
            raise EmptyBookSideError(side, int(self.times[bad]))

        index = np.where(valid, np.arange(len(mids)), -1)
        np.maximum.accumulate(index, out=index)
        index[index < 0] = int(np.argmax(valid))
        return mids[index]

    def level1_volume(self) -> np.ndarray:
        """Total best-level volume (bid + ask) per step."""
        return (self.values[:, BID_VOLUME] + self.values[:, ASK_VOLUME]).astype(np.float64)
