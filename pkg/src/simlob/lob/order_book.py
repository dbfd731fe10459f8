"""Price-time priority limit order book."""

import logging
from bisect import bisect_left, insort
from collections import deque

import numpy as np

from simlob.exceptions import OrderValidationError
from simlob.models.book import (
    DEFAULT_DEPTH,
    FIELDS_PER_LEVEL,
    LobSnapshot,
    Order,
    Side,
    Trade,
)

logger = logging.getLogger(__name__)


class OrderBook:
    """Single-instrument book with FIFO queues per price level.

    Each side keeps an ascending list of occupied prices, a price -> queue map and a
    price -> aggregated volume map. The book is a serial state machine; one writer at a time.
    """

    def __init__(self, tick_size: int = 1):
        if tick_size <= 0:
            raise OrderValidationError(f"tick_size must be positive, got {tick_size}")
        self.tick_size = tick_size
        self.next_seq = 0
        self.time = 0
        self._next_id = 1
        self._prices: dict[Side, list[int]] = {Side.BID: [], Side.ASK: []}
        self._queues: dict[Side, dict[int, deque[Order]]] = {Side.BID: {}, Side.ASK: {}}
        self._volumes: dict[Side, dict[int, int]] = {Side.BID: {}, Side.ASK: {}}
        self._orders: dict[int, Order] = {}

    # ------------------------------------------------------------------ queries

    def best_bid(self) -> int | None:
        prices = self._prices[Side.BID]
        return prices[-1] if prices else None

    def best_ask(self) -> int | None:
        prices = self._prices[Side.ASK]
        return prices[0] if prices else None

    def best_price(self, side: Side) -> int | None:
        return self.best_bid() if side is Side.BID else self.best_ask()

    def get_order(self, order_id: int) -> Order | None:
        return self._orders.get(order_id)

    def resting_volume(self, side: Side) -> int:
        return sum(self._volumes[side].values())

    @property
    def order_count(self) -> int:
        return len(self._orders)

    def is_uncrossed(self) -> bool:
        bid, ask = self.best_bid(), self.best_ask()
        return bid is None or ask is None or bid < ask

    # ---------------------------------------------------------------- mutations

    def submit_limit_order(
        self, side: Side, price: int, volume: int, owner: int = 0
    ) -> tuple[list[Trade], int]:
        """Match against the opposite side, then rest any residual volume.

        Returns:
            Trades in execution order, and the id assigned to the incoming order

        Raises:
            OrderValidationError: If price or volume is not positive, or price is off-tick
        """
        self._validate(price, volume)
        if price % self.tick_size:
            raise OrderValidationError(
                f"Price {price} is not a multiple of tick size {self.tick_size}", price=price
            )
        order = self._new_order(side, price, volume, owner)

        trades: list[Trade] = []
        opposite = side.opposite
        while order.volume > 0:
            best = self.best_price(opposite)
            if best is None or (best > price if side is Side.BID else best < price):
                break
            self._fill_level(opposite, best, order, trades)

        if order.volume > 0:
            self._rest(order)
        return trades, order.id

    def submit_market_order(self, side: Side, volume: int, owner: int = 0) -> list[Trade]:
        """Execute against the single best opposite level; any remainder is discarded.

        An empty opposite side makes the order a no-op.

        Raises:
            OrderValidationError: If volume is not positive
        """
        if volume <= 0:
            raise OrderValidationError(f"Volume must be positive, got {volume}", volume=volume)
        opposite = side.opposite
        best = self.best_price(opposite)
        if best is None:
            logger.debug("Market %s order ignored: %s side empty", side.value, opposite.value)
            return []

        order = self._new_order(side, best, volume, owner)
        trades: list[Trade] = []
        self._fill_level(opposite, best, order, trades)
        return trades

    def cancel_order(self, order_id: int) -> bool:
        """Remove a resting order entirely. Returns False if it is not resting."""
        order = self._orders.pop(order_id, None)
        if order is None:
            return False
        queue = self._queues[order.side][order.price]
        queue.remove(order)
        self._reduce_level(order.side, order.price, order.volume)
        return True

    # ------------------------------------------------------------------ snapshot

    def snapshot(
        self,
        depth: int = DEFAULT_DEPTH,
        time: int | None = None,
        reference_price: int | None = None,
    ) -> LobSnapshot:
        """Aggregate the best `depth` levels per side.

        Missing levels extend the last occupied price by one tick per level (asks upward,
        bids downward but never below one tick) with volume 0. An empty side is padded
        outward from the opposite best price; with both sides empty, padding starts from
        `reference_price` (prices stay 0 when no reference is given).
        """
        levels = np.zeros((depth, FIELDS_PER_LEVEL), dtype=np.int64)
        tick = self.tick_size

        bids = self._prices[Side.BID][: -depth - 1 : -1]
        asks = self._prices[Side.ASK][:depth]
        bid_vols = self._volumes[Side.BID]
        ask_vols = self._volumes[Side.ASK]

        for i, price in enumerate(bids):
            levels[i, 0] = price
            levels[i, 1] = bid_vols[price]
        for i, price in enumerate(asks):
            levels[i, 2] = price
            levels[i, 3] = ask_vols[price]

        if len(bids) < depth:
            if bids:
                start = bids[-1]
            elif asks:
                start = asks[0]
            elif reference_price is not None:
                start = reference_price
            else:
                start = None
            if start is not None:
                missing = np.arange(1, depth - len(bids) + 1)
                levels[len(bids) :, 0] = np.maximum(start - missing * tick, tick)

        if len(asks) < depth:
            if asks:
                start = asks[-1]
            elif bids:
                start = bids[0]
            elif reference_price is not None:
                start = reference_price
            else:
                start = None
            if start is not None:
                missing = np.arange(1, depth - len(asks) + 1)
                levels[len(asks) :, 2] = start + missing * tick

        return LobSnapshot(levels, self.time if time is None else time)

    # ------------------------------------------------------------------ helpers

    @staticmethod
    def _validate(price: int, volume: int) -> None:
        if price <= 0:
            raise OrderValidationError(f"Price must be positive, got {price}", price=price)
        if volume <= 0:
            raise OrderValidationError(f"Volume must be positive, got {volume}", volume=volume)

    def _new_order(self, side: Side, price: int, volume: int, owner: int) -> Order:
        order = Order(
            id=self._next_id,
            side=side,
            price=price,
            volume=volume,
            arrival_seq=self.next_seq,
            owner=owner,
        )
        self._next_id += 1
        self.next_seq += 1
        return order

    def _fill_level(self, side: Side, price: int, taker: Order, trades: list[Trade]) -> None:
        """Consume resting orders at one level, oldest first, until taker or level is done."""
        queue = self._queues[side][price]
        filled = 0
        while queue and taker.volume > 0:
            maker = queue[0]
            qty = min(maker.volume, taker.volume)
            maker.volume -= qty
            taker.volume -= qty
            filled += qty
            trades.append(Trade(price, qty, maker.id, taker.id, self.time))
            if maker.volume == 0:
                queue.popleft()
                del self._orders[maker.id]
        self._reduce_level(side, price, filled)

    def _rest(self, order: Order) -> None:
        side, price = order.side, order.price
        queue = self._queues[side].get(price)
        if queue is None:
            queue = deque()
            self._queues[side][price] = queue
            self._volumes[side][price] = 0
            insort(self._prices[side], price)
        queue.append(order)
        self._volumes[side][price] += order.volume
        self._orders[order.id] = order

    def _reduce_level(self, side: Side, price: int, amount: int) -> None:
        remaining = self._volumes[side][price] - amount
        if remaining > 0:
            self._volumes[side][price] = remaining
            return
        del self._volumes[side][price]
        del self._queues[side][price]
        prices = self._prices[side]
        del prices[bisect_left(prices, price)]
