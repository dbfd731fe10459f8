"""PGPS agent-based market simulator.

Liquidity providers post limit orders around the best prices with an exponentially distributed
distance; liquidity takers send market orders whose side follows a mean-reverting random walk
q_taker, and cancel resting orders. Prices are counted in ticks of SimConfig.tick_size.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from simlob.exceptions import ParameterError
from simlob.lob.order_book import OrderBook
from simlob.models.book import FIELDS_PER_LEVEL, LobSeries, Side, Trade
from simlob.models.params import PgpsParams, SimConfig
from simlob.utils.seeding import step_generator

logger = logging.getLogger(__name__)

SEED_VOLUME = 100
SEED_OWNER = -1
Q_VAR_SEED = 0

# Uniform draws per agent per step
PROVIDER_DRAWS = 3  # act?, side, price distance
TAKER_DRAWS = 4  # market?, side, cancel?, which order


@dataclass(frozen=True)
class TakerSideState:
    """Probability that a taker's market order is bid side, plus its long-run variance."""

    q_taker: float = 0.5
    q_var: float = 0.0025

    def __post_init__(self) -> None:
        if not 0.0 <= self.q_taker <= 1.0:
            raise ParameterError(f"q_taker must be in [0, 1], got {self.q_taker}")
        if self.q_var <= 0:
            raise ParameterError(f"q_var must be positive, got {self.q_var}")


def _q_step(q: float, delta_s: float, u: float) -> float:
    """One step of the q-walk driven by a uniform draw u in [0, 1)."""
    distance = abs(q - 0.5)
    if distance == 0.0:
        q = q + delta_s if u < 0.5 else q - delta_s
    elif u < 0.5 + distance:
        q = q - delta_s if q > 0.5 else q + delta_s
    else:
        q = q + delta_s if q > 0.5 else q - delta_s
    return min(1.0, max(0.0, q))


@lru_cache(maxsize=256)
def precompute_q_variance(delta_s: float, iters: int = 100_000, seed: int = Q_VAR_SEED) -> float:
    """Monte Carlo mean of (q_taker - 0.5)^2 over `iters` steps of the walk started at 0.5.

    Raises:
        ParameterError: If delta_s or iters is not positive
    """
    if delta_s <= 0:
        raise ParameterError(f"delta_s must be positive, got {delta_s}")
    if iters <= 0:
        raise ParameterError(f"iters must be positive, got {iters}")

    draws = np.random.Generator(np.random.Philox(key=seed)).random(iters)
    q = 0.5
    total = 0.0
    for u in draws.tolist():
        q = _q_step(q, delta_s, u)
        total += (q - 0.5) ** 2
    q_var = total / iters
    logger.debug("q_var(delta_s=%g, iters=%d) = %g", delta_s, iters, q_var)
    return q_var


def step_q_taker(
    state: TakerSideState, delta_s: float, rng: np.random.Generator
) -> TakerSideState:
    """Advance q_taker by one mean-reverting step of size delta_s, clamped to [0, 1]."""
    return replace(state, q_taker=_q_step(state.q_taker, delta_s, float(rng.random())))


def lambda_t(params: PgpsParams, state: TakerSideState) -> float:
    """Current limit-order price scale: lambda0 * (1 + |q - 0.5| / sqrt(q_var) * c_lambda)."""
    return params.lambda0 * (
        1.0 + abs(state.q_taker - 0.5) / math.sqrt(state.q_var) * params.c_lambda
    )


def limit_price(side: Side, best: int, lam: float, u: float, tick_size: int = 1) -> int:
    """Price `offset + 1` ticks away from `best` on the passive side, offset = floor(-lam * log u).

    `u` must lie in (0, 1]. Bid prices never go below one tick.
    """
    offset = math.floor(-lam * math.log(u))
    distance = (offset + 1) * tick_size
    if side is Side.ASK:
        return best + distance
    return max(tick_size, best - distance)


def draw_limit_order(
    side: Side,
    book: OrderBook,
    params: PgpsParams,
    state: TakerSideState,
    rng: np.random.Generator,
    reference_price: int = 10000,
    volume: int = 100,
) -> tuple[int, int]:
    """Draw a provider limit order on `side`, priced from that side's best (else reference_price).

    Returns:
        (price, volume)
    """
    best = book.best_price(side)
    if best is None:
        best = reference_price
    u = 1.0 - float(rng.random())
    return limit_price(side, best, lambda_t(params, state), u, book.tick_size), volume


class _OrderPool:
    """Resting order ids with O(1) add, discard and uniform pick."""

    def __init__(self) -> None:
        self._ids: list[int] = []
        self._index: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._ids)

    def add(self, order_id: int) -> None:
        self._index[order_id] = len(self._ids)
        self._ids.append(order_id)

    def discard(self, order_id: int) -> None:
        pos = self._index.pop(order_id, None)
        if pos is None:
            return
        last = self._ids.pop()
        if last != order_id:
            self._ids[pos] = last
            self._index[last] = pos

    def pick(self, u: float) -> int | None:
        """Order id at position floor(u * len), or None when empty."""
        if not self._ids:
            return None
        return self._ids[min(int(u * len(self._ids)), len(self._ids) - 1)]


class PgpsSimulator:
    """Runs one PGPS market: a book, the taker-side walk and the per-step agent loop.

    Providers have owner ids 0..n_providers-1 and takers n_providers..n_providers+n_takers-1.
    Within a step providers act first in id order, then takers; each taker's market and cancel
    decisions are independent draws. q_taker advances once at the end of every step.
    """

    def __init__(self, params: PgpsParams, config: SimConfig):
        self.params = params
        self.config = config
        self.book = OrderBook(tick_size=config.tick_size)
        self.state = TakerSideState(
            q_taker=0.5, q_var=precompute_q_variance(params.delta_s, config.q_var_iters)
        )
        self.trade_count = 0
        self.steps_run = 0
        self._pools: dict[int, _OrderPool] = {}
        self._owners: dict[int, int] = {}
        self._block = 1 + PROVIDER_DRAWS * config.n_providers + TAKER_DRAWS * config.n_takers

        if not params.within_bounds():
            logger.debug("Simulating with parameters outside the calibration box: %s", params)
        self._seed_book()

    # ------------------------------------------------------------------ orders

    def _pool_for(self, owner: int) -> _OrderPool:
        key = 0 if self.config.cancel_scope == "book" else owner
        pool = self._pools.get(key)
        if pool is None:
            pool = self._pools[key] = _OrderPool()
        return pool

    def _seed_book(self) -> None:
        tick = self.config.tick_size
        p0 = self.config.initial_price
        self._place(Side.BID, p0 - tick, SEED_VOLUME, SEED_OWNER)
        self._place(Side.ASK, p0 + tick, SEED_VOLUME, SEED_OWNER)

    def _forget_filled(self, trades: list[Trade]) -> None:
        self.trade_count += len(trades)
        for trade in trades:
            if self.book.get_order(trade.maker_id) is None:
                owner = self._owners.pop(trade.maker_id, None)
                if owner is not None:
                    self._pool_for(owner).discard(trade.maker_id)

    def _place(self, side: Side, price: int, volume: int, owner: int) -> None:
        trades, order_id = self.book.submit_limit_order(side, price, volume, owner)
        self._forget_filled(trades)
        if self.book.get_order(order_id) is not None:
            self._owners[order_id] = owner
            self._pool_for(owner).add(order_id)

    def _cancel(self, owner: int, u: float) -> None:
        pool = self._pool_for(owner)
        order_id = pool.pick(u)
        if order_id is None:
            return
        self.book.cancel_order(order_id)
        pool.discard(order_id)
        self._owners.pop(order_id, None)

    # -------------------------------------------------------------------- step

    def step(self, step: int) -> None:
        """Run the agents for one step, using the generator addressed by (seed, step)."""
        params, config = self.params, self.config
        book = self.book
        book.time = step
        draws = step_generator(config.seed, step).random(self._block)

        n_p = config.n_providers
        provider = draws[1 : 1 + PROVIDER_DRAWS * n_p].reshape(n_p, PROVIDER_DRAWS)
        taker = draws[1 + PROVIDER_DRAWS * n_p :].reshape(config.n_takers, TAKER_DRAWS)

        lam = lambda_t(params, self.state)
        for i in np.flatnonzero(provider[:, 0] < params.alpha).tolist():
            side = Side.BID if provider[i, 1] < 0.5 else Side.ASK
            best = book.best_price(side)
            if best is None:
                best = config.initial_price
            price = limit_price(side, best, lam, 1.0 - provider[i, 2], config.tick_size)
            self._place(side, price, config.order_volume, i)

        q = self.state.q_taker
        acting = (taker[:, 0] < params.mu) | (taker[:, 2] < params.delta)
        for j in np.flatnonzero(acting).tolist():
            owner = n_p + j
            if taker[j, 0] < params.mu:
                side = Side.BID if taker[j, 1] < q else Side.ASK
                trades = book.submit_market_order(side, config.order_volume, owner)
                self._forget_filled(trades)
            if taker[j, 2] < params.delta:
                self._cancel(owner, taker[j, 3])

        self.state = replace(self.state, q_taker=_q_step(q, params.delta_s, float(draws[0])))
        self.steps_run += 1

    def run(self) -> LobSeries:
        """Run warmup + horizon steps and record a snapshot after every post-warmup step."""
        config = self.config
        width = FIELDS_PER_LEVEL * config.depth
        values = np.zeros((config.horizon, width), dtype=np.int64)

        for step in range(config.warmup):
            self.step(step)
        for t in range(config.horizon):
            self.step(config.warmup + t)
            snapshot = self.book.snapshot(
                config.depth, time=t, reference_price=config.initial_price
            )
            values[t] = snapshot.flatten()

        logger.info(
            "Simulated %d steps (%d recorded), %d trades, %d resting orders",
            self.steps_run,
            config.horizon,
            self.trade_count,
            self.book.order_count,
        )
        return LobSeries(
            values=values,
            times=np.arange(config.horizon, dtype=np.uint32),
            tick_size=config.tick_size,
        )


def simulate(params: PgpsParams, config: SimConfig | None = None) -> LobSeries:
    """Run one PGPS simulation and return the recorded snapshot series (length horizon).

    Output is fully determined by (params, config); config.seed selects the random stream.
    """
    return PgpsSimulator(params, config or SimConfig()).run()
