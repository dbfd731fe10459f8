"""Stylized facts of mid-price returns and their comparison across two series."""

import logging

import numpy as np
from scipy import stats

from simlob.exceptions import ParameterError
from simlob.models.analytics import StylizedFacts, StylizedFactsReport
from simlob.models.book import LobSeries

logger = logging.getLogger(__name__)


def log_returns(mid_prices: np.ndarray) -> np.ndarray:
    """r(t) = ln(mp(t+1) / mp(t)); length T - 1.

    Raises:
        ParameterError: If any mid-price is not positive
    """
    mids = np.asarray(mid_prices, dtype=np.float64)
    if np.any(mids <= 0):
        raise ParameterError("Mid-prices must be positive to take log returns")
    return np.diff(np.log(mids))


def wasserstein_1d(sample_a: np.ndarray, sample_b: np.ndarray) -> float:
    """Wasserstein-1 distance between two empirical 1-D distributions.

    Raises:
        ParameterError: If either sample is empty
    """
    a, b = np.asarray(sample_a, dtype=np.float64), np.asarray(sample_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ParameterError("Wasserstein distance needs two nonempty samples")
    return float(stats.wasserstein_distance(a, b))


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation; defined as 0 (with a warning) when either side has zero variance."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ParameterError(f"Correlation inputs differ in length: {x.shape} vs {y.shape}")
    if x.size < 2 or np.std(x) == 0 or np.std(y) == 0:
        logger.warning("Zero-variance series in correlation; defining it as 0")
        return 0.0
    return float(np.clip(np.corrcoef(x, y)[0, 1], -1.0, 1.0))


def autocorrelation(returns: np.ndarray, lag: int = 1) -> float:
    """Pearson correlation of returns with themselves shifted by `lag`."""
    r = np.asarray(returns, dtype=np.float64)
    if lag <= 0 or r.size <= lag + 1:
        raise ParameterError(f"Series of length {r.size} is too short for lag {lag}")
    return pearson(r[:-lag], r[lag:])


def volatility_clustering(returns: np.ndarray, lag: int = 1) -> float:
    """Autocorrelation of absolute returns."""
    return autocorrelation(np.abs(returns), lag)


def volume_volatility_correlation(volumes: np.ndarray, returns: np.ndarray) -> float:
    """Pearson correlation between per-step volume and |returns| (equal lengths)."""
    return pearson(volumes, np.abs(returns))


def series_facts(series: LobSeries, lag: int = 1) -> tuple[StylizedFacts, np.ndarray]:
    """Stylized facts of one snapshot series, plus its log returns."""
    returns = log_returns(series.mid_prices())
    volumes = series.level1_volume()[1:]
    facts = StylizedFacts(
        autocorrelation=autocorrelation(returns, lag),
        volatility_clustering=volatility_clustering(returns, lag),
        volume_volatility_correlation=volume_volatility_correlation(volumes, returns),
        return_mean=float(returns.mean()),
        return_std=float(returns.std()),
    )
    return facts, returns


def compare_stylized_facts(a: LobSeries, b: LobSeries, lag: int = 1) -> StylizedFactsReport:
    """Return-distribution distance and absolute stylized-fact differences between a and b."""
    facts_a, returns_a = series_facts(a, lag)
    facts_b, returns_b = series_facts(b, lag)
    return StylizedFactsReport(
        logret_wasserstein=wasserstein_1d(returns_a, returns_b),
        vol_vol_corr_delta=abs(
            facts_a.volume_volatility_correlation - facts_b.volume_volatility_correlation
        ),
        vol_clustering_delta=abs(facts_a.volatility_clustering - facts_b.volatility_clustering),
        autocorr_delta=abs(facts_a.autocorrelation - facts_b.autocorrelation),
        a=facts_a,
        b=facts_b,
        lag=lag,
    )
