"""Reconstruction error distributions and price-precedence checks."""

import logging
from typing import Protocol

import numpy as np

from simlob.exceptions import ParameterError
from simlob.models.analytics import ErrorDistribution
from simlob.models.book import ASK_PRICE, BID_PRICE, FIELDS_PER_LEVEL

logger = logging.getLogger(__name__)

DEFAULT_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
RECONSTRUCT_BATCH = 256


class Reconstructor(Protocol):
    def reconstruct(self, segments: np.ndarray) -> np.ndarray: ...


def precedence_violations(values: np.ndarray) -> np.ndarray:
    """Boolean per row of (..., 4 * depth) values: True where the price columns break
    ask1 > bid1, strictly ascending asks or strictly descending bids.

    Any increasing affine map of prices (such as normalization) leaves the result unchanged.
    """
    values = np.asarray(values, dtype=np.float64)
    levels = values.reshape(*values.shape[:-1], -1, FIELDS_PER_LEVEL)
    bids = levels[..., BID_PRICE]
    asks = levels[..., ASK_PRICE]
    crossed = asks[..., 0] <= bids[..., 0]
    bids_bad = np.any(np.diff(bids, axis=-1) >= 0, axis=-1)
    asks_bad = np.any(np.diff(asks, axis=-1) <= 0, axis=-1)
    return crossed | bids_bad | asks_bad


def precedence_violation_rate(values: np.ndarray) -> float:
    """Fraction of steps (rows) violating price precedence."""
    violations = precedence_violations(values)
    return float(violations.mean()) if violations.size else 0.0


def summarize_errors(
    errors: np.ndarray, bins: int = 50, quantiles: tuple[float, ...] = DEFAULT_QUANTILES
) -> ErrorDistribution:
    """Mean, std, histogram-peak mode and quantiles of per-segment errors."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size == 0:
        raise ParameterError("No errors to summarize")
    counts, edges = np.histogram(errors, bins=bins)
    peak = int(np.argmax(counts))
    return ErrorDistribution(
        errors=errors.tolist(),
        mean=float(errors.mean()),
        std=float(errors.std()),
        mode=float((edges[peak] + edges[peak + 1]) / 2),
        quantiles={f"q{q:g}": float(v) for q, v in zip(quantiles, np.quantile(errors, quantiles))},
        histogram_edges=edges.tolist(),
        histogram_counts=counts.tolist(),
    )


def error_distribution(
    model: Reconstructor,
    segments: np.ndarray,
    bins: int = 50,
    quantiles: tuple[float, ...] = DEFAULT_QUANTILES,
) -> ErrorDistribution:
    """Err_r of every (normalized) segment under `model`, summarized.

    Also reports the share of reconstructed steps whose prices break precedence.
    """
    segments = np.asarray(segments)
    if len(segments) == 0:
        raise ParameterError("No segments to evaluate")
    errors = []
    violations = []
    for start in range(0, len(segments), RECONSTRUCT_BATCH):
        batch = segments[start : start + RECONSTRUCT_BATCH]
        rebuilt = np.asarray(model.reconstruct(batch), dtype=np.float64)
        errors.append(((batch.astype(np.float64) - rebuilt) ** 2).mean(axis=(-2, -1)))
        violations.append(precedence_violations(rebuilt).ravel())
    summary = summarize_errors(np.concatenate(errors), bins, quantiles)
    summary.precedence_violation_rate = float(np.concatenate(violations).mean())
    logger.info(
        "Err_r over %d segments: mean %.6f, mode %.6f", len(segments), summary.mean, summary.mode
    )
    return summary
