"""Stylized facts, reconstruction error distributions and precedence checks."""

from simlob.analytics.errors import (
    error_distribution,
    precedence_violation_rate,
    precedence_violations,
    summarize_errors,
)
from simlob.analytics.stylized_facts import (
    autocorrelation,
    compare_stylized_facts,
    log_returns,
    pearson,
    series_facts,
    volatility_clustering,
    volume_volatility_correlation,
    wasserstein_1d,
)

__all__ = [
    "error_distribution",
    "precedence_violation_rate",
    "precedence_violations",
    "summarize_errors",
    "autocorrelation",
    "compare_stylized_facts",
    "log_returns",
    "pearson",
    "series_facts",
    "volatility_clustering",
    "volume_volatility_correlation",
    "wasserstein_1d",
]
