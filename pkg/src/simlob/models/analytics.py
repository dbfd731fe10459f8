"""Metric reports for stylized facts and reconstruction errors."""

from pydantic import BaseModel, Field

# Estimator definitions written into every stylized-facts report
FACT_ESTIMATORS: dict[str, str] = {
    "log_returns": "r(t) = ln(mid(t+1) / mid(t)) on the mid-price series",
    "logret_wasserstein": "1-D Wasserstein-1 distance between the two log-return samples",
    "autocorrelation": "Pearson autocorrelation of returns at lag 1",
    "volatility_clustering": "Pearson autocorrelation of |returns| at lag 1",
    "volume_volatility_correlation": (
        "Pearson correlation of level-1 total volume (vb1 + va1) at t+1 with |r(t)|"
    ),
    "deltas": "absolute difference of the statistic between the two series",
}


class StylizedFacts(BaseModel):
    """Stylized-fact statistics of one series."""

    autocorrelation: float
    volatility_clustering: float
    volume_volatility_correlation: float
    return_mean: float
    return_std: float


class StylizedFactsReport(BaseModel):
    """Differences in stylized facts between two series (e.g. target vs simulated)."""

    logret_wasserstein: float = Field(ge=0)
    vol_vol_corr_delta: float = Field(ge=0)
    vol_clustering_delta: float = Field(ge=0)
    autocorr_delta: float = Field(ge=0)
    a: StylizedFacts
    b: StylizedFacts
    lag: int = 1
    estimators: dict[str, str] = Field(default_factory=lambda: dict(FACT_ESTIMATORS))


class ErrorDistribution(BaseModel):
    """Per-segment reconstruction errors and their summary."""

    errors: list[float]
    mean: float = Field(ge=0)
    std: float
    mode: float  # centre of the fullest histogram bin
    quantiles: dict[str, float]
    histogram_edges: list[float]
    histogram_counts: list[int]
    precedence_violation_rate: float | None = None

    @property
    def count(self) -> int:
        return len(self.errors)
