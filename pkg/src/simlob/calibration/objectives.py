"""Discrepancies between a target LOB series and a simulated one.

All three work in normalized units when NormStats are given (raw units otherwise):

    midprice: squared mid-price differences summed over every step, divided by ceil(T / tau)
    rawlob:   mean Err_r over the floor(T / tau) full tau-step windows
    latent:   squared latent differences summed over the full windows, divided by ceil(T / tau)

A trailing partial window only counts for midprice; the model is fixed to tau steps.
"""

import math
from typing import TYPE_CHECKING

import numpy as np

from simlob.data.dataset import apply_normalizer
from simlob.exceptions import CalibrationError, ShapeError
from simlob.models.book import LobSeries
from simlob.models.calibration import OBJECTIVES
from simlob.models.dataset import DEFAULT_TAU, NormStats

if TYPE_CHECKING:
    from simlob.network.autoencoder import SimLOB


def window_count(length: int, tau: int = DEFAULT_TAU) -> int:
    """ceil(T / tau), the divisor of the midprice and latent objectives."""
    return math.ceil(length / tau)


def _values(series: LobSeries | np.ndarray) -> np.ndarray:
    return series.values if isinstance(series, LobSeries) else np.asarray(series)


def _check_lengths(target: LobSeries | np.ndarray, simulated: LobSeries | np.ndarray) -> int:
    if len(target) != len(simulated):
        raise ShapeError(
            "Target and simulated series differ in length",
            expected=(len(target),),
            got=(len(simulated),),
        )
    return len(target)


def normalized_mid_prices(series: LobSeries | np.ndarray, norm: NormStats | None) -> np.ndarray:
    """Mid-price per step, mapped to normalized price units when `norm` is given."""
    if isinstance(series, LobSeries):
        mids = series.mid_prices()
    else:
        values = np.asarray(series, dtype=np.float64)
        mids = (values[:, 0] + values[:, 2]) / 2
    if norm is None:
        return mids
    return (mids - norm.price_center) / norm.price_scale


def windows(series: LobSeries | np.ndarray, tau: int, norm: NormStats | None) -> np.ndarray:
    """(floor(T / tau), tau, width) full windows, normalized when `norm` is given."""
    values = _values(series)
    n = len(values) // tau
    if n == 0:
        raise ShapeError(f"Series of {len(values)} steps has no full window of {tau}")
    cut = values[: n * tau].reshape(n, tau, values.shape[-1])
    return apply_normalizer(cut, norm) if norm is not None else cut.astype(np.float64)


def objective_midprice(
    target: LobSeries | np.ndarray,
    simulated: LobSeries | np.ndarray,
    tau: int = DEFAULT_TAU,
    norm: NormStats | None = None,
) -> float:
    length = _check_lengths(target, simulated)
    diff = normalized_mid_prices(target, norm) - normalized_mid_prices(simulated, norm)
    return float(np.sum(diff**2) / window_count(length, tau))


def objective_rawlob(
    target: LobSeries | np.ndarray,
    simulated: LobSeries | np.ndarray,
    tau: int = DEFAULT_TAU,
    norm: NormStats | None = None,
) -> float:
    _check_lengths(target, simulated)
    diff = windows(target, tau, norm) - windows(simulated, tau, norm)
    return float((diff**2).mean(axis=(1, 2)).mean())


def encode_windows(model: "SimLOB", series: LobSeries | np.ndarray) -> np.ndarray:
    """Latent vector of every full window, normalized with the model's NormStats."""
    return model.encode(windows(series, model.config.tau, model.norm)).astype(np.float64)


def latent_discrepancy(
    target_latents: np.ndarray, simulated_latents: np.ndarray, length: int, tau: int
) -> float:
    """Positional pairing of latent vectors: sum of squared differences / ceil(T / tau)."""
    return float(np.sum((target_latents - simulated_latents) ** 2) / window_count(length, tau))


def objective_latent(
    target: LobSeries | np.ndarray,
    simulated: LobSeries | np.ndarray,
    model: "SimLOB | None",
) -> float:
    """Latent discrepancy under `model` (anything with .encode, .norm and .config.tau).

    Raises:
        CalibrationError: If no model is given
    """
    if model is None:
        raise CalibrationError("The latent objective requires a trained model")
    length = _check_lengths(target, simulated)
    return latent_discrepancy(
        encode_windows(model, target), encode_windows(model, simulated), length, model.config.tau
    )


class ObjectiveEvaluator:
    """One objective bound to one target, with the target-side work done once."""

    def __init__(
        self,
        objective: str,
        target: LobSeries,
        tau: int = DEFAULT_TAU,
        norm: NormStats | None = None,
        model: "SimLOB | None" = None,
    ):
        if objective == "latent" and model is None:
            raise CalibrationError("The latent objective requires a trained model")
        if objective not in OBJECTIVES:
            raise CalibrationError(f"Unknown objective {objective!r}")
        self.objective = objective
        self.length = len(target)
        self.model = model
        self.norm = norm
        self.tau = model.config.tau if objective == "latent" else tau

        if objective == "midprice":
            self._target = normalized_mid_prices(target, norm)
        elif objective == "rawlob":
            self._target = windows(target, self.tau, norm)
        else:
            self._target = encode_windows(model, target)

    def __call__(self, simulated: LobSeries | np.ndarray) -> float:
        if len(simulated) != self.length:
            raise ShapeError(
                "Simulated series length differs from target",
                expected=(self.length,),
                got=(len(simulated),),
            )
        if self.objective == "midprice":
            diff = self._target - normalized_mid_prices(simulated, self.norm)
            return float(np.sum(diff**2) / window_count(self.length, self.tau))
        if self.objective == "rawlob":
            diff = self._target - windows(simulated, self.tau, self.norm)
            return float((diff**2).mean(axis=(1, 2)).mean())
        return latent_discrepancy(
            self._target, encode_windows(self.model, simulated), self.length, self.tau
        )
