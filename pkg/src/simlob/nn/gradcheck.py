"""Central finite-difference check of analytic gradients."""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from simlob.nn.tensor import Tensor

logger = logging.getLogger(__name__)

REL_ERROR_FLOOR = 1e-5


@dataclass
class GradCheckResult:
    max_rel_error: float
    worst_parameter: str | None
    worst_index: tuple[int, ...] | None
    checked: int

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_rel_error < tolerance


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), REL_ERROR_FLOOR)


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: dict[str, Tensor],
    h: float = 1e-5,
    max_entries_per_param: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradCheckResult:
    """Compare backprop gradients of `loss_fn()` with central differences.

    Run in float64. With `max_entries_per_param`, a random subset of each parameter's entries
    is perturbed instead of all of them.
    """
    for p in params.values():
        p.zero_grad()
    loss_fn().backward()
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in params.items()
    }

    rng = rng or np.random.default_rng(0)
    worst = GradCheckResult(0.0, None, None, 0)
    for name, p in params.items():
        flat = p.data.reshape(-1)
        indices = np.arange(flat.size)
        if max_entries_per_param is not None and flat.size > max_entries_per_param:
            indices = rng.choice(flat.size, size=max_entries_per_param, replace=False)
        for i in indices.tolist():
            original = flat[i]
            flat[i] = original + h
            plus = loss_fn().item()
            flat[i] = original - h
            minus = loss_fn().item()
            flat[i] = original
            numeric = (plus - minus) / (2 * h)
            error = relative_error(float(analytic[name].reshape(-1)[i]), numeric)
            worst.checked += 1
            if error > worst.max_rel_error:
                worst.max_rel_error = error
                worst.worst_parameter = name
                worst.worst_index = np.unravel_index(i, p.shape)

    logger.debug(
        "Gradient check: %d entries, max relative error %.3g at %s",
        worst.checked,
        worst.max_rel_error,
        worst.worst_parameter,
    )
    return worst
