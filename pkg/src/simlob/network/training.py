"""Training loop, gradient verification and the (L, latent length) sweep."""

import logging
import time
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from simlob.data.dataset import load_segments, stack_segments
from simlob.exceptions import NonFiniteError, ParameterError, TrainingError
from simlob.models.book import FIELDS_PER_LEVEL
from simlob.models.dataset import DatasetManifest, NormStats
from simlob.models.network import SWEEP_BLOCKS, SWEEP_LATENTS, EpochStats, ModelConfig, SweepPoint
from simlob.network.autoencoder import SimLOB, reconstruction_errors
from simlob.network.checkpoint import save_checkpoint
from simlob.nn import functional as F
from simlob.nn.gradcheck import GradCheckResult, check_gradients
from simlob.nn.optim import AdamState, adam_step
from simlob.nn.tensor import Tensor
from simlob.utils.seeding import child_rng

logger = logging.getLogger(__name__)

EVAL_BATCH = 256


@dataclass
class TrainingResult:
    model: SimLOB  # holds the best-on-test weights
    history: list[EpochStats] = field(default_factory=list)
    initial_test_error: float = float("nan")
    best_epoch: int = -1

    @property
    def best_test_error(self) -> float:
        if self.best_epoch < 0:
            return self.initial_test_error
        return self.history[self.best_epoch].test_error

    @property
    def loss_curve(self) -> list[float]:
        return [h.train_error for h in self.history]


def evaluate(model: SimLOB, data: np.ndarray, batch_size: int = EVAL_BATCH) -> float:
    """Mean Err_r of the model over (N, tau, features) normalized segments."""
    if len(data) == 0:
        return float("nan")
    errors = [
        reconstruction_errors(chunk, model.reconstruct(chunk))
        for chunk in np.array_split(data, max(1, -(-len(data) // batch_size)))
    ]
    return float(np.concatenate(errors).mean())


def _batch_gradients(
    model: SimLOB, batch: np.ndarray, micro_batches: int
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and gradient of the batch-mean Err_r, summed over micro-batches in a fixed order."""
    params = model.parameters()
    total = len(batch)
    loss = 0.0
    grads: dict[str, np.ndarray] = {}
    for chunk in np.array_split(batch, min(micro_batches, total)):
        model.zero_grad()
        x = Tensor(chunk)
        chunk_loss = F.mse(model.forward(x), x)
        chunk_loss.backward()
        weight = len(chunk) / total
        loss += weight * chunk_loss.item()
        for name, p in params.items():
            if p.grad is None:
                continue
            g = weight * p.grad.astype(np.float64)
            grads[name] = grads[name] + g if name in grads else g
    return loss, grads


def train(
    model: SimLOB,
    train_data: np.ndarray,
    test_data: np.ndarray,
    epochs: int = 200,
    batch_size: int = 128,
    lr: float = 1e-4,
    seed: int = 0,
    micro_batches: int = 1,
    checkpoint_path: Path | None = None,
    on_epoch: Callable[[EpochStats], None] | None = None,
) -> TrainingResult:
    """Minimize batch-mean Err_r with Adam; keep the weights with the lowest test Err_r.

    Data are (N, tau, features) arrays in normalized units. Shuffling is driven by `seed`.
    Each epoch appends one EpochStats; with epochs=0 the model is returned untouched.

    Raises:
        TrainingError: If a batch produces a non-finite loss or gradient
    """
    if batch_size <= 0 or micro_batches <= 0:
        raise ParameterError("batch_size and micro_batches must be positive")
    if len(train_data) == 0:
        raise ParameterError("Training set is empty")

    train_data = np.asarray(train_data, dtype=model.dtype)
    test_data = np.asarray(test_data, dtype=model.dtype)
    result = TrainingResult(model=model, initial_test_error=evaluate(model, test_data))
    logger.info("Initial test Err_r %.6f", result.initial_test_error)
    if epochs == 0:
        return result

    params = model.parameters()
    state = AdamState(lr=lr)
    best_error = result.initial_test_error
    best_state = model.state_dict()
    batch_id = 0

    for epoch in range(epochs):
        started = time.perf_counter()
        order = child_rng(seed, epoch).permutation(len(train_data))
        losses = []
        for start in range(0, len(order), batch_size):
            batch = train_data[order[start : start + batch_size]]
            try:
                loss, grads = _batch_gradients(model, batch, micro_batches)
            except NonFiniteError as e:
                raise TrainingError(
                    f"Non-finite value in '{e.op}' ({e.phase}) at batch {batch_id}",
                    batch_id=batch_id,
                    epoch=epoch,
                ) from e
            if not np.isfinite(loss):
                raise TrainingError(f"Loss is {loss} at batch {batch_id}", batch_id, epoch)
            adam_step(params, grads, state)
            losses.append(loss * len(batch))
            batch_id += 1
            logger.debug("epoch %d batch %d loss %.6f", epoch, batch_id, loss)

        stats = EpochStats(
            epoch=epoch,
            train_error=float(np.sum(losses) / len(train_data)),
            test_error=evaluate(model, test_data),
            seconds=time.perf_counter() - started,
        )
        result.history.append(stats)
        logger.info(
            "Epoch %d: train Err_r %.6f, test Err_r %.6f",
            epoch,
            stats.train_error,
            stats.test_error,
        )
        # An empty test set selects on training error
        score = stats.test_error if np.isfinite(stats.test_error) else stats.train_error
        if not np.isfinite(best_error) or score < best_error:
            best_error = score
            best_state = model.state_dict()
            result.best_epoch = epoch
            if checkpoint_path is not None:
                save_checkpoint(checkpoint_path, model)
        if on_epoch is not None:
            on_epoch(stats)

    model.load_state_dict(best_state)
    return result


def train_from_manifest(
    manifest: DatasetManifest,
    root: Path,
    config: ModelConfig | None = None,
    **kwargs,
) -> TrainingResult:
    """Load both splits of a generated corpus and train a fresh model on them."""
    train_data = stack_segments(load_segments(manifest, root, "train"))
    test_data = stack_segments(load_segments(manifest, root, "test"))
    if config is None:
        config = ModelConfig(tau=manifest.tau, n_features=manifest.depth * FIELDS_PER_LEVEL)
    model = SimLOB(config, norm=manifest.norm)
    logger.info(
        "Training on %d segments (%d test), %d parameters",
        len(train_data),
        len(test_data),
        model.num_parameters(),
    )
    return train(model, train_data, test_data, **kwargs)


def toy_config(
    n_blocks: int = 2, heads: int = 2, positional_encoding: bool = False
) -> ModelConfig:
    """The smallest model with every layer type: tau=4, d=8, latent 4, float64."""
    return ModelConfig(
        tau=4,
        d_model=8,
        n_blocks=n_blocks,
        latent_len=4,
        heads=heads,
        ffn_mult=4,
        hidden_widths=(16, 8),
        positional_encoding=positional_encoding,
        dtype="float64",
    )


def verify_gradients(
    config: ModelConfig | None = None, seed: int = 0, max_entries_per_param: int | None = 8
) -> GradCheckResult:
    """Finite-difference check of the full encoder-decoder on a random toy batch."""
    config = config or toy_config()
    if config.dtype != "float64":
        config = config.model_copy(update={"dtype": "float64"})
    model = SimLOB(config)
    x = Tensor(child_rng(seed, 1).standard_normal((2, config.tau, config.n_features)))
    return check_gradients(
        lambda: F.mse(model.forward(x), x),
        model.parameters(),
        max_entries_per_param=max_entries_per_param,
        rng=child_rng(seed, 2),
    )


def sensitivity_sweep(
    train_data: np.ndarray,
    test_data: np.ndarray,
    base_config: ModelConfig,
    blocks: Iterable[int] = SWEEP_BLOCKS,
    latents: Iterable[int] = SWEEP_LATENTS,
    norm: NormStats | None = None,
    **train_kwargs,
) -> list[SweepPoint]:
    """Train one model per (L, latent length) pair and record its best test Err_r."""
    points = []
    for n_blocks in blocks:
        for latent_len in latents:
            config = base_config.model_copy(
                update={"n_blocks": n_blocks, "latent_len": latent_len}
            )
            config = ModelConfig.model_validate(config.model_dump())
            result = train(SimLOB(config, norm=norm), train_data, test_data, **train_kwargs)
            points.append(
                SweepPoint(
                    n_blocks=n_blocks,
                    latent_len=latent_len,
                    test_error=result.best_test_error,
                    best_epoch=result.best_epoch,
                )
            )
            logger.info(
                "Sweep L=%d latent=%d: test Err_r %.6f",
                n_blocks,
                latent_len,
                points[-1].test_error,
            )
    return points
