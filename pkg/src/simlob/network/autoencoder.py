"""SimLOB encoder/decoder pair.

Encoder: per-step affine (features -> d_model), L pre-norm Transformer blocks, per-step affine
(d_model -> features), flatten, then three affine layers down to the latent vector with GELU
between them. The decoder mirrors those shapes with its own weights.
"""

import logging

import numpy as np

from simlob.exceptions import ShapeError
from simlob.models.dataset import NormStats
from simlob.models.network import ModelConfig
from simlob.nn import functional as F
from simlob.nn.modules import Linear, Module, TransformerBlock
from simlob.nn.tensor import Tensor, no_grad
from simlob.utils.seeding import child_rng

logger = logging.getLogger(__name__)


def _mlp(layers: list[Linear], x: Tensor) -> Tensor:
    """Affine layers with GELU between consecutive ones (none after the last)."""
    for i, layer in enumerate(layers):
        x = layer(x)
        if i < len(layers) - 1:
            x = F.gelu(x)
    return x


class SimLOB(Module):
    """Transformer autoencoder over tau x features LOB segments.

    `norm` records the normalization the model was trained under so raw series can be
    encoded later; it is not a parameter.
    """

    def __init__(self, config: ModelConfig | None = None, norm: NormStats | None = None):
        self.config = config = config or ModelConfig()
        self.norm = norm
        rng = child_rng(config.seed, 0)
        dtype = np.dtype(config.dtype)
        d, f = config.d_model, config.n_features
        w1, w2 = config.dense_widths

        def blocks() -> list[TransformerBlock]:
            return [
                TransformerBlock(d, config.heads, config.ffn_mult, rng, dtype)
                for _ in range(config.n_blocks)
            ]

        # encoder f
        self.enc_in = Linear(f, d, rng, dtype)
        self.enc_blocks = blocks()
        self.enc_out = Linear(d, f, rng, dtype)
        self.enc_reduce = [
            Linear(config.flat_len, w1, rng, dtype),
            Linear(w1, w2, rng, dtype),
            Linear(w2, config.latent_len, rng, dtype),
        ]
        # decoder g
        self.dec_expand = [
            Linear(config.latent_len, w2, rng, dtype),
            Linear(w2, w1, rng, dtype),
            Linear(w1, config.flat_len, rng, dtype),
        ]
        self.dec_in = Linear(f, d, rng, dtype)
        self.dec_blocks = blocks()
        self.dec_out = Linear(d, f, rng, dtype)

        self._positions = (
            F.sinusoidal_encoding(config.tau, d, dtype) if config.positional_encoding else None
        )

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.config.dtype)

    def _add_positions(self, h: Tensor) -> Tensor:
        if self._positions is None:
            return h
        return F.residual_add(h, Tensor(np.broadcast_to(self._positions, h.shape)))

    # -------------------------------------------------------------- tensor API

    def encode_tensor(self, x: Tensor) -> Tensor:
        """[B, tau, features] -> [B, latent_len]."""
        cfg = self.config
        if x.shape[-2:] != (cfg.tau, cfg.n_features):
            raise ShapeError(
                "Segment shape does not match model",
                expected=(cfg.tau, cfg.n_features),
                got=x.shape,
            )
        h = self._add_positions(self.enc_in(x))
        for block in self.enc_blocks:
            h = block(h)
        h = F.reshape(self.enc_out(h), (*x.shape[:-2], cfg.flat_len))
        return _mlp(self.enc_reduce, h)

    def decode_tensor(self, z: Tensor) -> Tensor:
        """[B, latent_len] -> [B, tau, features]."""
        cfg = self.config
        if z.shape[-1] != cfg.latent_len:
            raise ShapeError(
                "Latent length does not match model", expected=(cfg.latent_len,), got=z.shape
            )
        h = F.reshape(_mlp(self.dec_expand, z), (*z.shape[:-1], cfg.tau, cfg.n_features))
        h = self._add_positions(self.dec_in(h))
        for block in self.dec_blocks:
            h = block(h)
        return self.dec_out(h)

    def forward(self, x: Tensor) -> Tensor:
        return self.decode_tensor(self.encode_tensor(x))

    # --------------------------------------------------------------- array API

    def _as_batch(self, values: np.ndarray, trailing: int) -> tuple[np.ndarray, bool]:
        values = np.asarray(values, dtype=self.dtype)
        single = values.ndim == trailing
        return (values[None] if single else values), single

    def encode(self, segments: np.ndarray) -> np.ndarray:
        """Latent vectors of normalized segments.

        (tau, features) gives (latent_len,); (B, tau, features) gives (B, latent_len).
        """
        batch, single = self._as_batch(segments, 2)
        with no_grad():
            z = self.encode_tensor(Tensor(batch)).data
        return z[0] if single else z

    def decode(self, latents: np.ndarray) -> np.ndarray:
        """Reconstructed segments in normalized units."""
        batch, single = self._as_batch(latents, 1)
        with no_grad():
            x = self.decode_tensor(Tensor(batch)).data
        return x[0] if single else x

    def reconstruct(self, segments: np.ndarray) -> np.ndarray:
        batch, single = self._as_batch(segments, 2)
        with no_grad():
            x = self.forward(Tensor(batch)).data
        return x[0] if single else x

    def attention_weights(self, segment: np.ndarray, block: int = 0) -> np.ndarray:
        """Per-head attention [heads, tau, tau] of encoder block `block` for one segment."""
        if not self.enc_blocks:
            raise ShapeError("Model has no Transformer blocks", got=(0,))
        self.encode(np.asarray(segment)[None])
        weights = self.enc_blocks[block].attn.last_weights
        return np.asarray(weights[0])


def reconstruction_errors(x: np.ndarray, x_r: np.ndarray) -> np.ndarray:
    """Per-segment Err_r: mean squared entrywise difference over the last two axes."""
    x, x_r = np.asarray(x, dtype=np.float64), np.asarray(x_r, dtype=np.float64)
    if x.shape != x_r.shape:
        raise ShapeError(
            "Original and reconstruction differ in shape", expected=x.shape, got=x_r.shape
        )
    return ((x - x_r) ** 2).mean(axis=(-2, -1))


def reconstruction_error(x: np.ndarray, x_r: np.ndarray) -> float:
    """Err_r of one segment, or the batch mean (Loss_r) for stacked segments."""
    return float(np.mean(reconstruction_errors(x, x_r)))
