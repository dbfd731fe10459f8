"""Autoencoder configuration and training records."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from simlob.models.book import DEFAULT_DEPTH, FIELDS_PER_LEVEL

SWEEP_BLOCKS = (2, 4, 6, 8)
SWEEP_LATENTS = (64, 128, 256, 512)


class ModelConfig(BaseModel):
    """Shapes and knobs of the encoder/decoder pair. All weight shapes derive from these."""

    model_config = ConfigDict(frozen=True)

    tau: int = Field(default=100, gt=0)
    n_features: int = Field(default=FIELDS_PER_LEVEL * DEFAULT_DEPTH, gt=0)
    d_model: int = Field(default=256, gt=0)
    n_blocks: int = Field(default=2, ge=0)  # L
    latent_len: int = Field(default=128, gt=0)  # tau-tilde
    heads: int = Field(default=8, gt=0)
    ffn_mult: int = Field(default=4, gt=0)
    hidden_widths: tuple[int, int] | None = None  # between flatten and latent; None derives them
    positional_encoding: bool = False
    dtype: Literal["float32", "float64"] = "float32"
    seed: int = Field(default=0, ge=0)  # weight initialization

    @model_validator(mode="after")
    def _check_shapes(self) -> "ModelConfig":
        if self.d_model % self.heads:
            raise ValueError(f"d_model ({self.d_model}) must be divisible by heads ({self.heads})")
        if self.latent_len > self.n_features * self.tau:
            raise ValueError("latent_len must not exceed n_features * tau")
        if self.hidden_widths is not None and any(w <= 0 for w in self.hidden_widths):
            raise ValueError("hidden_widths must be positive")
        return self

    @property
    def flat_len(self) -> int:
        return self.n_features * self.tau

    @property
    def dense_widths(self) -> tuple[int, int]:
        """Widths of the two dense layers between the flattened map and the latent.

        Unless set explicitly they follow the geometric interpolation from flat_len down to
        latent_len, capped at 8x and 2x latent_len, so tau=100 with latent 128 gives (1024, 256)
        and larger latents still narrow toward the latent.
        """
        if self.hidden_widths is not None:
            return self.hidden_widths
        flat, latent = self.flat_len, self.latent_len
        return (
            round(min(8 * latent, flat ** (2 / 3) * latent ** (1 / 3))),
            round(min(2 * latent, flat ** (1 / 3) * latent ** (2 / 3))),
        )


class EpochStats(BaseModel):
    epoch: int
    train_error: float
    test_error: float
    seconds: float = 0.0


class SweepPoint(BaseModel):
    n_blocks: int
    latent_len: int
    test_error: float
    best_epoch: int
