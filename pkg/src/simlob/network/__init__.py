"""SimLOB autoencoder: model, checkpoints, training and interpretability."""

from simlob.network.autoencoder import SimLOB, reconstruction_error, reconstruction_errors
from simlob.network.checkpoint import load_checkpoint, save_checkpoint
from simlob.network.interpret import (
    dominant_latent_features,
    export_attention,
    export_feature_importance,
)
from simlob.network.training import (
    TrainingResult,
    evaluate,
    sensitivity_sweep,
    toy_config,
    train,
    train_from_manifest,
    verify_gradients,
)

__all__ = [
    "SimLOB",
    "reconstruction_error",
    "reconstruction_errors",
    "load_checkpoint",
    "save_checkpoint",
    "export_attention",
    "export_feature_importance",
    "dominant_latent_features",
    "TrainingResult",
    "evaluate",
    "sensitivity_sweep",
    "toy_config",
    "train",
    "train_from_manifest",
    "verify_gradients",
]
