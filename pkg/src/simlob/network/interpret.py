"""Interpretability exports: attention maps and input-layer feature importance."""

from dataclasses import dataclass

import numpy as np

from simlob.models.book import column_labels
from simlob.network.autoencoder import SimLOB


@dataclass
class AttentionExport:
    weights: np.ndarray  # [heads, tau, tau], rows sum to 1
    mid_prices: np.ndarray  # [tau], in the units of the given segment


@dataclass
class FeatureImportance:
    feature_labels: list[str]
    feature_importance: np.ndarray  # per input feature, mean |W| over d_model outputs
    latent_importance: np.ndarray  # per d_model unit, mean |W| over input features


@dataclass
class DominantFeature:
    latent_index: int
    importance: float
    contributors: list[tuple[str, float]]  # (input feature, signed weight)


def export_attention(model: SimLOB, segment: np.ndarray, block: int = 0) -> AttentionExport:
    """Attention weights of one encoder block for one segment, with its mid-price series."""
    segment = np.asarray(segment)
    return AttentionExport(
        weights=model.attention_weights(segment, block),
        mid_prices=(segment[:, 0] + segment[:, 2]) / 2,
    )


def export_feature_importance(model: SimLOB) -> FeatureImportance:
    """Absolute-value means of the first per-step affine matrix (features x d_model)."""
    magnitude = np.abs(model.enc_in.W.data.astype(np.float64))
    n_features = magnitude.shape[0]
    return FeatureImportance(
        feature_labels=column_labels(n_features // 4),
        feature_importance=magnitude.mean(axis=1),
        latent_importance=magnitude.mean(axis=0),
    )


def dominant_latent_features(
    model: SimLOB, top_k: int = 2, threshold: float = 1.0
) -> list[DominantFeature]:
    """For the top_k most important d_model units, the inputs with |weight| >= threshold.

    A unit dominated by opposite-signed prices of both sides reads as an adjusted spread;
    one dominated by ask volumes as adjusted ask volume.
    """
    weights = model.enc_in.W.data.astype(np.float64)
    importance = export_feature_importance(model)
    ranked = np.argsort(-importance.latent_importance, kind="stable")[:top_k]
    result = []
    for unit in ranked.tolist():
        column = weights[:, unit]
        picked = np.flatnonzero(np.abs(column) >= threshold)
        result.append(
            DominantFeature(
                latent_index=unit,
                importance=float(importance.latent_importance[unit]),
                contributors=[(importance.feature_labels[i], float(column[i])) for i in picked],
            )
        )
    return result
