"""Synthetic corpus generation and loading."""

from simlob.data.dataset import (
    apply_normalizer,
    build_dataset,
    fit_normalizer,
    invert_normalizer,
    load_manifest,
    load_segments,
    sample_param_tuples,
    save_manifest,
    segment_series,
    stack_segments,
    verify_manifest,
)

__all__ = [
    "apply_normalizer",
    "build_dataset",
    "fit_normalizer",
    "invert_normalizer",
    "load_manifest",
    "load_segments",
    "sample_param_tuples",
    "save_manifest",
    "segment_series",
    "stack_segments",
    "verify_manifest",
]
