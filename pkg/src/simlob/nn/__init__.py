"""Small numpy autodiff stack: tensors, primitives, layers, Adam."""

from simlob.nn.functional import (
    affine,
    gelu,
    layer_norm,
    mse,
    multi_head_self_attention,
    reshape,
    residual_add,
)
from simlob.nn.gradcheck import GradCheckResult, check_gradients
from simlob.nn.modules import (
    FeedForward,
    LayerNorm,
    Linear,
    Module,
    MultiHeadSelfAttention,
    TransformerBlock,
)
from simlob.nn.optim import Adam, AdamState, adam_step
from simlob.nn.tensor import Tensor, no_grad, parameter

__all__ = [
    "Tensor",
    "no_grad",
    "parameter",
    "affine",
    "gelu",
    "layer_norm",
    "mse",
    "multi_head_self_attention",
    "reshape",
    "residual_add",
    "Module",
    "Linear",
    "LayerNorm",
    "MultiHeadSelfAttention",
    "FeedForward",
    "TransformerBlock",
    "Adam",
    "AdamState",
    "adam_step",
    "GradCheckResult",
    "check_gradients",
]
