"""Differentiable primitives with hand-derived backward rules.

Reductions (batch sums for weight gradients, layer-norm moments, the MSE sum) accumulate in
64-bit even when tensors are 32-bit.
"""

import math

import numpy as np
from scipy import special

from simlob.exceptions import ShapeError
from simlob.nn.tensor import Tensor

LAYER_NORM_EPS = 1e-5
_SQRT_2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _f64(a: np.ndarray) -> np.ndarray:
    return a.astype(np.float64, copy=False)


def _require_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes differ", expected=a.shape, got=b.shape)


def affine(x: Tensor, W: Tensor, b: Tensor | None = None) -> Tensor:
    """x [..., d_in] @ W [d_in, d_out] + b [d_out]."""
    if x.shape[-1] != W.shape[0] or (b is not None and b.shape != (W.shape[1],)):
        raise ShapeError(
            "affine: input, weight and bias do not conform",
            expected=(W.shape[0], W.shape[1]),
            got=x.shape,
        )
    out = x.data @ W.data
    if b is not None:
        out = out + b.data

    def backward(g: np.ndarray):
        g2 = _f64(g.reshape(-1, g.shape[-1]))
        x2 = _f64(x.data.reshape(-1, x.shape[-1]))
        gx = g @ W.data.T if x.requires_grad else None
        gW = x2.T @ g2 if W.requires_grad else None
        if b is None:
            return gx, gW
        gb = g2.sum(axis=0) if b.requires_grad else None
        return gx, gW, gb

    parents = (x, W) if b is None else (x, W, b)
    return Tensor.from_op(out, parents, backward, "affine")


def gelu(x: Tensor) -> Tensor:
    """Exact GELU: x * Phi(x)."""
    cdf = 0.5 * (1.0 + special.erf(x.data / _SQRT_2))
    out = x.data * cdf

    def backward(g: np.ndarray):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x.data**2)
        return (g * (cdf + x.data * pdf),)

    return Tensor.from_op(out.astype(x.dtype, copy=False), (x,), backward, "gelu")


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    """Normalize the last dimension to mean 0 / variance 1, then scale and shift."""
    n = x.shape[-1]
    if gain.shape != (n,) or bias.shape != (n,):
        raise ShapeError("layer_norm: gain/bias must match last dim", expected=(n,), got=gain.shape)

    x64 = _f64(x.data)
    mean = x64.mean(axis=-1, keepdims=True)
    centered = x64 - mean
    inv_std = 1.0 / np.sqrt((centered**2).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * inv_std
    out = (xhat * gain.data + bias.data).astype(x.dtype, copy=False)

    def backward(g: np.ndarray):
        g64 = _f64(g)
        lead = tuple(range(g.ndim - 1))
        ggain = (g64 * xhat).sum(axis=lead) if gain.requires_grad else None
        gbias = g64.sum(axis=lead) if bias.requires_grad else None
        gx = None
        if x.requires_grad:
            gxhat = g64 * gain.data
            gx = (inv_std / n) * (
                n * gxhat
                - gxhat.sum(axis=-1, keepdims=True)
                - xhat * (gxhat * xhat).sum(axis=-1, keepdims=True)
            )
        return gx, ggain, gbias

    return Tensor.from_op(out, (x, gain, bias), backward, "layer_norm")


def residual_add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise a + b for equal shapes."""
    _require_same_shape(a, b, "residual_add")
    return Tensor.from_op(a.data + b.data, (a, b), lambda g: (g, g), "residual_add")


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    original = x.shape
    out = x.data.reshape(shape)
    return Tensor.from_op(out, (x,), lambda g: (g.reshape(original),), "reshape")


def mse(a: Tensor, b: Tensor) -> Tensor:
    """Mean of squared entrywise differences (scalar)."""
    _require_same_shape(a, b, "mse")
    diff = _f64(a.data) - _f64(b.data)
    n = diff.size
    out = np.asarray((diff**2).sum() / n, dtype=a.dtype)

    def backward(g: np.ndarray):
        scaled = (2.0 / n) * _f64(g) * diff
        return (
            scaled if a.requires_grad else None,
            -scaled if b.requires_grad else None,
        )

    return Tensor.from_op(out, (a, b), backward, "mse")


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax over the last axis (plain array helper)."""
    shifted = scores - scores.max(axis=-1, keepdims=True)
    weights = np.exp(shifted)
    return weights / weights.sum(axis=-1, keepdims=True)


def multi_head_self_attention(
    h: Tensor,
    Wq: Tensor,
    Wk: Tensor,
    Wv: Tensor,
    Wo: Tensor,
    heads: int,
    capture: dict | None = None,
) -> Tensor:
    """Scaled dot-product self-attention over the second-to-last axis of h [..., tau, d].

    Per head: softmax(Q K^T / sqrt(d_k)) V, heads concatenated then projected by Wo. When
    `capture` is given, the attention weights [..., heads, tau, tau] are stored under "weights".
    """
    d = h.shape[-1]
    if d % heads:
        raise ShapeError(f"d_model {d} is not divisible by {heads} heads", got=(d, heads))
    tau = h.shape[-2]
    d_k = d // heads
    lead = h.shape[:-2]
    scale = 1.0 / math.sqrt(d_k)

    def split(a: np.ndarray) -> np.ndarray:
        # [..., tau, d] -> [..., heads, tau, d_k]
        return np.swapaxes(a.reshape(*lead, tau, heads, d_k), -3, -2)

    def merge(a: np.ndarray) -> np.ndarray:
        return np.swapaxes(a, -3, -2).reshape(*lead, tau, d)

    x = h.data
    q, k, v = split(x @ Wq.data), split(x @ Wk.data), split(x @ Wv.data)
    weights = softmax((q @ np.swapaxes(k, -1, -2)) * scale)
    context = merge(weights @ v)
    out = context @ Wo.data
    if capture is not None:
        capture["weights"] = weights

    def backward(g: np.ndarray):
        g2 = _f64(g.reshape(-1, d))
        gWo = _f64(context.reshape(-1, d)).T @ g2 if Wo.requires_grad else None

        g_ctx = split(g @ Wo.data.T)
        g_weights = g_ctx @ np.swapaxes(v, -1, -2)
        g_v = np.swapaxes(weights, -1, -2) @ g_ctx
        g_scores = weights * (g_weights - (g_weights * weights).sum(axis=-1, keepdims=True))
        g_q = (g_scores @ k) * scale
        g_k = (np.swapaxes(g_scores, -1, -2) @ q) * scale
        g_q, g_k, g_v = merge(g_q), merge(g_k), merge(g_v)

        x2 = _f64(x.reshape(-1, d))

        def weight_grad(W: Tensor, gp: np.ndarray) -> np.ndarray | None:
            return x2.T @ _f64(gp.reshape(-1, d)) if W.requires_grad else None

        gh = None
        if h.requires_grad:
            gh = g_q @ Wq.data.T + g_k @ Wk.data.T + g_v @ Wv.data.T
        return gh, weight_grad(Wq, g_q), weight_grad(Wk, g_k), weight_grad(Wv, g_v), gWo

    return Tensor.from_op(out, (h, Wq, Wk, Wv, Wo), backward, "self_attention")


def sinusoidal_encoding(tau: int, d: int, dtype=np.float64) -> np.ndarray:
    """Fixed sine/cosine position table [tau, d]."""
    position = np.arange(tau)[:, None]
    rate = np.exp(-math.log(10000.0) * (np.arange(0, d, 2) / d))
    table = np.zeros((tau, d))
    table[:, 0::2] = np.sin(position * rate)
    table[:, 1::2] = np.cos(position * rate[: d // 2])
    return table.astype(dtype)
