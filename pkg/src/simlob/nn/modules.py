"""Parameterized layers built on the functional primitives."""

from collections.abc import Iterator

import numpy as np

from simlob.exceptions import ShapeError
from simlob.nn import functional as F
from simlob.nn.tensor import Tensor, parameter


def uniform_init(
    rng: np.random.Generator, fan_in: int, shape: tuple[int, ...], dtype
) -> Tensor:
    """U(-1/sqrt(fan_in), 1/sqrt(fan_in)) parameter."""
    bound = 1.0 / np.sqrt(fan_in)
    return parameter(rng.uniform(-bound, bound, size=shape), dtype=dtype)


class Module:
    """Base class: parameters are Tensor attributes with requires_grad, found recursively.

    Names follow attribute paths ("blocks.0.attn.Wq"), in attribute definition order.
    """

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            path = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{path}.")
            elif isinstance(value, list):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{path}.{i}.")

    def parameters(self) -> dict[str, Tensor]:
        return dict(self.named_parameters())

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """Copy arrays into matching parameters; names and shapes must match exactly."""
        params = self.parameters()
        missing = sorted(set(params) - set(state))
        unexpected = sorted(set(state) - set(params))
        if missing or unexpected:
            raise ShapeError(f"State mismatch: missing={missing}, unexpected={unexpected}")
        for name, p in params.items():
            array = np.asarray(state[name])
            if array.shape != p.shape:
                raise ShapeError(f"Parameter {name}", expected=p.shape, got=array.shape)
            p.data = array.astype(p.dtype)

    def num_parameters(self) -> int:
        return sum(p.data.size for p in self.parameters().values())


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, dtype=np.float64):
        self.W = uniform_init(rng, d_in, (d_in, d_out), dtype)
        self.b = uniform_init(rng, d_in, (d_out,), dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return F.affine(x, self.W, self.b)


class LayerNorm(Module):
    def __init__(self, d: int, dtype=np.float64):
        self.gain = parameter(np.ones(d), dtype=dtype)
        self.bias = parameter(np.zeros(d), dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return F.layer_norm(x, self.gain, self.bias)


class MultiHeadSelfAttention(Module):
    """Bias-free Q/K/V/output projections; keeps the last attention weights it computed."""

    def __init__(self, d: int, heads: int, rng: np.random.Generator, dtype=np.float64):
        if d % heads:
            raise ShapeError(f"d_model {d} is not divisible by {heads} heads", got=(d, heads))
        self.heads = heads
        self.Wq = uniform_init(rng, d, (d, d), dtype)
        self.Wk = uniform_init(rng, d, (d, d), dtype)
        self.Wv = uniform_init(rng, d, (d, d), dtype)
        self.Wo = uniform_init(rng, d, (d, d), dtype)
        self.last_weights: np.ndarray | None = None

    def __call__(self, h: Tensor) -> Tensor:
        capture: dict = {}
        out = F.multi_head_self_attention(
            h, self.Wq, self.Wk, self.Wv, self.Wo, self.heads, capture=capture
        )
        self.last_weights = capture["weights"]
        return out


class FeedForward(Module):
    """affine(d -> mult*d), GELU, affine(mult*d -> d)."""

    def __init__(self, d: int, mult: int, rng: np.random.Generator, dtype=np.float64):
        self.up = Linear(d, mult * d, rng, dtype)
        self.down = Linear(mult * d, d, rng, dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return self.down(F.gelu(self.up(x)))


class TransformerBlock(Module):
    """Pre-norm block: h + MSA(LN(h)), then h + FFN(LN(h))."""

    def __init__(
        self, d: int, heads: int, ffn_mult: int, rng: np.random.Generator, dtype=np.float64
    ):
        self.ln1 = LayerNorm(d, dtype)
        self.attn = MultiHeadSelfAttention(d, heads, rng, dtype)
        self.ln2 = LayerNorm(d, dtype)
        self.ffn = FeedForward(d, ffn_mult, rng, dtype)

    def __call__(self, h: Tensor) -> Tensor:
        h = F.residual_add(self.attn(self.ln1(h)), h)
        return F.residual_add(self.ffn(self.ln2(h)), h)
