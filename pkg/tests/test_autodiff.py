"""Tests for the autodiff tensor, primitives, modules, Adam and gradient checking."""

import math

import numpy as np
import pytest

from simlob.exceptions import NonFiniteError, ShapeError
from simlob.nn import functional as F
from simlob.nn.gradcheck import check_gradients, relative_error
from simlob.nn.modules import Linear, Module, TransformerBlock
from simlob.nn.optim import Adam, AdamState, adam_step
from simlob.nn.tensor import Tensor, is_grad_enabled, no_grad, parameter

TOLERANCE = 1e-4


def attention_reference(x, w_q, w_k, w_v, w_o, heads):
    """Scalar-loop multi-head attention for one [tau, d] input; returns (out, weights)."""
    tau, d = x.shape
    d_k = d // heads
    q, k, v = x @ w_q, x @ w_k, x @ w_v
    context = np.zeros((tau, d))
    weights = np.zeros((heads, tau, tau))
    for head in range(heads):
        cols = slice(head * d_k, (head + 1) * d_k)
        for i in range(tau):
            scores = [
                sum(q[i, cols][c] * k[j, cols][c] for c in range(d_k)) / math.sqrt(d_k)
                for j in range(tau)
            ]
            top = max(scores)
            exps = [math.exp(s - top) for s in scores]
            total = sum(exps)
            for j in range(tau):
                weights[head, i, j] = exps[j] / total
                context[i, cols] += weights[head, i, j] * v[j, cols]
    return context @ w_o, weights


def _params(rng, *shapes):
    return [parameter(rng.normal(size=shape)) for shape in shapes]


class TestTensorGraph:
    """Tests for graph construction and backpropagation."""

    def test_shared_node_accumulates(self):
        """Using a tensor twice sums both gradient paths."""
        x = parameter(np.array([1.0, -2.0]))
        y = F.residual_add(x, x)
        F.mse(y, Tensor(np.zeros(2))).backward()
        # d/dx mean((2x)^2) = 8x / 2
        np.testing.assert_allclose(x.grad, 4 * x.data)

    def test_intermediates_released(self):
        x = parameter(np.ones((2, 3)))
        hidden = F.gelu(x)
        F.mse(hidden, Tensor(np.zeros((2, 3)))).backward()
        assert hidden.grad is None
        assert x.grad is not None

    def test_no_grad_builds_no_graph(self):
        x = parameter(np.ones(3))
        with no_grad():
            assert not is_grad_enabled()
            y = F.gelu(x)
        assert is_grad_enabled()
        assert not y.requires_grad and y.is_leaf

    def test_constants_get_no_gradient(self):
        x = Tensor(np.ones(3))
        w = parameter(np.ones(3))
        F.mse(F.residual_add(x, w), Tensor(np.zeros(3))).backward()
        assert x.grad is None and w.grad is not None

    def test_backward_needs_scalar(self):
        x = parameter(np.ones(3))
        with pytest.raises(ValueError):
            F.gelu(x).backward()

    def test_non_finite_forward(self):
        """A NaN produced in forward names the operation."""
        x = parameter(np.array([np.inf, 1.0]))
        with pytest.raises(NonFiniteError) as info:
            F.reshape(x, (2, 1))
        assert info.value.op == "reshape"

    def test_deep_chain(self):
        """Backpropagation is iterative, so long chains do not hit recursion limits."""
        x = parameter(np.ones(2))
        y = x
        for _ in range(3000):
            y = F.reshape(y, (2,))
        F.mse(y, Tensor(np.zeros(2))).backward()
        np.testing.assert_allclose(x.grad, np.ones(2))


class TestPrimitiveGradients:
    """Finite-difference checks of every primitive in float64."""

    def test_affine(self, rng):
        x, W, b = _params(rng, (3, 4), (4, 5), (5,))
        target = Tensor(rng.normal(size=(3, 5)))
        result = check_gradients(
            lambda: F.mse(F.affine(x, W, b), target), {"x": x, "W": W, "b": b}
        )
        assert result.passed(TOLERANCE), result

    def test_affine_batched(self, rng):
        x, W, b = _params(rng, (2, 3, 4), (4, 2), (2,))
        target = Tensor(rng.normal(size=(2, 3, 2)))
        result = check_gradients(
            lambda: F.mse(F.affine(x, W, b), target), {"x": x, "W": W, "b": b}
        )
        assert result.passed(TOLERANCE), result

    def test_gelu(self, rng):
        (x,) = _params(rng, (4, 3))
        target = Tensor(rng.normal(size=(4, 3)))
        assert check_gradients(lambda: F.mse(F.gelu(x), target), {"x": x}).passed(TOLERANCE)

    def test_layer_norm(self, rng):
        x, gain, bias = _params(rng, (2, 3, 6), (6,), (6,))
        target = Tensor(rng.normal(size=(2, 3, 6)))
        result = check_gradients(
            lambda: F.mse(F.layer_norm(x, gain, bias), target),
            {"x": x, "gain": gain, "bias": bias},
        )
        assert result.passed(TOLERANCE), result

    def test_residual_and_reshape(self, rng):
        a, b = _params(rng, (2, 6), (2, 6))
        target = Tensor(rng.normal(size=(3, 4)))
        result = check_gradients(
            lambda: F.mse(F.reshape(F.residual_add(a, b), (3, 4)), target), {"a": a, "b": b}
        )
        assert result.passed(TOLERANCE), result

    def test_mse_both_sides(self, rng):
        a, b = _params(rng, (3, 3), (3, 3))
        assert check_gradients(lambda: F.mse(a, b), {"a": a, "b": b}).passed(TOLERANCE)

    @pytest.mark.parametrize("heads", [1, 2])
    def test_attention(self, rng, heads):
        h, Wq, Wk, Wv, Wo = _params(rng, (2, 5, 4), (4, 4), (4, 4), (4, 4), (4, 4))
        target = Tensor(rng.normal(size=(2, 5, 4)))
        result = check_gradients(
            lambda: F.mse(F.multi_head_self_attention(h, Wq, Wk, Wv, Wo, heads), target),
            {"h": h, "Wq": Wq, "Wk": Wk, "Wv": Wv, "Wo": Wo},
        )
        assert result.passed(TOLERANCE), result

    def test_transformer_block(self, rng):
        block = TransformerBlock(4, 2, 2, rng)
        x = parameter(rng.normal(size=(2, 3, 4)))
        target = Tensor(rng.normal(size=(2, 3, 4)))
        params = {"x": x, **block.parameters()}
        result = check_gradients(lambda: F.mse(block(x), target), params)
        assert result.passed(TOLERANCE), result

    def test_detects_wrong_gradient(self, rng):
        """A broken backward rule fails the check."""
        (x,) = _params(rng, (3,))

        def broken_square(t: Tensor) -> Tensor:
            return Tensor.from_op(t.data**2, (t,), lambda g: (g * t.data,), "broken")

        result = check_gradients(lambda: F.mse(broken_square(x), Tensor(np.zeros(3))), {"x": x})
        assert not result.passed(TOLERANCE)
        assert result.worst_parameter == "x"

    def test_relative_error_floor(self):
        assert relative_error(0.0, 0.0) == 0.0
        assert relative_error(1e-12, 0.0) < 1e-6


class TestAttentionForward:
    """Tests for the attention forward pass."""

    def test_matches_scalar_reference(self, rng):
        x = rng.normal(size=(5, 6))
        Ws = [rng.normal(size=(6, 6)) for _ in range(4)]
        capture: dict = {}
        out = F.multi_head_self_attention(
            Tensor(x), *(Tensor(w) for w in Ws), heads=3, capture=capture
        )
        expected, weights = attention_reference(x, *Ws, heads=3)

        np.testing.assert_allclose(out.data, expected, atol=1e-10)
        np.testing.assert_allclose(capture["weights"], weights, atol=1e-12)

    def test_rows_sum_to_one(self, rng):
        capture: dict = {}
        F.multi_head_self_attention(
            Tensor(rng.normal(size=(2, 4, 4))),
            *(Tensor(rng.normal(size=(4, 4))) for _ in range(4)),
            heads=2,
            capture=capture,
        )
        assert capture["weights"].shape == (2, 2, 4, 4)
        np.testing.assert_allclose(capture["weights"].sum(axis=-1), 1.0)

    def test_heads_must_divide(self, rng):
        with pytest.raises(ShapeError):
            F.multi_head_self_attention(
                Tensor(np.ones((3, 4))), *(Tensor(np.eye(4)) for _ in range(4)), heads=3
            )


class TestPrimitiveValues:
    """Forward values of the elementwise primitives."""

    def test_gelu_values(self):
        out = F.gelu(Tensor(np.array([0.0, 1.0, -1.0])))
        np.testing.assert_allclose(out.data, [0.0, 0.8413447460685429, -0.15865525393145707])

    def test_layer_norm_moments(self, rng):
        out = F.layer_norm(
            Tensor(rng.normal(3, 2, size=(4, 8))), Tensor(np.ones(8)), Tensor(np.zeros(8))
        )
        np.testing.assert_allclose(out.data.mean(axis=-1), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.data.var(axis=-1), 1.0, rtol=1e-4)

    def test_float32_preserved(self, rng):
        x = Tensor(rng.normal(size=(3, 4)).astype(np.float32))
        W = Tensor(rng.normal(size=(4, 2)).astype(np.float32))
        assert F.affine(x, W).dtype == np.float32
        assert F.mse(x, x).dtype == np.float32

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            F.affine(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))))
        with pytest.raises(ShapeError):
            F.residual_add(Tensor(np.ones(2)), Tensor(np.ones(3)))

    def test_sinusoidal_encoding(self):
        table = F.sinusoidal_encoding(4, 6)
        assert table.shape == (4, 6)
        np.testing.assert_allclose(table[0, 0::2], 0.0)
        np.testing.assert_allclose(table[0, 1::2], 1.0)


class TestModules:
    """Tests for Module bookkeeping."""

    def test_parameter_names(self, rng):
        block = TransformerBlock(4, 2, 2, rng)
        names = list(block.parameters())
        assert names[:4] == ["ln1.gain", "ln1.bias", "attn.Wq", "attn.Wk"]
        assert "ffn.down.b" in names

    def test_nested_lists(self, rng):
        class Stack(Module):
            def __init__(self):
                self.layers = [Linear(2, 2, rng), Linear(2, 1, rng)]

        assert list(Stack().parameters()) == ["layers.0.W", "layers.0.b", "layers.1.W", "layers.1.b"]

    def test_state_dict_round_trip(self, rng):
        a, b = Linear(3, 2, rng), Linear(3, 2, rng)
        b.load_state_dict(a.state_dict())
        np.testing.assert_array_equal(a.W.data, b.W.data)

    def test_load_state_dict_mismatch(self, rng):
        layer = Linear(3, 2, rng)
        with pytest.raises(ShapeError):
            layer.load_state_dict({"W": np.zeros((3, 2))})
        with pytest.raises(ShapeError):
            layer.load_state_dict({"W": np.zeros((2, 2)), "b": np.zeros(2)})

    def test_uniform_init_bounds(self, rng):
        layer = Linear(16, 4, rng)
        assert np.all(np.abs(layer.W.data) <= 0.25)
        assert layer.num_parameters() == 16 * 4 + 4


class TestAdam:
    """Tests for the Adam update."""

    def test_first_step_moves_by_lr(self):
        """With bias correction the first step is lr * sign(g)."""
        p = parameter(np.array([1.0, -1.0]))
        state = AdamState(lr=0.1)
        adam_step({"p": p}, {"p": np.array([2.0, -0.5])}, state)

        np.testing.assert_allclose(p.data, [0.9, -0.9], atol=1e-6)
        assert state.step == 1

    def test_missing_gradient_is_zero(self):
        p = parameter(np.array([1.0]))
        adam_step({"p": p}, {}, AdamState())
        np.testing.assert_allclose(p.data, [1.0])

    def test_minimizes_quadratic(self, rng):
        w = parameter(rng.normal(size=3))
        optimizer = Adam({"w": w}, lr=0.05)
        target = Tensor(np.array([1.0, -2.0, 0.5]))
        for _ in range(500):
            optimizer.zero_grad()
            F.mse(w, target).backward()
            optimizer.step()
        np.testing.assert_allclose(w.data, target.data, atol=1e-2)
