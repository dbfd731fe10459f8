"""Tests for the SimLOB autoencoder, its training loop and interpretability exports."""

import math

import numpy as np
import pytest

from simlob.exceptions import ParameterError, ShapeError, TrainingError
from simlob.models.network import ModelConfig
from simlob.network.autoencoder import SimLOB, reconstruction_error, reconstruction_errors
from simlob.network.interpret import (
    dominant_latent_features,
    export_attention,
    export_feature_importance,
)
from simlob.network.training import (
    evaluate,
    sensitivity_sweep,
    toy_config,
    train,
    verify_gradients,
)
from tests.test_autodiff import attention_reference


def _affine_loop(x, W, b):
    """Row-by-row, entry-by-entry x @ W + b."""
    x, W, b = np.atleast_2d(x), W.data, b.data
    out = np.zeros((x.shape[0], W.shape[1]))
    for i in range(x.shape[0]):
        for j in range(W.shape[1]):
            out[i, j] = b[j] + sum(x[i, k] * W[k, j] for k in range(W.shape[0]))
    return out


def _gelu_loop(x):
    return np.vectorize(lambda v: v * 0.5 * (1.0 + math.erf(v / math.sqrt(2.0))))(x)


def _layer_norm_loop(x, ln, eps=1e-5):
    out = np.zeros_like(x)
    for i, row in enumerate(x):
        mean = sum(row) / len(row)
        var = sum((v - mean) ** 2 for v in row) / len(row)
        for j, v in enumerate(row):
            out[i, j] = (v - mean) / math.sqrt(var + eps) * ln.gain.data[j] + ln.bias.data[j]
    return out


def _block_loop(h, block):
    attn = block.attn
    mixed, _ = attention_reference(
        _layer_norm_loop(h, block.ln1), attn.Wq.data, attn.Wk.data, attn.Wv.data, attn.Wo.data,
        attn.heads,
    )
    h = h + mixed
    ffn = block.ffn
    hidden = _gelu_loop(_affine_loop(_layer_norm_loop(h, block.ln2), ffn.up.W, ffn.up.b))
    return h + _affine_loop(hidden, ffn.down.W, ffn.down.b)


def _mlp_loop(x, layers):
    for i, layer in enumerate(layers):
        x = _affine_loop(x, layer.W, layer.b)
        if i < len(layers) - 1:
            x = _gelu_loop(x)
    return x[0]


def encode_loop(model, segment):
    """Latent vector of one segment evaluated without the tensor machinery."""
    h = _affine_loop(segment, model.enc_in.W, model.enc_in.b)
    for block in model.enc_blocks:
        h = _block_loop(h, block)
    flat = _affine_loop(h, model.enc_out.W, model.enc_out.b).reshape(-1)
    return _mlp_loop(flat, model.enc_reduce)


def decode_loop(model, z):
    cfg = model.config
    h = _mlp_loop(z, model.dec_expand).reshape(cfg.tau, cfg.n_features)
    h = _affine_loop(h, model.dec_in.W, model.dec_in.b)
    for block in model.dec_blocks:
        h = _block_loop(h, block)
    return _affine_loop(h, model.dec_out.W, model.dec_out.b)


@pytest.fixture
def toy_data(rng):
    """Low-rank (N, 4, 40) segments an autoencoder can learn quickly."""
    pattern = rng.normal(size=(4, 40))
    scale = rng.normal(size=(24, 1, 1))
    return scale * pattern + 0.01 * rng.normal(size=(24, 4, 40))


class TestModelConfig:
    """Tests for ModelConfig validation."""

    def test_defaults(self):
        config = ModelConfig()
        assert (config.tau, config.n_features, config.latent_len) == (100, 40, 128)
        assert config.flat_len == 4000

    def test_heads_must_divide(self):
        with pytest.raises(ValueError):
            ModelConfig(d_model=10, heads=3)

    def test_latent_not_larger_than_input(self):
        with pytest.raises(ValueError):
            ModelConfig(tau=2, n_features=4, latent_len=9)

    def test_dense_widths_follow_latent(self):
        """Derived widths give (1024, 256) at latent 128 and keep narrowing for larger latents."""
        assert ModelConfig().dense_widths == (1024, 256)
        for latent in (64, 128, 256, 512):
            config = ModelConfig(latent_len=latent)
            w1, w2 = config.dense_widths
            assert config.flat_len > w1 > w2 > latent
        assert ModelConfig(latent_len=512).dense_widths == (2016, 1016)

    def test_explicit_widths_win(self):
        assert ModelConfig(hidden_widths=(64, 32)).dense_widths == (64, 32)
        assert SimLOB(toy_config()).enc_reduce[0].W.shape == (160, 16)


class TestShapes:
    """Tests for encode, decode and reconstruct shapes."""

    def test_single_and_batched(self, tiny_model_config, rng):
        model = SimLOB(tiny_model_config)
        segment = rng.normal(size=(4, 40))

        assert model.encode(segment).shape == (4,)
        assert model.encode(np.stack([segment] * 3)).shape == (3, 4)
        assert model.decode(np.zeros(4)).shape == (4, 40)
        assert model.reconstruct(np.stack([segment] * 2)).shape == (2, 4, 40)

    def test_reconstruct_is_decode_of_encode(self, tiny_model_config, rng):
        model = SimLOB(tiny_model_config)
        batch = rng.normal(size=(3, 4, 40))
        np.testing.assert_allclose(model.reconstruct(batch), model.decode(model.encode(batch)))

    def test_wrong_segment_shape(self, tiny_model_config):
        model = SimLOB(tiny_model_config)
        with pytest.raises(ShapeError):
            model.encode(np.zeros((5, 40)))
        with pytest.raises(ShapeError):
            model.decode(np.zeros(7))

    def test_same_seed_same_weights(self, tiny_model_config):
        a, b = SimLOB(tiny_model_config), SimLOB(tiny_model_config)
        for name, array in a.state_dict().items():
            np.testing.assert_array_equal(array, b.state_dict()[name])

    def test_no_blocks(self, rng):
        """L = 0 keeps only the affine and MLP layers."""
        model = SimLOB(toy_config(n_blocks=0))
        assert model.encode(rng.normal(size=(4, 40))).shape == (4,)
        with pytest.raises(ShapeError):
            model.attention_weights(rng.normal(size=(4, 40)))

    def test_positional_encoding_changes_output(self, rng):
        segment = rng.normal(size=(4, 40))
        plain = SimLOB(toy_config(positional_encoding=False))
        encoded = SimLOB(toy_config(positional_encoding=True))
        assert not np.allclose(plain.encode(segment), encoded.encode(segment))

    def test_float32_model(self, rng):
        config = toy_config().model_copy(update={"dtype": "float32"})
        model = SimLOB(config)
        assert model.encode(rng.normal(size=(4, 40))).dtype == np.float32


class TestForwardValues:
    """Forward values against a loop evaluation and an untrained-model sanity bound."""

    def test_encode_matches_loop(self, rng):
        """Toy-shape latents agree with the loop evaluation within 1e-10."""
        model = SimLOB(toy_config())
        segment = rng.normal(size=(4, 40))

        np.testing.assert_allclose(model.encode(segment), encode_loop(model, segment), atol=1e-10)

    def test_decode_matches_loop(self, rng):
        model = SimLOB(toy_config())
        z = rng.normal(size=4)

        np.testing.assert_allclose(model.decode(z), decode_loop(model, z), atol=1e-10)

    def test_untrained_error_not_below_variance(self, tiny_model_config, rng):
        """Over 100 segments an untrained model does no better than predicting each segment's mean."""
        model = SimLOB(tiny_model_config)
        segments = rng.normal(size=(100, 4, 40))
        errors = reconstruction_errors(segments, model.reconstruct(segments))
        variances = segments.var(axis=(1, 2))

        assert errors.mean() >= variances.mean()


class TestReconstructionError:
    """Tests for Err_r."""

    def test_known_value(self):
        x = np.zeros((2, 2))
        x_r = np.array([[1.0, 0.0], [0.0, 3.0]])
        assert reconstruction_error(x, x_r) == pytest.approx(2.5)

    def test_batch_mean(self):
        x = np.zeros((2, 1, 2))
        x_r = np.array([[[1.0, 1.0]], [[3.0, 3.0]]])
        np.testing.assert_allclose(reconstruction_errors(x, x_r), [1.0, 9.0])
        assert reconstruction_error(x, x_r) == pytest.approx(5.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            reconstruction_error(np.zeros((2, 2)), np.zeros((2, 3)))


class TestGradients:
    """Finite-difference verification of the whole model."""

    def test_full_model(self):
        result = verify_gradients()
        assert result.checked > 0
        assert result.passed(1e-4), result

    def test_with_positions_and_one_head(self):
        result = verify_gradients(toy_config(n_blocks=1, heads=1, positional_encoding=True))
        assert result.passed(1e-4), result


class TestTraining:
    """Tests for train and evaluate."""

    def test_loss_decreases(self, tiny_model_config, toy_data):
        model = SimLOB(tiny_model_config)
        result = train(
            model, toy_data[:16], toy_data[16:], epochs=40, batch_size=8, lr=1e-2, seed=1
        )

        assert len(result.history) == 40
        assert result.loss_curve[-1] < result.loss_curve[0]
        assert result.best_test_error < result.initial_test_error

    def test_keeps_best_weights(self, tiny_model_config, toy_data):
        """The returned model scores the best recorded test error."""
        model = SimLOB(tiny_model_config)
        result = train(model, toy_data[:16], toy_data[16:], epochs=5, batch_size=8, lr=1e-2)
        assert evaluate(model, toy_data[16:]) == pytest.approx(result.best_test_error)

    def test_zero_epochs(self, tiny_model_config, toy_data):
        model = SimLOB(tiny_model_config)
        before = model.state_dict()
        result = train(model, toy_data[:8], toy_data[8:], epochs=0)

        assert result.history == [] and result.best_epoch == -1
        np.testing.assert_array_equal(model.enc_in.W.data, before["enc_in.W"])

    def test_deterministic(self, tiny_model_config, toy_data):
        a = train(SimLOB(tiny_model_config), toy_data[:16], toy_data[16:], epochs=3, seed=2)
        b = train(SimLOB(tiny_model_config), toy_data[:16], toy_data[16:], epochs=3, seed=2)
        assert a.loss_curve == b.loss_curve

    def test_micro_batches_match_full_batch(self, tiny_model_config, toy_data):
        """Splitting a batch into micro-batches gives the same first-epoch loss."""
        kwargs = dict(epochs=1, batch_size=16, seed=0)
        full = train(SimLOB(tiny_model_config), toy_data[:16], toy_data[16:], **kwargs)
        split = train(
            SimLOB(tiny_model_config), toy_data[:16], toy_data[16:], micro_batches=4, **kwargs
        )
        assert split.loss_curve[0] == pytest.approx(full.loss_curve[0], rel=1e-10)

    def test_empty_test_set(self, tiny_model_config, toy_data):
        """Without test segments the best epoch is picked on training error."""
        result = train(
            SimLOB(tiny_model_config), toy_data, np.empty((0, 4, 40)), epochs=2, lr=1e-2
        )
        assert np.isnan(result.initial_test_error)
        assert result.best_epoch >= 0

    def test_non_finite_loss(self, tiny_model_config, toy_data):
        data = toy_data.copy()
        data[0, 0, 0] = np.nan
        with pytest.raises(TrainingError) as info:
            train(SimLOB(tiny_model_config), data, toy_data[:2], epochs=1, batch_size=64)
        assert info.value.batch_id == 0

    def test_on_epoch_callback(self, tiny_model_config, toy_data):
        seen = []
        train(
            SimLOB(tiny_model_config), toy_data[:8], toy_data[8:], epochs=2, on_epoch=seen.append
        )
        assert [s.epoch for s in seen] == [0, 1]

    def test_checkpoint_written(self, tiny_model_config, toy_data, tmp_path):
        path = tmp_path / "best.slob"
        train(
            SimLOB(tiny_model_config),
            toy_data[:8],
            toy_data[8:],
            epochs=2,
            lr=1e-2,
            checkpoint_path=path,
        )
        assert path.exists()

    @pytest.mark.parametrize("kwargs", [{"batch_size": 0}, {"micro_batches": 0}])
    def test_rejects_bad_arguments(self, tiny_model_config, toy_data, kwargs):
        with pytest.raises(ParameterError):
            train(SimLOB(tiny_model_config), toy_data, toy_data, epochs=1, **kwargs)

    def test_empty_training_set(self, tiny_model_config, toy_data):
        with pytest.raises(ParameterError):
            train(SimLOB(tiny_model_config), np.empty((0, 4, 40)), toy_data, epochs=1)


class TestSweep:
    """Tests for the sensitivity sweep."""

    def test_grid(self, toy_data):
        points = sensitivity_sweep(
            toy_data[:16],
            toy_data[16:],
            toy_config(),
            blocks=(0, 1),
            latents=(2, 4),
            epochs=1,
            batch_size=8,
        )
        assert [(p.n_blocks, p.latent_len) for p in points] == [(0, 2), (0, 4), (1, 2), (1, 4)]
        assert all(np.isfinite(p.test_error) for p in points)


class TestInterpretability:
    """Tests for attention and feature-importance exports."""

    def test_attention_export(self, rng):
        model = SimLOB(toy_config(n_blocks=2, heads=2))
        segment = rng.normal(size=(4, 40))
        export = export_attention(model, segment, block=1)

        assert export.weights.shape == (2, 4, 4)
        np.testing.assert_allclose(export.weights.sum(axis=-1), 1.0)
        np.testing.assert_allclose(export.mid_prices, (segment[:, 0] + segment[:, 2]) / 2)

    def test_feature_importance(self, tiny_model_config):
        model = SimLOB(tiny_model_config)
        importance = export_feature_importance(model)
        weights = np.abs(model.enc_in.W.data)

        assert importance.feature_labels[:4] == ["pb1", "vb1", "pa1", "va1"]
        np.testing.assert_allclose(importance.feature_importance, weights.mean(axis=1))
        assert importance.latent_importance.shape == (8,)

    def test_dominant_features(self, tiny_model_config):
        model = SimLOB(tiny_model_config)
        ranked = dominant_latent_features(model, top_k=2, threshold=0.0)
        importance = export_feature_importance(model).latent_importance

        assert len(ranked) == 2
        assert ranked[0].importance == pytest.approx(importance.max())
        assert ranked[0].importance >= ranked[1].importance
        assert len(ranked[0].contributors) == 40

    def test_threshold_filters(self, tiny_model_config):
        ranked = dominant_latent_features(SimLOB(tiny_model_config), top_k=1, threshold=10.0)
        assert ranked[0].contributors == []
