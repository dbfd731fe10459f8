"""Tests for corpus generation and loading."""

import json
import logging

import numpy as np
import pytest

from simlob.data import dataset as dataset_module
from simlob.data.dataset import (
    _Moments,
    apply_normalizer,
    build_dataset,
    fit_normalizer,
    invert_normalizer,
    load_manifest,
    load_segments,
    sample_param_tuples,
    segment_series,
    stack_segments,
    verify_manifest,
)
from simlob.exceptions import ParameterError, PersistenceError, SimulationError
from simlob.lob.io import read_lobs
from simlob.models.dataset import PADDING_RULE, NormStats, Segment
from simlob.models.params import SimConfig


@pytest.fixture
def corpus_config():
    return SimConfig(n_providers=8, n_takers=8, q_var_iters=1000)


@pytest.fixture
def corpus(tmp_path, corpus_config):
    root = tmp_path / "corpus"
    manifest = build_dataset(
        root, n_tuples=3, steps=300, split=0.67, seed=5, tau=100, sim_config=corpus_config
    )
    return manifest, root


class TestSampling:
    """Tests for sample_param_tuples."""

    def test_within_bounds_and_deterministic(self):
        tuples = sample_param_tuples(50, seed=3)
        assert len(tuples) == 50
        assert all(p.within_bounds() for p in tuples)
        assert tuples == sample_param_tuples(50, seed=3)
        assert tuples != sample_param_tuples(50, seed=4)

    def test_rejects_empty(self):
        with pytest.raises(ParameterError):
            sample_param_tuples(0)


class TestSegmentSeries:
    """Tests for segment_series."""

    def test_non_overlapping(self):
        """A trailing partial window is dropped."""
        values = np.arange(250 * 8).reshape(250, 8)
        segments = segment_series(values, tau=100, source_index=4)

        assert [s.source for s in segments] == [(4, 0), (4, 100)]
        np.testing.assert_array_equal(segments[1].values, values[100:200])

    def test_strided(self):
        segments = segment_series(np.zeros((250, 8)), tau=100, stride=50)
        assert [s.source[1] for s in segments] == [0, 50, 100, 150]

    def test_short_series(self):
        assert segment_series(np.zeros((99, 8)), tau=100) == []

    def test_bad_tau(self):
        with pytest.raises(ParameterError):
            segment_series(np.zeros((10, 8)), tau=0)


class TestNormalizer:
    """Tests for fitting and applying NormStats."""

    def test_fit_known_values(self):
        """Prices and volumes get separate population mean and std."""
        data = np.array([[[10, 1, 12, 3], [14, 5, 16, 7]]], dtype=np.float64)
        stats = fit_normalizer(data)

        assert stats.price_center == pytest.approx(13.0)
        assert stats.price_scale == pytest.approx(np.std([10, 12, 14, 16]))
        assert stats.volume_center == pytest.approx(4.0)
        assert stats.volume_scale == pytest.approx(np.std([1, 3, 5, 7]))

    def test_normalized_moments(self, rng):
        """Normalized price entries have mean 0 and std 1."""
        data = rng.normal(100, 5, size=(20, 10, 8))
        stats = fit_normalizer(data)
        normalized = apply_normalizer(data, stats)

        assert normalized[..., 0::2].mean() == pytest.approx(0.0, abs=1e-9)
        assert normalized[..., 0::2].std() == pytest.approx(1.0)

    def test_invert(self, rng):
        data = rng.normal(100, 5, size=(3, 4, 8))
        stats = fit_normalizer(data)
        np.testing.assert_allclose(invert_normalizer(apply_normalizer(data, stats), stats), data)

    def test_segments_keep_source(self):
        stats = NormStats(price_center=1, price_scale=2, volume_center=0, volume_scale=1)
        segment = Segment(values=np.ones((2, 4)), source=(3, 200))
        normalized = apply_normalizer(segment, stats)

        assert normalized.normalized and normalized.source == (3, 200)
        np.testing.assert_allclose(normalized.values[:, 0], 0.0)

    def test_zero_variance_warns(self, caplog):
        """A constant column set falls back to scale 1 with a warning."""
        data = np.tile(np.array([100.0, 5.0, 101.0, 7.0]), (1, 3, 1))
        data[..., 0::2] = 100.0
        with caplog.at_level(logging.WARNING):
            stats = fit_normalizer(data)
        assert stats.price_scale == 1.0
        assert "Zero variance" in caplog.text

    def test_empty_training_set(self):
        with pytest.raises(ParameterError):
            fit_normalizer([])

    def test_moments_merge(self, rng):
        """Merged partial moments equal moments of the concatenation."""
        a, b = rng.normal(size=30), rng.normal(3, 2, size=50)
        merged = _Moments.of(a).merge(_Moments.of(b))
        whole = _Moments.of(np.concatenate([a, b]))

        assert merged.n == whole.n
        assert merged.mean == pytest.approx(whole.mean)
        assert merged.m2 == pytest.approx(whole.m2)


class TestBuildDataset:
    """Tests for build_dataset and the manifest."""

    def test_counts_and_split(self, corpus):
        """3 segments per tuple split 2/1; round(0.67 * 3) = 2."""
        manifest, _ = corpus
        assert manifest.segments_per_tuple == 3
        assert manifest.count("train") == 6
        assert manifest.count("test") == 3
        assert len(manifest.params) == 3
        assert manifest.padding_rule == PADDING_RULE

    def test_per_tuple_disjoint(self, corpus):
        """Each tuple's train and test offsets partition its segments."""
        manifest, _ = corpus
        for i in range(3):
            train = next(s for s in manifest.shards_for("train") if s.tuple_index == i)
            test = next(s for s in manifest.shards_for("test") if s.tuple_index == i)
            assert not set(train.offsets) & set(test.offsets)
            assert sorted(train.offsets + test.offsets) == [0, 100, 200]

    def test_shard_times_are_source_steps(self, corpus):
        manifest, root = corpus
        shard = manifest.shards_for("train")[0]
        series = read_lobs(root / shard.path)
        expected = np.concatenate([np.arange(o, o + 100) for o in shard.offsets])
        np.testing.assert_array_equal(series.times, expected)

    def test_norm_fitted_on_train_only(self, corpus):
        """Manifest NormStats equal a direct fit on the raw training segments."""
        manifest, root = corpus
        raw = stack_segments(load_segments(manifest, root, "train", normalized=False))
        direct = fit_normalizer(raw)

        assert manifest.norm.price_center == pytest.approx(direct.price_center, rel=1e-12)
        assert manifest.norm.price_scale == pytest.approx(direct.price_scale, rel=1e-9)
        assert manifest.norm.volume_scale == pytest.approx(direct.volume_scale, rel=1e-9)

    def test_load_normalized(self, corpus):
        manifest, root = corpus
        segments = load_segments(manifest, root, "train")
        data = stack_segments(segments)

        assert data.shape == (6, 100, 40)
        assert all(s.normalized for s in segments)
        assert abs(data[..., 0::2].mean()) < 1e-6

    def test_manifest_round_trip(self, corpus):
        """The manifest reloads from its directory and carries no timestamps."""
        manifest, root = corpus
        assert load_manifest(root) == manifest
        raw = json.loads((root / "manifest.json").read_text())
        assert "generated_at" not in raw and raw["tau"] == 100

    def test_deterministic(self, tmp_path, corpus, corpus_config):
        """Same seed, same shards."""
        manifest, _ = corpus
        again = build_dataset(
            tmp_path / "again",
            n_tuples=3,
            steps=300,
            split=0.67,
            seed=5,
            tau=100,
            sim_config=corpus_config,
        )
        assert [s.sha256 for s in again.shards] == [s.sha256 for s in manifest.shards]

    def test_verify_detects_tampering(self, corpus):
        manifest, root = corpus
        verify_manifest(manifest, root)

        path = root / manifest.shards[0].path
        raw = bytearray(path.read_bytes())
        raw[-1] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(PersistenceError, match="checksum"):
            verify_manifest(manifest, root)

    def test_verify_missing_shard(self, corpus):
        manifest, root = corpus
        (root / manifest.shards[-1].path).unlink()
        with pytest.raises(PersistenceError, match="missing"):
            verify_manifest(manifest, root)

    def test_all_train(self, tmp_path, corpus_config):
        """split = 1 leaves every test shard empty."""
        manifest = build_dataset(
            tmp_path / "c", n_tuples=2, steps=200, split=1.0, tau=100, sim_config=corpus_config
        )
        assert manifest.count("test") == 0
        assert load_segments(manifest, tmp_path / "c", "test") == []

    def test_on_tuple_done(self, tmp_path, corpus_config):
        done = []
        build_dataset(
            tmp_path / "c",
            n_tuples=2,
            steps=100,
            tau=100,
            split=1.0,
            sim_config=corpus_config,
            on_tuple_done=done.append,
        )
        assert sorted(done) == [0, 1]

    @pytest.mark.parametrize("kwargs", [{"split": 1.5}, {"steps": 50}])
    def test_rejects_bad_arguments(self, tmp_path, kwargs):
        with pytest.raises(ParameterError):
            build_dataset(tmp_path / "c", n_tuples=1, tau=100, **{"steps": 200, **kwargs})

    def test_empty_training_split(self, tmp_path, corpus_config):
        with pytest.raises(ParameterError):
            build_dataset(
                tmp_path / "c", n_tuples=1, steps=100, split=0.0, tau=100,
                sim_config=corpus_config,
            )


class TestSimulationRetries:
    """Tests for resampling after simulator failures."""

    def test_retries_with_new_parameters(self, tmp_path, corpus_config, monkeypatch, caplog):
        real = dataset_module.simulate
        calls = []

        def flaky(params, config):
            calls.append(params)
            if len(calls) == 1:
                raise RuntimeError("boom")
            return real(params, config)

        monkeypatch.setattr(dataset_module, "simulate", flaky)
        with caplog.at_level(logging.WARNING):
            manifest = build_dataset(
                tmp_path / "c", n_tuples=1, steps=100, split=1.0, tau=100,
                sim_config=corpus_config,
            )

        assert len(calls) == 2
        assert calls[0] != calls[1]
        assert manifest.params[0] == calls[1]
        assert "retry" in caplog.text

    def test_gives_up(self, tmp_path, corpus_config, monkeypatch):
        def broken(params, config):
            raise RuntimeError("always")

        monkeypatch.setattr(dataset_module, "simulate", broken)
        with pytest.raises(SimulationError, match="after 3 attempts"):
            build_dataset(
                tmp_path / "c", n_tuples=1, steps=100, split=1.0, tau=100,
                sim_config=corpus_config,
            )
