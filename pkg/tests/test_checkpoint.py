"""Tests for SLOB1 checkpoints."""

import json
import struct

import numpy as np
import pytest

from simlob.exceptions import PersistenceError
from simlob.network.autoencoder import SimLOB
from simlob.network.checkpoint import SLOB_MAGIC, load_checkpoint, save_checkpoint
from simlob.network.training import toy_config


class TestCheckpoint:
    """Tests for save_checkpoint and load_checkpoint."""

    def test_round_trip(self, tmp_path, tiny_model_config, unit_norm, rng):
        """A reloaded model has the same config, norm and (float32-rounded) outputs."""
        model = SimLOB(tiny_model_config, norm=unit_norm)
        path = save_checkpoint(tmp_path / "m.slob", model)
        back = load_checkpoint(path)

        assert back.config == model.config
        assert back.norm == unit_norm
        segment = rng.normal(size=(4, 40))
        np.testing.assert_allclose(back.encode(segment), model.encode(segment), rtol=1e-4, atol=1e-5)

    def test_resave_is_bit_exact(self, tmp_path, tiny_model_config, unit_norm):
        """Saving a loaded checkpoint reproduces the file byte for byte."""
        first = save_checkpoint(tmp_path / "a.slob", SimLOB(tiny_model_config, norm=unit_norm))
        second = save_checkpoint(tmp_path / "b.slob", load_checkpoint(first))
        assert first.read_bytes() == second.read_bytes()

    def test_float32_encode_bit_identical(self, tmp_path, tiny_model_config, unit_norm, rng):
        """A float32 model encodes 100 random segments identically after save and load."""
        model = SimLOB(tiny_model_config.model_copy(update={"dtype": "float32"}), norm=unit_norm)
        back = load_checkpoint(save_checkpoint(tmp_path / "m.slob", model))
        segments = rng.normal(size=(100, 4, 40)).astype(np.float32)

        np.testing.assert_array_equal(back.encode(segments), model.encode(segments))
        np.testing.assert_array_equal(back.reconstruct(segments), model.reconstruct(segments))

    def test_weights_stored_as_float32(self, tmp_path, tiny_model_config):
        model = SimLOB(tiny_model_config)
        back = load_checkpoint(save_checkpoint(tmp_path / "m.slob", model))
        expected = model.enc_in.W.data.astype(np.float32).astype(np.float64)
        np.testing.assert_array_equal(back.enc_in.W.data, expected)

    def test_header(self, tmp_path, tiny_model_config):
        """Magic, version 1, then a JSON header naming the config."""
        raw = save_checkpoint(tmp_path / "m.slob", SimLOB(tiny_model_config)).read_bytes()
        assert raw[:4] == SLOB_MAGIC
        version, header_len = struct.unpack("<II", raw[4:12])
        header = json.loads(raw[12 : 12 + header_len])

        assert version == 1
        assert header["config"]["tau"] == 4
        assert header["norm"] is None

    def test_without_norm(self, tmp_path, tiny_model_config):
        back = load_checkpoint(save_checkpoint(tmp_path / "m.slob", SimLOB(tiny_model_config)))
        assert back.norm is None

    def test_bad_magic(self, tmp_path, tiny_model_config):
        path = save_checkpoint(tmp_path / "m.slob", SimLOB(tiny_model_config))
        path.write_bytes(b"LOBS" + path.read_bytes()[4:])
        with pytest.raises(PersistenceError, match="magic"):
            load_checkpoint(path)

    def test_bad_version(self, tmp_path, tiny_model_config):
        path = save_checkpoint(tmp_path / "m.slob", SimLOB(tiny_model_config))
        raw = bytearray(path.read_bytes())
        raw[4:8] = struct.pack("<I", 9)
        path.write_bytes(bytes(raw))
        with pytest.raises(PersistenceError, match="version"):
            load_checkpoint(path)

    def test_truncated(self, tmp_path, tiny_model_config):
        path = save_checkpoint(tmp_path / "m.slob", SimLOB(tiny_model_config))
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(PersistenceError, match="truncated"):
            load_checkpoint(path)

    def test_trailing_bytes(self, tmp_path, tiny_model_config):
        path = save_checkpoint(tmp_path / "m.slob", SimLOB(tiny_model_config))
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(PersistenceError, match="Trailing"):
            load_checkpoint(path)

    def test_config_tensor_mismatch(self, tmp_path):
        """Tensors saved under one config do not load under another."""
        path = save_checkpoint(tmp_path / "m.slob", SimLOB(toy_config(n_blocks=1)))
        raw = path.read_bytes()
        header_len = struct.unpack("<I", raw[8:12])[0]
        header = json.loads(raw[12 : 12 + header_len])
        header["config"]["latent_len"] = 2
        patched = json.dumps(header, sort_keys=True).encode()
        path.write_bytes(raw[:8] + struct.pack("<I", len(patched)) + patched + raw[12 + header_len :])

        with pytest.raises(PersistenceError, match="do not match"):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(PersistenceError):
            load_checkpoint(tmp_path / "none.slob")
