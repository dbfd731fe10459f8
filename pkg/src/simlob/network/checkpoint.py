"""SLOB1 model checkpoints.

Layout (little-endian):
    b"SLOB", u32 version=1, u32 header_len, header_len bytes of JSON
        ({"config": ModelConfig, "norm": NormStats | null}),
    u32 n_tensors, then per tensor:
        u32 name_len, name (utf-8), u32 rank, rank x u32 dims, float32 data
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np
import pydantic

from simlob.exceptions import PersistenceError
from simlob.models.dataset import NormStats
from simlob.models.network import ModelConfig
from simlob.network.autoencoder import SimLOB

logger = logging.getLogger(__name__)

SLOB_MAGIC = b"SLOB"
SLOB_VERSION = 1
_U32 = struct.Struct("<I")


def save_checkpoint(path: Path, model: SimLOB) -> Path:
    """Write model config, normalization and every parameter tensor.

    Returns:
        Path to written file
    """
    header = json.dumps(
        {
            "config": model.config.model_dump(mode="json"),
            "norm": model.norm.model_dump(mode="json") if model.norm else None,
        },
        sort_keys=True,
    ).encode("utf-8")
    params = model.state_dict()

    chunks = [SLOB_MAGIC, _U32.pack(SLOB_VERSION), _U32.pack(len(header)), header]
    chunks.append(_U32.pack(len(params)))
    for name, array in params.items():
        encoded = name.encode("utf-8")
        chunks += [_U32.pack(len(encoded)), encoded, _U32.pack(array.ndim)]
        chunks += [_U32.pack(dim) for dim in array.shape]
        chunks.append(np.ascontiguousarray(array, dtype="<f4").tobytes())

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(chunks))
    logger.debug("Saved %d tensors to %s", len(params), path)
    return path


class _Reader:
    def __init__(self, raw: bytes, path: Path):
        self.raw = raw
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise PersistenceError("Checkpoint is truncated", path=str(self.path))
        chunk = self.raw[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(_U32.size))[0]


def load_checkpoint(path: Path) -> SimLOB:
    """Rebuild a model from a SLOB1 file.

    Raises:
        PersistenceError: On bad magic/version, truncation, or tensors not matching the config
    """
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise PersistenceError(f"Cannot read checkpoint: {e}", path=str(path)) from e

    reader = _Reader(raw, path)
    if reader.take(4) != SLOB_MAGIC:
        raise PersistenceError("Bad magic, expected SLOB", path=str(path))
    version = reader.u32()
    if version != SLOB_VERSION:
        raise PersistenceError(f"Unsupported SLOB version {version}", path=str(path))

    try:
        header = json.loads(reader.take(reader.u32()).decode("utf-8"))
        config = ModelConfig.model_validate(header["config"])
        norm = NormStats.model_validate(header["norm"]) if header.get("norm") else None
    except (ValueError, KeyError, pydantic.ValidationError) as e:
        raise PersistenceError(f"Malformed checkpoint header: {e}", path=str(path)) from e

    state: dict[str, np.ndarray] = {}
    for _ in range(reader.u32()):
        name = reader.take(reader.u32()).decode("utf-8")
        shape = tuple(reader.u32() for _ in range(reader.u32()))
        count = int(np.prod(shape, dtype=np.int64))
        state[name] = np.frombuffer(reader.take(4 * count), dtype="<f4").reshape(shape)
    if reader.pos != len(raw):
        raise PersistenceError("Trailing bytes after last tensor", path=str(path))

    model = SimLOB(config, norm=norm)
    try:
        model.load_state_dict(state)
    except ValueError as e:
        raise PersistenceError(f"Tensors do not match config: {e}", path=str(path)) from e
    return model
