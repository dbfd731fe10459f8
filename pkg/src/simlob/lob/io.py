"""LOBS1 binary snapshot streams and CSV export.

LOBS1 layout (little-endian):
    header: magic b"LOBS", u32 version=1, u32 depth, u32 count, u32 tick_size
    records: `count` x (u32 time, 4 * depth x i64 in column order p_b, v_b, p_a, v_a per level)
"""

import logging
from pathlib import Path

import numpy as np

from simlob.exceptions import PersistenceError
from simlob.models.book import FIELDS_PER_LEVEL, LobSeries, column_labels

logger = logging.getLogger(__name__)

LOBS_MAGIC = b"LOBS"
LOBS_VERSION = 1

HEADER_DTYPE = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u4"),
        ("depth", "<u4"),
        ("count", "<u4"),
        ("tick_size", "<u4"),
    ]
)


def record_dtype(depth: int) -> np.dtype:
    """Packed record layout for a given depth."""
    return np.dtype([("time", "<u4"), ("values", "<i8", (depth * FIELDS_PER_LEVEL,))])


def write_lobs(path: Path, series: LobSeries) -> Path:
    """Write a snapshot series as a LOBS1 file.

    Returns:
        Path to written file
    """
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header["magic"] = LOBS_MAGIC
    header["version"] = LOBS_VERSION
    header["depth"] = series.depth
    header["count"] = len(series)
    header["tick_size"] = series.tick_size

    records = np.zeros(len(series), dtype=record_dtype(series.depth))
    records["time"] = series.times
    records["values"] = series.values

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(records.tobytes())

    logger.debug("Wrote %d snapshots to %s", len(series), path)
    return path


def read_lobs(path: Path) -> LobSeries:
    """Read a LOBS1 file.

    Raises:
        PersistenceError: On a missing file, wrong magic/version, or truncated records
    """
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise PersistenceError(f"Cannot read {path}: {e}", path=str(path)) from e

    if len(raw) < HEADER_DTYPE.itemsize:
        raise PersistenceError("File too short for a LOBS1 header", path=str(path))
    header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
    if header["magic"] != LOBS_MAGIC:
        raise PersistenceError(f"Bad magic {header['magic']!r}, expected LOBS", path=str(path))
    if header["version"] != LOBS_VERSION:
        raise PersistenceError(f"Unsupported LOBS version {header['version']}", path=str(path))

    depth, count = int(header["depth"]), int(header["count"])
    dtype = record_dtype(depth)
    expected = HEADER_DTYPE.itemsize + count * dtype.itemsize
    if len(raw) != expected:
        raise PersistenceError(
            f"Expected {expected} bytes for {count} records, found {len(raw)}", path=str(path)
        )

    records = np.frombuffer(raw, dtype=dtype, count=count, offset=HEADER_DTYPE.itemsize)
    return LobSeries(
        values=records["values"].astype(np.int64),
        times=records["time"].astype(np.uint32),
        tick_size=int(header["tick_size"]),
    )


def write_lobs_csv(path: Path, series: LobSeries) -> Path:
    """Export a series as CSV with header time,pb1,vb1,pa1,va1,...

    Returns:
        Path to written file
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([series.times.astype(np.int64), series.values])
    header = ",".join(["time", *column_labels(series.depth)])
    np.savetxt(path, table, fmt="%d", delimiter=",", header=header, comments="")
    return path


def read_lobs_csv(path: Path, tick_size: int = 1) -> LobSeries:
    """Read a CSV written by write_lobs_csv."""
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    except (OSError, ValueError) as e:
        raise PersistenceError(f"Cannot read CSV {path}: {e}", path=str(path)) from e
    return LobSeries(values=table[:, 1:], times=table[:, 0], tick_size=tick_size)
