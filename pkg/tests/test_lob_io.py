"""Tests for LOBS1 and CSV snapshot codecs."""

import numpy as np
import pytest

from simlob.exceptions import EmptyBookSideError, PersistenceError, ShapeError
from simlob.lob.io import HEADER_DTYPE, read_lobs, read_lobs_csv, write_lobs, write_lobs_csv
from simlob.models.book import LobSeries, column_labels


def _series(rows: int = 5, depth: int = 2, tick: int = 1) -> LobSeries:
    values = np.zeros((rows, depth * 4), dtype=np.int64)
    for t in range(rows):
        for level in range(depth):
            base = 4 * level
            values[t, base : base + 4] = [
                (100 + t - level) * tick,
                10 + level,
                (102 + t + level) * tick,
                20 + level,
            ]
    return LobSeries(values=values, times=np.arange(3, 3 + rows), tick_size=tick)


class TestLobsFormat:
    """Tests for the binary format."""

    def test_write_then_read(self, tmp_path):
        """A written series reads back identically, including times and tick size."""
        series = _series(tick=5)
        path = write_lobs(tmp_path / "a.lobs", series)
        back = read_lobs(path)

        np.testing.assert_array_equal(back.values, series.values)
        np.testing.assert_array_equal(back.times, series.times)
        assert back.tick_size == 5
        assert back.depth == 2

    def test_file_size(self, tmp_path):
        """Header plus packed (u32 time, 8 x i64) records."""
        path = write_lobs(tmp_path / "a.lobs", _series(rows=4, depth=2))
        assert path.stat().st_size == HEADER_DTYPE.itemsize + 4 * (4 + 8 * 8)

    def test_header_bytes(self, tmp_path):
        """The file starts with the magic and little-endian version 1."""
        raw = write_lobs(tmp_path / "a.lobs", _series()).read_bytes()
        assert raw[:4] == b"LOBS"
        assert raw[4:8] == (1).to_bytes(4, "little")

    def test_bad_magic(self, tmp_path):
        """A foreign file is rejected."""
        path = write_lobs(tmp_path / "a.lobs", _series())
        raw = bytearray(path.read_bytes())
        raw[:4] = b"XXXX"
        path.write_bytes(bytes(raw))

        with pytest.raises(PersistenceError, match="magic"):
            read_lobs(path)

    def test_bad_version(self, tmp_path):
        """Unknown versions are rejected."""
        path = write_lobs(tmp_path / "a.lobs", _series())
        raw = bytearray(path.read_bytes())
        raw[4:8] = (2).to_bytes(4, "little")
        path.write_bytes(bytes(raw))

        with pytest.raises(PersistenceError, match="version"):
            read_lobs(path)

    def test_truncated(self, tmp_path):
        """A truncated record section is detected."""
        path = write_lobs(tmp_path / "a.lobs", _series())
        path.write_bytes(path.read_bytes()[:-3])

        with pytest.raises(PersistenceError):
            read_lobs(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(PersistenceError):
            read_lobs(tmp_path / "nope.lobs")

    def test_empty_series(self, tmp_path):
        """Zero records are legal."""
        series = LobSeries(values=np.zeros((0, 8), dtype=np.int64))
        back = read_lobs(write_lobs(tmp_path / "e.lobs", series))
        assert len(back) == 0 and back.depth == 2


class TestCsv:
    """Tests for the CSV export."""

    def test_header_and_values(self, tmp_path):
        """The header names every column; rows read back."""
        series = _series(depth=2)
        path = write_lobs_csv(tmp_path / "a.csv", series)
        header = path.read_text().splitlines()[0]

        assert header == "time," + ",".join(column_labels(2))
        back = read_lobs_csv(path)
        np.testing.assert_array_equal(back.values, series.values)
        np.testing.assert_array_equal(back.times, series.times)


class TestLobSeries:
    """Tests for LobSeries helpers."""

    def test_shape_validation(self):
        """Widths must be a multiple of 4."""
        with pytest.raises(ShapeError):
            LobSeries(values=np.zeros((3, 5), dtype=np.int64))

    def test_indexing_gives_snapshots(self):
        series = _series()
        snap = series[1]
        assert snap.time == 4
        assert snap.bid_prices.tolist() == [101, 100]

    def test_mid_prices(self):
        series = _series()
        np.testing.assert_allclose(series.mid_prices(), [101 + t for t in range(5)])

    def test_mid_prices_carry_forward(self):
        """Empty-side steps repeat the previous mid; leading ones take the first valid."""
        series = _series()
        series.values[0, 1] = 0  # step 0: bid side empty
        series.values[2, 3] = 0  # step 2: ask side empty
        mids = series.mid_prices()

        assert mids[0] == mids[1] == 102
        assert mids[2] == mids[1]
        with pytest.raises(EmptyBookSideError):
            series.mid_prices(carry_forward=False)

    def test_level1_volume(self):
        series = _series()
        np.testing.assert_array_equal(series.level1_volume(), np.full(5, 30))
