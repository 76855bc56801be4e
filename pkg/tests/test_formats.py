import numpy as np
import pytest

from tactran import formats
from tactran.errors import ChecksumMismatch, FormatError


class TestPfm:
    def test_round_trip(self, tmp_path, rng):
        img = rng.uniform(-5, 5, (17, 23)).astype(np.float32)
        p = tmp_path / "a.pfm"
        formats.write_pfm(p, img)
        back = formats.read_pfm(p)
        assert np.array_equal(back, img)

    def test_truncated_payload(self, tmp_path, rng):
        img = rng.uniform(0, 1, (10, 10)).astype(np.float32)
        p = tmp_path / "a.pfm"
        formats.write_pfm(p, img)
        data = p.read_bytes()
        p.write_bytes(data[:-20])
        with pytest.raises(FormatError):
            formats.read_pfm(p)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "a.pfm"
        p.write_bytes(b"PF\n3 3\n-1.0\n" + b"\x00" * 200)
        with pytest.raises(FormatError):
            formats.read_pfm(p)

    def test_header_only(self, tmp_path):
        p = tmp_path / "a.pfm"
        p.write_bytes(b"Pf\n4 4")
        with pytest.raises(FormatError):
            formats.read_pfm(p)


class TestTxl:
    def test_round_trip(self, tmp_path, rng):
        vals = np.round(rng.uniform(0, 40000, 20)).astype(np.float32)
        p = tmp_path / "y.txl"
        formats.write_txl(p, vals)
        back = formats.read_txl(p)
        assert np.array_equal(back, vals)

    def test_file_size_20_taxels(self, tmp_path):
        p = tmp_path / "y.txl"
        formats.write_txl(p, np.zeros(20, dtype=np.float32))
        # 8-byte header (magic + count), 4-byte checksum, 20 x 4 value bytes
        assert p.stat().st_size == 8 + 4 + 20 * 4

    def test_truncated(self, tmp_path):
        p = tmp_path / "y.txl"
        formats.write_txl(p, np.arange(8, dtype=np.float32))
        data = p.read_bytes()
        p.write_bytes(data[:-5])
        with pytest.raises(FormatError):
            formats.read_txl(p)

    def test_checksum_mismatch(self, tmp_path):
        p = tmp_path / "y.txl"
        formats.write_txl(p, np.arange(8, dtype=np.float32))
        data = bytearray(p.read_bytes())
        data[-1] ^= 0xFF
        p.write_bytes(bytes(data))
        with pytest.raises(ChecksumMismatch):
            formats.read_txl(p)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "y.txl"
        p.write_bytes(b"NOPE" + b"\x00" * 20)
        with pytest.raises(FormatError):
            formats.read_txl(p)


class TestPgm:
    def test_round_trip_and_scale(self, tmp_path, rng):
        img = rng.uniform(10, 50, (9, 11))
        p = tmp_path / "a.pgm"
        lo, hi = formats.write_pgm(p, img)
        assert lo == pytest.approx(img.min())
        assert hi == pytest.approx(img.max())
        back = formats.read_pgm(p)
        assert back.shape == img.shape
        assert back.dtype == np.uint8

    def test_uniform_input_is_uniform_zero(self, tmp_path):
        p = tmp_path / "a.pgm"
        formats.write_pgm(p, np.full((5, 5), 3.3))
        back = formats.read_pgm(p)
        assert not back.any()
