"""Binary file formats: PFM float images, PGM previews, TXL1 taxel arrays.

PFM follows the portable-float-map convention (grayscale "Pf", rows stored
bottom-to-top, negative scale meaning little-endian). TXL1 is the toolkit's
array container: magic ``TXL1``, little-endian u32 count, little-endian u32
CRC32 of the value block, then count little-endian f32 values.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import ChecksumMismatch, FormatError

TXL_MAGIC = b"TXL1"


def write_pfm(path, data: np.ndarray):
    """Write a single-channel float32 image; rows are flipped to PFM order."""
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim != 2:
        raise FormatError("PFM writer expects a 2-D array")
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{arr.shape[1]} {arr.shape[0]}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(arr[::-1].astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    # Header is three whitespace-terminated ASCII lines: magic, dims, scale.
    pos = 0
    lines = []
    for _ in range(3):
        nl = raw.find(b"\n", pos)
        if nl < 0:
            raise FormatError("truncated PFM header", offset=len(raw))
        lines.append(raw[pos:nl].strip())
        pos = nl + 1
    if lines[0] != b"Pf":
        raise FormatError(f"not a grayscale PFM (magic {lines[0]!r})", offset=0)
    try:
        cols, rows = (int(v) for v in lines[1].split())
        scale = float(lines[2])
    except ValueError:
        raise FormatError("malformed PFM header", offset=3)
    need = rows * cols * 4
    payload = raw[pos:]
    if len(payload) < need:
        raise FormatError(
            f"PFM payload has {len(payload)} bytes, expected {need}", offset=len(raw)
        )
    dt = "<f4" if scale < 0 else ">f4"
    img = np.frombuffer(payload[:need], dtype=dt).reshape(rows, cols)
    return img[::-1].astype(np.float32, copy=True)


def write_pgm(path, data: np.ndarray):
    """8-bit preview, min-max normalized. Returns (lo, hi) of the applied scale."""
    arr = np.asarray(data, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if hi > lo:
        u8 = np.round((arr - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        u8 = np.zeros(arr.shape, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(b"P5\n")
        f.write(f"{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii"))
        f.write(u8.tobytes())
    return lo, hi


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    fields = []
    pos = 0
    while len(fields) < 4 and pos < len(raw):
        nl = raw.index(b"\n", pos)
        fields.extend(raw[pos:nl].split())
        pos = nl + 1
    if not fields or fields[0] != b"P5":
        raise FormatError("not a binary PGM", offset=0)
    cols, rows = int(fields[1]), int(fields[2])
    need = rows * cols
    if len(raw) - pos < need:
        raise FormatError("truncated PGM payload", offset=len(raw))
    return np.frombuffer(raw[pos:pos + need], dtype=np.uint8).reshape(rows, cols).copy()


def write_txl(path, values: np.ndarray):
    vals = np.asarray(values, dtype="<f4")
    if vals.ndim != 1:
        raise FormatError("TXL1 stores 1-D arrays")
    payload = vals.tobytes()
    with open(path, "wb") as f:
        f.write(TXL_MAGIC)
        f.write(struct.pack("<I", vals.size))
        f.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))
        f.write(payload)


def read_txl(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 4 or raw[:4] != TXL_MAGIC:
        raise FormatError(f"bad TXL1 magic {raw[:4]!r}", offset=0)
    if len(raw) < 12:
        raise FormatError("truncated TXL1 header", offset=len(raw))
    (count,) = struct.unpack_from("<I", raw, 4)
    (crc,) = struct.unpack_from("<I", raw, 8)
    need = 12 + count * 4
    if len(raw) < need:
        raise FormatError(f"TXL1 payload ends early, expected {need} bytes", offset=len(raw))
    payload = raw[12:need]
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise ChecksumMismatch("TXL1 checksum mismatch", offset=8)
    return np.frombuffer(payload, dtype="<f4").astype(np.float32, copy=True)
