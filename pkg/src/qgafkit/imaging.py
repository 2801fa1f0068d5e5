"""Grayscale export (PGM/PNG) and lossless float32 field archives.

8-bit images are for inspection only; training reads the archives.

Archive layout (little-endian)::

    b"QGAF"  version:u8  meta_len:u32  meta:JSON(utf-8)
    matrix:f32[n*n] (row-major)  label:f32
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FormatError, ValidationError
from .gaf import AngularField

ARCHIVE_MAGIC = b"QGAF"
ARCHIVE_VERSION = 1

DEFAULT_RANGES = {
    "GASF": (-1.0, 1.0),
    "GADF": (-1.0, 1.0),
    "QGADF": (-1.0, 1.0),
    "QGASF": (0.0, 1.0),
}


@dataclass
class GrayImage:
    width: int
    height: int
    pixels: np.ndarray  # uint8, shape (height, width)
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.size != self.width * self.height:
            raise ValidationError(
                f"pixel buffer has {px.size} entries, expected {self.width}x{self.height}"
            )
        self.pixels = px.reshape(self.height, self.width)


def field_to_gray(fld: AngularField, value_range=None, label: float | None = None) -> GrayImage:
    """Map field values linearly from ``[lo, hi]`` onto 0..255 (clamped, round half up)."""
    lo, hi = value_range if value_range is not None else DEFAULT_RANGES[fld.kind]
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise ValidationError(f"value range must satisfy lo < hi, got [{lo}, {hi}]")
    v = np.clip((np.asarray(fld.matrix, dtype=np.float64) - lo) / (hi - lo), 0.0, 1.0)
    px = np.floor(255.0 * v + 0.5).astype(np.uint8)
    n = fld.size
    meta = {"kind": fld.kind, "window_id": int(fld.source_window_start),
            "value_range": [lo, hi]}
    if label is not None:
        meta["label"] = float(label)
    return GrayImage(n, n, px, meta)


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def write_pgm(img: GrayImage, path) -> None:
    """Write binary PGM (P5, maxval 255); metadata goes to ``<path>.json``."""
    path = Path(path)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(img.pixels, dtype=np.uint8).tobytes())
    with open(_sidecar(path), "w", encoding="utf-8") as fh:
        json.dump(img.meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("PGM header truncated")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("PGM header truncated")
    return tokens, pos + 1


def read_pgm(path) -> GrayImage:
    path = Path(path)
    data = path.read_bytes()
    if data[:2] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {data[:2]!r}, expected b'P5')")
    tokens, offset = _pgm_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError(f"{path}: malformed PGM dimensions") from None
    if width <= 0 or height <= 0:
        raise FormatError(f"{path}: malformed PGM dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    raster = data[offset:]
    if len(raster) != width * height:
        raise FormatError(
            f"{path}: pixel payload length {len(raster)} does not match {width}x{height}"
        )
    meta: dict[str, Any] = {}
    side = _sidecar(path)
    if side.exists():
        meta = json.loads(side.read_text(encoding="utf-8"))
    return GrayImage(width, height, np.frombuffer(raster, dtype=np.uint8).copy(), meta)


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    return (struct.pack(">I", len(payload)) + tag + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF))


def write_png(img: GrayImage, path) -> None:
    """Write an 8-bit grayscale PNG with the same pixel buffer as the PGM."""
    raw = b"".join(b"\x00" + row.tobytes() for row in np.ascontiguousarray(img.pixels))
    ihdr = struct.pack(">IIBBBBB", img.width, img.height, 8, 0, 0, 0, 0)
    with open(path, "wb") as fh:
        fh.write(b"\x89PNG\r\n\x1a\n")
        fh.write(_png_chunk(b"IHDR", ihdr))
        fh.write(_png_chunk(b"IDAT", zlib.compress(raw, 9)))
        fh.write(_png_chunk(b"IEND", b""))


def write_archive(fld: AngularField, label: float, path, extra_meta: dict | None = None) -> None:
    n = fld.size
    meta = dict(fld.meta)
    if extra_meta:
        meta.update(extra_meta)
    meta.update({"kind": fld.kind, "n": n, "window_id": int(fld.source_window_start)})
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    matrix = np.ascontiguousarray(fld.matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(ARCHIVE_MAGIC)
        fh.write(struct.pack("<BI", ARCHIVE_VERSION, len(meta_bytes)))
        fh.write(meta_bytes)
        fh.write(matrix.tobytes())
        fh.write(np.float32(label).astype("<f4").tobytes())


def read_archive(path, expected_size: int | None = None) -> tuple[AngularField, float]:
    """Load an archive; ``expected_size`` enforces the field width."""
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != ARCHIVE_MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 9:
        raise FormatError(f"{path}: truncated header")
    version, meta_len = struct.unpack_from("<BI", data, 4)
    if version != ARCHIVE_VERSION:
        raise FormatError(f"{path}: unsupported archive version {version}")
    off = 9 + meta_len
    if len(data) < off:
        raise FormatError(f"{path}: truncated metadata block")
    try:
        meta = json.loads(data[9:off].decode("utf-8"))
        n = int(meta["n"])
        kind = meta["kind"]
    except (ValueError, KeyError) as exc:
        raise FormatError(f"{path}: malformed metadata ({exc})") from None
    if expected_size is not None and n != expected_size:
        raise FormatError(f"{path}: field is {n}x{n}, pipeline expects {expected_size}x{expected_size}")
    need = off + 4 * n * n + 4
    if len(data) != need:
        raise FormatError(f"{path}: payload length {len(data)} != expected {need}")
    matrix = np.frombuffer(data, dtype="<f4", count=n * n, offset=off).reshape(n, n).astype(np.float32)
    label = float(np.frombuffer(data, dtype="<f4", count=1, offset=off + 4 * n * n)[0])
    window_id = int(meta.get("window_id", 0))
    return AngularField(kind, matrix, window_id, meta), label
