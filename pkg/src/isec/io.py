"""Readers and writers for images, flow fields and label maps.

Formats: binary PPM (P6) and PGM (P5, 8 or 16 bit), 8-bit PNG through
Pillow, Middlebury ``.flo``, and CSV label maps.  Every parse problem
surfaces as :class:`FormatError`.
"""
from __future__ import annotations

import io as _stdio
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .core import FlowField, LabelMap, RasterImage, as_labels
from .metrics import seg_to_boundary

FLO_MAGIC = 202021.25
FLO_MAX_SIDE = 1 << 16


class FormatError(ValueError):
    """A file could not be decoded."""


def _read_bytes(path) -> bytes:
    return Path(path).read_bytes()


def _pnm_header(buf: bytes, magic: bytes) -> tuple[int, int, int, int]:
    """Parse a netpbm header; returns width, height, maxval and payload offset."""
    if buf[:2] != magic:
        raise FormatError(f"malformed header: expected magic {magic.decode()}, got {buf[:2]!r}")
    fields = []
    pos = 2
    n = len(buf)
    while len(fields) < 3:
        while pos < n and (buf[pos:pos + 1].isspace() or buf[pos:pos + 1] == b"#"):
            if buf[pos:pos + 1] == b"#":
                while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and buf[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise FormatError("malformed header: missing or non-numeric field")
        fields.append(int(buf[start:pos]))
    if pos >= n or not buf[pos:pos + 1].isspace():
        raise FormatError("malformed header: no whitespace before payload")
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"malformed header: bad dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise FormatError(f"unsupported bit depth: maxval {maxval}")
    return width, height, maxval, pos + 1


def _payload(buf: bytes, offset: int, expected: int) -> bytes:
    got = len(buf) - offset
    if got < expected:
        raise FormatError(f"truncated payload: expected {expected} bytes, got {got}")
    return buf[offset:offset + expected]


def decode_ppm_array(buf: bytes) -> np.ndarray:
    """Samples of a P6 file as an (H, W, 3) uint8 array, any size."""
    width, height, maxval, off = _pnm_header(buf, b"P6")
    if maxval > 255:
        raise FormatError(f"unsupported bit depth: maxval {maxval} (only 8-bit PPM)")
    data = np.frombuffer(_payload(buf, off, width * height * 3), np.uint8)
    data = data.reshape(height, width, 3)
    if maxval != 255:
        data = np.round(data.astype(np.float64) * 255 / maxval).clip(0, 255).astype(np.uint8)
    return data


def decode_ppm(buf: bytes) -> RasterImage:
    return _raster(decode_ppm_array(buf))


def encode_ppm(img) -> bytes:
    a = np.asarray(img, dtype=np.uint8)
    h, w = a.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + a.tobytes()


def _raster(data: np.ndarray) -> RasterImage:
    try:
        return RasterImage(data)
    except ValueError as e:
        raise FormatError(str(e)) from None


def decode_png(buf: bytes) -> RasterImage:
    try:
        with Image.open(_stdio.BytesIO(buf)) as im:
            im.load()
            if im.format != "PNG":
                raise FormatError(f"not a PNG file ({im.format})")
            if im.mode in ("I", "I;16", "I;16B", "F"):
                raise FormatError(f"unsupported bit depth: PNG mode {im.mode}")
            if im.mode not in ("RGB", "L"):
                im = im.convert("RGBA" if "A" in im.getbands() or im.mode == "P" else "RGB")
            a = np.asarray(im)
    except FormatError:
        raise
    except Exception as e:  # Pillow raises a zoo of exception types
        raise FormatError(f"cannot decode PNG: {e}") from None
    if a.ndim == 2:
        a = np.repeat(a[:, :, None], 3, axis=2)
    return _raster(np.ascontiguousarray(a[:, :, :3]))


def read_image(path) -> RasterImage:
    """Decode a P6 PPM or 8-bit PNG (grey is replicated to RGB)."""
    buf = _read_bytes(path)
    if buf[:2] == b"P6":
        return decode_ppm(buf)
    if buf[:8] == b"\x89PNG\r\n\x1a\n":
        return decode_png(buf)
    raise FormatError(f"malformed header: {Path(path).name} is neither P6 PPM nor PNG")


def write_image(img, path) -> None:
    """Write ``.ppm`` natively, anything else through Pillow (PNG)."""
    path = Path(path)
    a = np.asarray(img, dtype=np.uint8)
    if path.suffix.lower() == ".ppm":
        path.write_bytes(encode_ppm(a))
    else:
        Image.fromarray(a, "RGB").save(path, format="PNG")


def decode_flo(buf: bytes) -> FlowField:
    if len(buf) < 12:
        raise FormatError(f"truncated header: expected 12 bytes, got {len(buf)}")
    magic, = struct.unpack("<f", buf[:4])
    if magic != FLO_MAGIC:
        raise FormatError(f"bad magic: {magic!r}")
    width, height = struct.unpack("<ii", buf[4:12])
    if not (1 <= width <= FLO_MAX_SIDE and 1 <= height <= FLO_MAX_SIDE):
        raise FormatError(f"dimension overflow: {width}x{height}")
    raw = np.frombuffer(_payload(buf, 12, width * height * 8), "<f4").reshape(height, width, 2)
    if not np.all(np.isfinite(raw)):
        raise FormatError("non-finite flow values")
    return FlowField(raw[:, :, 0], raw[:, :, 1])


def encode_flo(f: FlowField) -> bytes:
    h, w = f.shape
    uv = np.stack([f.dx, f.dy], axis=2).astype("<f4")
    return struct.pack("<fii", FLO_MAGIC, w, h) + uv.tobytes()


def read_flo(path) -> FlowField:
    """Parse a Middlebury ``.flo`` file."""
    return decode_flo(_read_bytes(path))


def write_flo(f: FlowField, path) -> None:
    Path(path).write_bytes(encode_flo(f))


def encode_pgm16(labels) -> bytes:
    lab = as_labels(labels)
    if lab.size and (lab.min() < 0 or lab.max() > 65535):
        raise FormatError(f"label overflow: labels must fit 16 bits, max is {lab.max()}")
    h, w = lab.shape
    return b"P5\n%d %d\n65535\n" % (w, h) + lab.astype(">u2").tobytes()


def decode_pgm(buf: bytes) -> LabelMap:
    width, height, maxval, off = _pnm_header(buf, b"P5")
    dtype, size = (np.uint8, 1) if maxval < 256 else (np.dtype(">u2"), 2)
    data = np.frombuffer(_payload(buf, off, width * height * size), dtype)
    return LabelMap(data.reshape(height, width).astype(np.int64))


def encode_csv(labels) -> bytes:
    lab = as_labels(labels)
    return "".join(",".join(map(str, row)) + "\n" for row in lab.tolist()).encode()


def decode_csv(buf: bytes) -> LabelMap:
    try:
        text = buf.decode("ascii")
    except UnicodeDecodeError:
        raise FormatError("csv labels must be ASCII") from None
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise FormatError("empty csv label file")
    try:
        data = [[int(v) for v in line.split(",")] for line in rows]
    except ValueError as e:
        raise FormatError(f"non-integer csv field: {e}") from None
    width = len(data[0])
    bad = next((i for i, r in enumerate(data) if len(r) != width), None)
    if bad is not None:
        raise FormatError(f"ragged csv: row {bad} has {len(data[bad])} fields, expected {width}")
    try:
        return LabelMap(np.array(data, dtype=np.int64))
    except ValueError as e:
        raise FormatError(str(e)) from None


def _label_format(path, fmt):
    if fmt is not None:
        return fmt
    return "csv" if Path(path).suffix.lower() == ".csv" else "pgm16"


def write_labels(labels, path, fmt: str | None = None) -> None:
    """Write a label map as ``pgm16`` (P5, 16-bit big-endian) or ``csv``.

    The format defaults from the suffix (``.csv`` or else pgm16).
    """
    fmt = _label_format(path, fmt)
    if fmt == "pgm16":
        data = encode_pgm16(labels)
    elif fmt == "csv":
        data = encode_csv(labels)
    else:
        raise ValueError(f"unknown label format {fmt!r}")
    Path(path).write_bytes(data)


def read_labels(path, fmt: str | None = None) -> LabelMap:
    fmt = _label_format(path, fmt)
    buf = _read_bytes(path)
    if fmt == "csv":
        return decode_csv(buf)
    return decode_pgm(buf)


def render_overlay(img, seg, color=(255, 0, 0)) -> RasterImage:
    """Copy of ``img`` with superpixel boundary pixels painted ``color``."""
    a = np.array(img, dtype=np.uint8, copy=True)
    b = seg_to_boundary(seg)
    if b.shape != a.shape[:2]:
        raise ValueError(f"dimension mismatch: image {a.shape[:2]} vs labels {b.shape}")
    a[b] = color
    return RasterImage(a)


@dataclass(frozen=True)
class DatasetEntry:
    image: Path
    gt: Path | None = None
    next_frame: Path | None = None
    flow: Path | None = None
