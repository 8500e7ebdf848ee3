"""Minimal reader/writer for 8-bit binary portable graymaps (P5)."""
from __future__ import annotations

import os

import numpy as np


def _tokens(buf: bytes, count: int, pos: int):
    """Read ``count`` whitespace separated header tokens, skipping comments."""
    out = []
    n = len(buf)
    while len(out) < count:
        while pos < n and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos:pos + 1] == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        out.append(buf[start:pos])
    return out, pos


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as f:
        buf = f.read()
    if buf[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {buf[:2]!r})")
    (w, h, maxval), pos = _tokens(buf, 3, 2)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise ValueError(f"{path}: malformed PGM header") from None
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    pos += 1  # single whitespace byte before raster
    data = buf[pos:pos + width * height]
    if len(data) != width * height:
        raise ValueError(f"{path}: raster truncated ({len(data)} of {width * height} bytes)")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width).copy()


def to_uint8(values) -> np.ndarray:
    """Round half-to-even and clamp to the 8-bit range."""
    return np.clip(np.rint(np.asarray(values, dtype=float)), 0, 255).astype(np.uint8)


def write_pgm(path: str | os.PathLike, image) -> None:
    img = np.asarray(image)
    if img.dtype != np.uint8:
        img = to_uint8(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {img.shape}")
    height, width = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(img).tobytes())
