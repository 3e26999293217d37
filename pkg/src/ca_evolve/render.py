"""Spacetime diagram rasterization.

Row t of the image is the lattice after t updates, top row first; 1-cells are
black. PBM (P4) is the bit-exact golden format; PNG re-encodes the same pixel
matrix via Pillow.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np


def history_pixels(rows: np.ndarray, scale: int = 1) -> np.ndarray:
    """0/1 pixel matrix of a history, each cell expanded to scale x scale."""
    rows = np.ascontiguousarray(rows, dtype=np.uint8)
    if rows.ndim != 2:
        raise ValueError("history must be a (T+1, N) array")
    if scale < 1:
        raise ValueError(f"cell pixel size must be positive, got {scale}")
    if scale == 1:
        return rows
    return np.repeat(np.repeat(rows, scale, axis=0), scale, axis=1)


def pbm_bytes(rows: np.ndarray, scale: int = 1) -> bytes:
    """Binary PBM (P4): row-major, 8 pixels per byte, 1 = black."""
    pixels = history_pixels(rows, scale)
    height, width = pixels.shape
    header = f"P4\n{width} {height}\n".encode("ascii")
    packed = np.packbits(pixels, axis=1)
    return header + packed.tobytes()


def parse_pbm(data: bytes) -> np.ndarray:
    """Inverse of pbm_bytes, for round-trip checks."""
    if not data.startswith(b"P4\n"):
        raise ValueError("not a binary PBM (P4) stream")
    head, _, rest = data[3:].partition(b"\n")
    width, height = (int(tok) for tok in head.split())
    row_bytes = (width + 7) // 8
    raw = np.frombuffer(rest, dtype=np.uint8, count=height * row_bytes)
    bits = np.unpackbits(raw.reshape(height, row_bytes), axis=1)
    return bits[:, :width]


def write_pbm(path, rows: np.ndarray, scale: int = 1) -> None:
    Path(path).write_bytes(pbm_bytes(rows, scale))


def write_png(path, rows: np.ndarray, scale: int = 1) -> None:
    from PIL import Image

    pixels = history_pixels(rows, scale)
    gray = ((1 - pixels) * 255).astype(np.uint8)  # 1-cells render black
    Image.fromarray(gray, mode="L").save(Path(path), format="PNG")
