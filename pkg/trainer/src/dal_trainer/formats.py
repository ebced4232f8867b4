"""File IO for the trainer.

The binary formats here are the contract with the segmentation engine
and must stay byte-compatible with it:

  AFF8  magic "AFF8", u32 H, u32 W, u32 reserved=0 (little-endian),
        8*H*W float32, channel-major, channels ordered
        (NW, N, NE, W, E, SW, S, SE), each plane row-major.
  EDG1  magic "EDG1", u32 H, u32 W, H*W float32 row-major.

Images load from 8-bit RGB PNG/PPM; masks from CSV of integers or
16-bit binary PGM (P5, maxval 65535).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

CHANNEL_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)

MIRROR = (7, 6, 5, 4, 3, 2, 1, 0)


def in_frame_mask(height: int, width: int) -> np.ndarray:
    """Boolean (8, H, W): True where the channel's neighbour exists."""
    mask = np.ones((8, height, width), dtype=bool)
    for c, (dr, dc) in enumerate(CHANNEL_OFFSETS):
        if dr < 0:
            mask[c, 0, :] = False
        elif dr > 0:
            mask[c, height - 1, :] = False
        if dc < 0:
            mask[c, :, 0] = False
        elif dc > 0:
            mask[c, :, width - 1] = False
    return mask


def load_image(path) -> np.ndarray:
    """RGB image as (H, W, 3) float32 in [0, 1]."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return arr.astype(np.float32) / 255.0


def load_mask(path) -> np.ndarray:
    """Integer class mask as (H, W) int64, from CSV or 16-bit PGM."""
    raw = Path(path).read_bytes()
    if raw[:2] == b"P5":
        pos = 2
        fields = []
        while len(fields) < 3:
            while pos < len(raw) and raw[pos : pos + 1].isspace():
                pos += 1
            start = pos
            while pos < len(raw) and not raw[pos : pos + 1].isspace():
                pos += 1
            fields.append(raw[start:pos])
        width, height, maxval = (int(f) for f in fields)
        if maxval != 65535:
            raise ValueError(f"mask PGM must have maxval 65535, got {maxval}")
        pos += 1
        data = np.frombuffer(raw, dtype=">u2", count=height * width, offset=pos)
        return data.reshape(height, width).astype(np.int64)
    rows = [
        [int(cell) for cell in line.split(",")]
        for line in raw.decode("utf-8").strip().splitlines()
    ]
    return np.asarray(rows, dtype=np.int64)


def write_aff8(affinities: np.ndarray, path) -> None:
    """Write an (8, H, W) array in [0, 1] as AFF8."""
    a = np.asarray(affinities, dtype=np.float32)
    if a.ndim != 3 or a.shape[0] != 8:
        raise ValueError(f"expected (8, H, W), got {a.shape}")
    with open(path, "wb") as f:
        f.write(b"AFF8")
        f.write(struct.pack("<III", a.shape[1], a.shape[2], 0))
        f.write(a.astype("<f4").tobytes())


def write_edg1(probs: np.ndarray, path) -> None:
    """Write an (H, W) array in [0, 1] as EDG1."""
    p = np.asarray(probs, dtype=np.float32)
    if p.ndim != 2:
        raise ValueError(f"expected (H, W), got {p.shape}")
    with open(path, "wb") as f:
        f.write(b"EDG1")
        f.write(struct.pack("<II", p.shape[0], p.shape[1]))
        f.write(p.astype("<f4").tobytes())
