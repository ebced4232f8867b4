"""Training targets: binary neighbour maps and Gaussian affinities.

A ground-truth class mask turns into an 8-channel binary map `t` with
t = 1 where the neighbour shares the class, 0 where it does not; the
out-of-frame slots carry no pixel pair and are excluded from every
loss through the accompanying frame mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formats import CHANNEL_OFFSETS, in_frame_mask


@dataclass(frozen=True)
class BinaryNeighborMap:
    """8 x H x W same-class indicators plus the in-frame validity mask."""

    data: np.ndarray   # float32 in {0, 1}
    frame: np.ndarray  # bool, False where the neighbour does not exist

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


def _shift(arr: np.ndarray, dr: int, dc: int, fill=0):
    h, w = arr.shape
    out = np.full((h, w), fill, dtype=arr.dtype)
    rs = slice(max(0, -dr), h - max(0, dr))
    cs = slice(max(0, -dc), w - max(0, dc))
    rd = slice(max(0, dr), h - max(0, -dr))
    cd = slice(max(0, dc), w - max(0, -dc))
    out[rs, cs] = arr[rd, cd]
    return out


def mask_to_neighbors(mask: np.ndarray) -> BinaryNeighborMap:
    """Same-class indicator toward each of the 8 neighbours."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"expected (H, W) class mask, got {mask.shape}")
    h, w = mask.shape
    frame = in_frame_mask(h, w)
    data = np.zeros((8, h, w), dtype=np.float32)
    for c, (dr, dc) in enumerate(CHANNEL_OFFSETS):
        same = mask == _shift(mask, dr, dc, fill=-1)
        data[c] = np.where(frame[c], same.astype(np.float32), 0.0)
    return BinaryNeighborMap(data=data, frame=frame)


def gaussian_affinities(image: np.ndarray, sigma: float) -> np.ndarray:
    """exp(-d^2 / 2 sigma^2) toward each neighbour, d the RGB l2 distance.

    image is (H, W, 3) in [0, 1]; out-of-frame slots are 0.
    """
    h, w, _ = image.shape
    out = np.zeros((8, h, w), dtype=np.float64)
    frame = in_frame_mask(h, w)
    for c, (dr, dc) in enumerate(CHANNEL_OFFSETS):
        shifted = np.stack([_shift(image[:, :, ch], dr, dc) for ch in range(3)], axis=2)
        d2 = np.sum((image - shifted) ** 2, axis=2)
        out[c] = np.where(frame[c], np.exp(-d2 / (2.0 * sigma * sigma)), 0.0)
    return out


def auto_sigma(image: np.ndarray) -> float:
    """Mean neighbour RGB distance over undirected pairs, floored at 1e-4."""
    h, w, _ = image.shape
    total = 0.0
    count = 0
    frame = in_frame_mask(h, w)
    for c, (dr, dc) in enumerate(CHANNEL_OFFSETS):
        if (dr, dc) not in ((0, 1), (1, 1), (1, 0), (1, -1)):
            continue
        shifted = np.stack([_shift(image[:, :, ch], dr, dc) for ch in range(3)], axis=2)
        d = np.sqrt(np.sum((image - shifted) ** 2, axis=2))
        total += float(d[frame[c]].sum())
        count += int(frame[c].sum())
    return max(total / max(count, 1), 1e-4)
