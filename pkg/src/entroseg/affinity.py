"""Handcrafted affinity pipelines.

Two producers for the engine's 8-channel affinity maps: a Gaussian
colour-similarity kernel over normalised RGB, and a modulation step
that divides affinities by averaged per-pixel boundary probabilities
(useful when an external edge detector should sharpen boundaries).
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError
from .types import CHANNEL_OFFSETS, AffinityMap, EdgeProbMap, GaussianParams, RgbImage


def _shifted_sq_distance(data: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """Squared RGB distance between each pixel and its (dr, dc) neighbour.

    Out-of-frame slots are left at 0.
    """
    h, w, _ = data.shape
    out = np.zeros((h, w), dtype=np.float64)
    rs = slice(max(0, -dr), h - max(0, dr))
    cs = slice(max(0, -dc), w - max(0, dc))
    rd = slice(max(0, dr), h - max(0, -dr))
    cd = slice(max(0, dc), w - max(0, -dc))
    diff = data[rs, cs] - data[rd, cd]
    out[rs, cs] = np.sum(diff * diff, axis=2)
    return out


def _in_frame(h: int, w: int, dr: int, dc: int) -> np.ndarray:
    mask = np.zeros((h, w), dtype=bool)
    mask[slice(max(0, -dr), h - max(0, dr)), slice(max(0, -dc), w - max(0, dc))] = True
    return mask


def gaussian_affinity(image: RgbImage, params: GaussianParams) -> AffinityMap:
    """Affinities exp(-d^2 / (2 sigma^2)) with d the RGB l2 distance.

    Mirrored channels are exactly equal by construction, values lie in
    (0, 1] for in-frame slots (underflow to 0 at extreme distances is
    accepted).
    """
    denom = 2.0 * params.sigma * params.sigma
    channels = np.zeros((8, image.height, image.width), dtype=np.float64)
    for c, (dr, dc) in enumerate(CHANNEL_OFFSETS):
        d2 = _shifted_sq_distance(image.data, dr, dc)
        channels[c] = np.exp(-d2 / denom)
        channels[c][~_in_frame(image.height, image.width, dr, dc)] = 0.0
    return AffinityMap(channels)


def auto_sigma(image: RgbImage) -> GaussianParams:
    """Bandwidth from the data: mean neighbour distance, floored at 1e-4.

    The mean runs over all in-frame 8-neighbour pixel pairs, each
    undirected pair counted once.
    """
    if image.pixel_count < 2:
        raise ArgumentError("auto_sigma needs at least 2 pixels")
    total = 0.0
    count = 0
    for dr, dc in ((0, 1), (1, 1), (1, 0), (1, -1)):  # forward half of the 8 directions
        d2 = _shifted_sq_distance(image.data, dr, dc)
        mask = _in_frame(image.height, image.width, dr, dc)
        total += float(np.sum(np.sqrt(d2[mask])))
        count += int(mask.sum())
    return GaussianParams(max(total / count, 1e-4))


def apply_edge_probs(amap: AffinityMap, edges: EdgeProbMap, epsilon: float = 1e-3) -> AffinityMap:
    """Divide each directed affinity by eps + mean endpoint edge probability.

    The quotient is clamped back to [0, 1]; epsilon keeps the divisor
    away from 0 where the probability map vanishes.
    """
    if (edges.height, edges.width) != (amap.height, amap.width):
        raise ArgumentError(
            f"edge map {edges.height}x{edges.width} does not match "
            f"affinity map {amap.height}x{amap.width}"
        )
    if not (epsilon > 0.0):
        raise ArgumentError(f"epsilon must be positive, got {epsilon}")
    h, w = amap.height, amap.width
    probs = edges.data.astype(np.float64)
    out = np.zeros((8, h, w), dtype=np.float64)
    for c, (dr, dc) in enumerate(CHANNEL_OFFSETS):
        shifted = np.zeros((h, w), dtype=np.float64)
        rs = slice(max(0, -dr), h - max(0, dr))
        cs = slice(max(0, -dc), w - max(0, dc))
        rd = slice(max(0, dr), h - max(0, -dr))
        cd = slice(max(0, dc), w - max(0, -dc))
        shifted[rs, cs] = probs[rd, cd]
        divisor = epsilon + (probs + shifted) / 2.0
        out[c] = np.clip(amap.data[c].astype(np.float64) / divisor, 0.0, 1.0)
    return AffinityMap(out)
