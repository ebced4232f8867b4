"""Segmentation quality metrics: ASA, boundary recall, explained variation.

Boundary convention: a pixel is a boundary pixel when its label
differs from its east or south 4-neighbour, so each boundary between
two pixels is marked once, on the first pixel in row-major order.
Recall tolerance is measured in Chebyshev distance (default 2 px).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation

from .errors import ArgumentError
from .types import LabelMap, RgbImage


@dataclass
class MetricReport:
    """One evaluation row: all three scores live in [0, 1]."""

    asa: float
    br: float
    ev: float
    k: int
    boundary_tolerance: int

    def csv_row(self, image_id: str) -> str:
        return (
            f"{image_id},{self.k},{self.asa!r},{self.br!r},"
            f"{self.ev!r},{self.boundary_tolerance}"
        )


def _check_dims(a, b):
    if (a.height, a.width) != (b.height, b.width):
        raise ArgumentError(
            f"dimension mismatch: {a.height}x{a.width} vs {b.height}x{b.width}"
        )


def asa(gt: LabelMap, seg: LabelMap) -> float:
    """Achievable segmentation accuracy: each superpixel votes for its
    best-overlapping ground-truth class; the covered pixel fraction is
    returned (equals 1 minus the under-segmentation error)."""
    _check_dims(gt, seg)
    pair = seg.labels.ravel() * gt.k + gt.labels.ravel()
    overlap = np.bincount(pair, minlength=seg.k * gt.k).reshape(seg.k, gt.k)
    return float(overlap.max(axis=1).sum()) / gt.labels.size


def boundary_mask(labels: LabelMap) -> np.ndarray:
    lab = labels.labels
    mask = np.zeros(lab.shape, dtype=bool)
    mask[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    mask[:-1, :] |= lab[:-1, :] != lab[1:, :]
    return mask


def boundary_recall(gt: LabelMap, seg: LabelMap, tolerance: int = 2) -> float:
    """Fraction of ground-truth boundary pixels with a predicted
    boundary pixel within Chebyshev distance <= tolerance. Boundary-free
    ground truth scores 1.0 (nothing to recall)."""
    _check_dims(gt, seg)
    if tolerance < 0:
        raise ArgumentError(f"tolerance must be >= 0, got {tolerance}")
    gt_b = boundary_mask(gt)
    total = int(gt_b.sum())
    if total == 0:
        return 1.0
    seg_b = boundary_mask(seg)
    if tolerance > 0:
        size = 2 * tolerance + 1
        seg_b = binary_dilation(seg_b, structure=np.ones((size, size), dtype=bool))
    return int((gt_b & seg_b).sum()) / total


def explained_variation(image: RgbImage, seg: LabelMap) -> float:
    """Fraction of colour variance captured when every pixel takes its
    superpixel's mean colour; constant images score 1.0 by convention."""
    if (seg.height, seg.width) != (image.height, image.width):
        raise ArgumentError(
            f"dimension mismatch: image {image.height}x{image.width} "
            f"vs labels {seg.height}x{seg.width}"
        )
    pixels = image.data.reshape(-1, 3)
    labels = seg.labels.ravel()
    n = labels.size

    mu = pixels.sum(axis=0) / n
    den_terms = ((pixels - mu) ** 2).sum(axis=1)
    den = math.fsum(den_terms.tolist())
    if den == 0.0:
        return 1.0

    counts = np.bincount(labels, minlength=seg.k).astype(np.float64)
    sums = np.stack(
        [np.bincount(labels, weights=pixels[:, c], minlength=seg.k) for c in range(3)],
        axis=1,
    )
    means = sums / counts[:, None]
    num_terms = counts * ((means - mu) ** 2).sum(axis=1)
    num = math.fsum(num_terms.tolist())
    return num / den


def evaluate(
    gt: LabelMap, seg: LabelMap, image: RgbImage, tolerance: int = 2
) -> MetricReport:
    return MetricReport(
        asa=asa(gt, seg),
        br=boundary_recall(gt, seg, tolerance),
        ev=explained_variation(image, seg),
        k=seg.k,
        boundary_tolerance=tolerance,
    )
