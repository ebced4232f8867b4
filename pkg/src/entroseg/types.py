"""Core domain types exchanged between the engine's modules.

Every type wraps a validated numpy array. The 8 directional affinity
channels follow one fixed order everywhere in this package:

    index 0  NW  (-1, -1)        index 4  E   ( 0, +1)
    index 1  N   (-1,  0)        index 5  SW  (+1, -1)
    index 2  NE  (-1, +1)        index 6  S   (+1,  0)
    index 3  W   ( 0, -1)        index 7  SE  (+1, +1)

Channels pointing outside the image frame are always exactly 0.
Mirrored channel pairs (the same undirected neighbour seen from both
ends) are (NW, SE), (N, S), (NE, SW), (W, E).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError

CHANNEL_NAMES = ("NW", "N", "NE", "W", "E", "SW", "S", "SE")

# (dr, dc) per channel, in channel order.
CHANNEL_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)

# MIRROR[c] is the channel of the reverse direction.
MIRROR = (7, 6, 5, 4, 3, 2, 1, 0)


def out_of_frame_mask(height: int, width: int) -> np.ndarray:
    """Boolean (8, H, W) mask of channel slots that point outside the frame."""
    mask = np.zeros((8, height, width), dtype=bool)
    for c, (dr, dc) in enumerate(CHANNEL_OFFSETS):
        if dr < 0:
            mask[c, 0, :] = True
        elif dr > 0:
            mask[c, height - 1, :] = True
        if dc < 0:
            mask[c, :, 0] = True
        elif dc > 0:
            mask[c, :, width - 1] = True
    return mask


@dataclass(frozen=True)
class RgbImage:
    """RGB image with channel values normalised to [0, 1].

    data has shape (H, W, 3), dtype float64.
    """

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 3 or d.shape[2] != 3:
            raise ArgumentError(f"expected (H, W, 3) image data, got shape {d.shape}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ArgumentError("image must have at least one pixel")
        if not np.all(np.isfinite(d)) or d.min() < 0.0 or d.max() > 1.0:
            raise ArgumentError("image values must be finite and within [0, 1]")
        d.flags.writeable = False
        object.__setattr__(self, "data", d)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def pixel_count(self) -> int:
        return self.height * self.width


@dataclass(frozen=True)
class AffinityMap:
    """8-channel directed pixel affinities in [0, 1].

    data has shape (8, H, W), dtype float32 (the on-disk precision, so
    write/read round-trips are lossless). Out-of-frame slots are forced
    to 0 on construction; affinity producers never populate them and
    the graph builder never reads them.
    """

    data: np.ndarray

    def __post_init__(self):
        d = np.array(np.asarray(self.data, dtype=np.float32), copy=True)
        if d.ndim != 3 or d.shape[0] != 8:
            raise ArgumentError(f"expected (8, H, W) affinity data, got shape {d.shape}")
        if not np.all(np.isfinite(d)) or d.min() < 0.0 or d.max() > 1.0:
            raise ArgumentError("affinities must be finite and within [0, 1]")
        d[out_of_frame_mask(d.shape[1], d.shape[2])] = 0.0
        d.flags.writeable = False
        object.__setattr__(self, "data", d)

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class EdgeProbMap:
    """Per-pixel boundary probability in [0, 1], shape (H, W) float32."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float32)
        if d.ndim != 2:
            raise ArgumentError(f"expected (H, W) edge probabilities, got shape {d.shape}")
        if not np.all(np.isfinite(d)) or d.min() < 0.0 or d.max() > 1.0:
            raise ArgumentError("edge probabilities must be finite and within [0, 1]")
        d.flags.writeable = False
        object.__setattr__(self, "data", d)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def densify_labels(raw: np.ndarray) -> np.ndarray:
    """Re-index labels to {0..k-1} by first occurrence in row-major order."""
    flat = np.asarray(raw).ravel()
    uniq, first_idx, inverse = np.unique(flat, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first_idx, kind="stable")] = np.arange(len(uniq))
    return rank[inverse].reshape(np.asarray(raw).shape)


@dataclass(frozen=True)
class LabelMap:
    """H x W integer labeling with labels exactly {0..k-1}.

    Labels produced by this engine are additionally 8-connected per
    label; externally loaded ground truth is exempt from that.
    """

    labels: np.ndarray
    k: int = field(default=-1)

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 2 or lab.size == 0:
            raise ArgumentError(f"expected non-empty (H, W) labels, got shape {lab.shape}")
        if lab.min() < 0:
            raise ArgumentError("labels must be non-negative")
        uniq = np.unique(lab)
        k = len(uniq)
        if uniq[0] != 0 or uniq[-1] != k - 1:
            raise ArgumentError("labels must be dense {0..k-1}; use from_raw to re-index")
        if self.k not in (-1, k):
            raise ArgumentError(f"declared k={self.k} but found {k} distinct labels")
        lab.flags.writeable = False
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_raw(cls, raw: np.ndarray) -> "LabelMap":
        """Build a LabelMap from arbitrary integer labels (re-indexed densely)."""
        return cls(densify_labels(raw))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class GaussianParams:
    """Bandwidth of the Gaussian colour-similarity kernel."""

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0) or not np.isfinite(self.sigma):
            raise ArgumentError(f"sigma must be a positive finite real, got {self.sigma}")
