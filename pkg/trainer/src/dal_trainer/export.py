"""Inference and export toward the segmentation engine.

The engine consumes AFF8 files directly; the optional EDG1 side export
summarises the fused affinities as a per-pixel boundary probability
(1 minus the mean in-frame affinity), usable for the engine's
edge-probability division variant.
"""

from __future__ import annotations

import numpy as np
import torch

from .formats import in_frame_mask, write_aff8, write_edg1
from .model import DalModel


def predict_affinities(model: DalModel, image: np.ndarray) -> np.ndarray:
    """(H, W, 3) image in [0, 1] -> (8, H, W) float32, out-of-frame zeroed."""
    model.eval()
    with torch.no_grad():
        x = torch.from_numpy(np.asarray(image, dtype=np.float32).transpose(2, 0, 1))
        pred = model(x.unsqueeze(0))[0].numpy()
    frame = in_frame_mask(pred.shape[1], pred.shape[2])
    return np.where(frame, pred, 0.0).astype(np.float32)


def edge_probs_from_affinities(affinities: np.ndarray) -> np.ndarray:
    """Per-pixel boundary probability: 1 - mean in-frame affinity."""
    frame = in_frame_mask(affinities.shape[1], affinities.shape[2])
    total = np.where(frame, affinities, 0.0).sum(axis=0)
    count = frame.sum(axis=0)
    return np.clip(1.0 - total / count, 0.0, 1.0).astype(np.float32)


def export_affinity(model: DalModel, image: np.ndarray, out_path, edge_probs_path=None) -> None:
    """Run inference and write AFF8 (plus EDG1 when requested)."""
    affinities = predict_affinities(model, image)
    write_aff8(affinities, out_path)
    if edge_probs_path is not None:
        write_edg1(edge_probs_from_affinities(affinities), edge_probs_path)
