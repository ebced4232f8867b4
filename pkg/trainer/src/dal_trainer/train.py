"""Training loop: Adam, step learning-rate drop, random square crops.

Loss curves land in <out>/loss.csv and checkpoints in <out>/model.pt
(latest) plus numbered snapshots. Determinism is not promised; set
torch.manual_seed yourself for repeatable toy runs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import torch

from .losses import bce_loss_logits, dal_loss_logits
from .model import DalModel
from .targets import BinaryNeighborMap, auto_sigma, gaussian_affinities, mask_to_neighbors


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epochs: int = 5000
    lr_drop_epoch: int = 3000
    lr_drop_factor: float = 10.0
    crop: int = 200
    sigma: Optional[float] = None  # None: per-image auto bandwidth
    loss: str = "dal"  # dal | bce
    checkpoint_every: int = 1000

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs < 1 or self.crop < 16:
            raise ValueError("hyperparameters must be positive (crop >= 16)")

    def learning_rate_at(self, epoch: int) -> float:
        """1-based epoch; the rate drops after lr_drop_epoch epochs."""
        if epoch <= self.lr_drop_epoch:
            return self.learning_rate
        return self.learning_rate / self.lr_drop_factor


@dataclass
class Sample:
    """One training pair, with targets precomputed at full size."""

    image: np.ndarray  # (H, W, 3) float32 in [0, 1]
    neighbors: BinaryNeighborMap
    gsim: np.ndarray  # (8, H, W) float64

    @classmethod
    def from_arrays(cls, image: np.ndarray, mask: np.ndarray, sigma: Optional[float]) -> "Sample":
        if image.shape[:2] != mask.shape:
            raise ValueError(f"image {image.shape[:2]} vs mask {mask.shape}")
        bandwidth = sigma if sigma is not None else auto_sigma(image)
        return cls(
            image=np.asarray(image, dtype=np.float32),
            neighbors=mask_to_neighbors(mask),
            gsim=gaussian_affinities(image, bandwidth),
        )


def _random_crop(sample: Sample, crop: int, rng: np.random.Generator):
    h, w = sample.image.shape[:2]
    ch, cw = min(crop, h), min(crop, w)
    r0 = int(rng.integers(0, h - ch + 1))
    c0 = int(rng.integers(0, w - cw + 1))
    image = sample.image[r0 : r0 + ch, c0 : c0 + cw]
    neighbors = BinaryNeighborMap(
        data=sample.neighbors.data[:, r0 : r0 + ch, c0 : c0 + cw],
        frame=sample.neighbors.frame[:, r0 : r0 + ch, c0 : c0 + cw],
    )
    gsim = sample.gsim[:, r0 : r0 + ch, c0 : c0 + cw]
    return image, neighbors, gsim


def train(
    model: DalModel,
    samples: Sequence[Sample],
    config: TrainConfig,
    out_dir=None,
    seed: Optional[int] = None,
) -> List[float]:
    """Run the loop; returns the per-epoch loss history."""
    if not samples:
        raise ValueError("no training samples")
    rng = np.random.default_rng(seed)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.learning_rate, betas=(config.beta1, config.beta2)
    )
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    history: List[float] = []
    model.train()
    for epoch in range(1, config.epochs + 1):
        for group in optimizer.param_groups:
            group["lr"] = config.learning_rate_at(epoch)

        sample = samples[int(rng.integers(0, len(samples)))]
        image, neighbors, gsim = _random_crop(sample, config.crop, rng)
        x = torch.from_numpy(image.transpose(2, 0, 1)).unsqueeze(0)
        logits = model.forward_logits(x)[0]
        if config.loss == "bce":
            loss = bce_loss_logits(logits, neighbors)
        else:
            loss = dal_loss_logits(logits, neighbors, torch.from_numpy(gsim).to(logits.dtype))
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        history.append(float(loss.detach()))

        if out is not None and (
            epoch % config.checkpoint_every == 0 or epoch == config.epochs
        ):
            torch.save(model.state_dict(), out / "model.pt")
            torch.save(model.state_dict(), out / f"model_{epoch:06d}.pt")

    if out is not None:
        with open(out / "loss.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "loss"])
            for i, value in enumerate(history, start=1):
                writer.writerow([i, value])
    return history
