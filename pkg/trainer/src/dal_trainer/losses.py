"""Training losses over 8-channel affinity predictions.

Both losses normalise by 1/(8N) and sum over in-frame entries only.
The plain BCE pushes same-class affinities to 1 and cross-class
affinities to 0. The affinity-matching variant keeps BCE's boundary
term but replaces the non-boundary term with an L1 pull toward the
precomputed Gaussian affinity, so heterogeneous regions inside one
class still receive a colour-similarity signal instead of a flat 1.

`bce_loss` / `dal_loss` take probabilities (clamped away from 0 and 1
before the logs). The `*_logits` twins evaluate the same quantities
from pre-sigmoid activations: -log(1-sigmoid(z)) becomes softplus(z),
whose gradient does not vanish when the sigmoid saturates, which is
what makes the boundary term trainable; the training loop uses these.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .targets import BinaryNeighborMap

CLAMP_EPS = 1e-6


def _prep(pred: torch.Tensor, target: BinaryNeighborMap):
    if tuple(pred.shape) != target.data.shape:
        raise ValueError(f"prediction {tuple(pred.shape)} vs target {target.data.shape}")
    t = torch.as_tensor(target.data, dtype=pred.dtype, device=pred.device)
    frame = torch.as_tensor(target.frame, device=pred.device)
    n = target.height * target.width
    return t, frame, 8.0 * n


def _check_gsim(gsim, pred):
    g = torch.as_tensor(gsim, dtype=pred.dtype, device=pred.device)
    if g.shape != pred.shape:
        raise ValueError(f"gaussian affinities {tuple(g.shape)} vs prediction {tuple(pred.shape)}")
    return g


def bce_loss(pred: torch.Tensor, target: BinaryNeighborMap) -> torch.Tensor:
    t, frame, norm = _prep(pred, target)
    a = pred.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
    terms = -(1.0 - t) * torch.log(1.0 - a) - t * torch.log(a)
    return terms[frame].sum() / norm


def dal_loss(
    pred: torch.Tensor, target: BinaryNeighborMap, gsim: torch.Tensor
) -> torch.Tensor:
    t, frame, norm = _prep(pred, target)
    g = _check_gsim(gsim, pred)
    a = pred.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
    # the clamp guards the log only; the L1 pull uses the raw prediction
    terms = -(1.0 - t) * torch.log(1.0 - a) + t * (g - pred).abs()
    return terms[frame].sum() / norm


def bce_loss_logits(logits: torch.Tensor, target: BinaryNeighborMap) -> torch.Tensor:
    t, frame, norm = _prep(logits, target)
    # -(1-t) log(1-s(z)) - t log s(z) = (1-t) softplus(z) + t softplus(-z)
    terms = (1.0 - t) * F.softplus(logits) + t * F.softplus(-logits)
    return terms[frame].sum() / norm


def dal_loss_logits(
    logits: torch.Tensor, target: BinaryNeighborMap, gsim: torch.Tensor
) -> torch.Tensor:
    t, frame, norm = _prep(logits, target)
    g = _check_gsim(gsim, logits)
    terms = (1.0 - t) * F.softplus(logits) + t * (g - torch.sigmoid(logits)).abs()
    return terms[frame].sum() / norm
