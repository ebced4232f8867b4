"""Affinity-learning trainer: produces AFF8/EDG1 inputs for the
entropy-rate superpixel engine."""

from .export import edge_probs_from_affinities, export_affinity, predict_affinities
from .formats import load_image, load_mask, write_aff8, write_edg1
from .losses import bce_loss, bce_loss_logits, dal_loss, dal_loss_logits
from .model import DalModel
from .targets import (
    BinaryNeighborMap,
    auto_sigma,
    gaussian_affinities,
    mask_to_neighbors,
)
from .train import Sample, TrainConfig, train

__version__ = "0.1.0"
