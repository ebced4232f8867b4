"""Hierarchical entropy-rate superpixel engine.

Build an affinity map (Gaussian or loaded), turn it into a weighted
pixel graph, run round-based entropy-rate merging once, then extract
any number of superpixels from the recorded hierarchy near-instantly.
"""

from .affinity import apply_edge_probs, auto_sigma, gaussian_affinity
from .errors import ArgumentError, EngineError, FormatError
from .ers_baseline import lazy_greedy_segment, lazy_greedy_select
from .graph import PixelGraph, EdgeGain, build_graph, commit_edge, edge_gain, entropy_rate
from .hers import DisjointSet, MergeHierarchy, build_hierarchy, extract, extract_many
from .image_io import (
    load_image,
    permute_channels,
    read_affinity,
    read_edge_probs,
    read_hierarchy,
    read_labels,
    write_affinity,
    write_boundary_overlay,
    write_edge_probs,
    write_hierarchy,
    write_labels,
    write_ppm,
)
from .metrics import MetricReport, asa, boundary_recall, evaluate, explained_variation
from .types import (
    CHANNEL_NAMES,
    CHANNEL_OFFSETS,
    MIRROR,
    AffinityMap,
    EdgeProbMap,
    GaussianParams,
    LabelMap,
    RgbImage,
)

__version__ = "0.1.0"
