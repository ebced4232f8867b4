import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from entroseg import AffinityMap, RgbImage
from entroseg.graph import PixelGraph

# Two dense triangles joined by one weak bridge: every singleton's best
# pick stays inside its triangle, so the round-based solver reaches the
# two-cluster partition in a single round while a sequential greedy
# needs four additions.
SIX_NODE_EDGES = [
    (0, 1, 1.0), (1, 2, 0.9), (0, 2, 0.8),
    (3, 4, 1.0), (4, 5, 0.9), (3, 5, 0.8),
    (2, 3, 0.1),
]


def six_node_graph() -> PixelGraph:
    return PixelGraph.from_edges(6, SIX_NODE_EDGES)


def random_affinity_map(rng, height, width, zeros=False) -> AffinityMap:
    data = rng.random((8, height, width)).astype(np.float32)
    if zeros:
        data[rng.random(data.shape) < 0.2] = 0.0
    # mirror-consistency is not required by the graph builder, but keep
    # at least one strictly positive weight
    data[4, 0, 0] = max(data[4, 0, 0], 0.5)
    return AffinityMap(data)


def random_connected_graph(rng, node_count, extra_edges=3):
    """Random spanning tree plus a few extra edges, random weights."""
    edges = []
    seen = set()
    for v in range(1, node_count):
        u = int(rng.integers(0, v))
        edges.append((u, v, float(rng.random())))
        seen.add((u, v))
    attempts = 0
    while len(edges) < node_count - 1 + extra_edges and attempts < 50:
        attempts += 1
        u = int(rng.integers(0, node_count))
        v = int(rng.integers(0, node_count))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append((key[0], key[1], float(rng.random())))
    return edges


def quadrant_image(size=64):
    """Four flat-colour quadrants plus the matching ground-truth labels."""
    half = size // 2
    img = np.zeros((size, size, 3))
    img[:half, :half] = (1.0, 0.0, 0.0)
    img[:half, half:] = (0.0, 1.0, 0.0)
    img[half:, :half] = (0.0, 0.0, 1.0)
    img[half:, half:] = (1.0, 1.0, 0.0)
    labels = np.zeros((size, size), dtype=np.int64)
    labels[:half, half:] = 1
    labels[half:, :half] = 2
    labels[half:, half:] = 3
    return RgbImage(img), labels


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
