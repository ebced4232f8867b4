"""Weighted pixel graph and the entropy-rate edge objective.

The graph is the undirected 8-connected lattice, one edge per in-frame
neighbour pair, weighted by the symmetrised affinity (a_ij + a_ji) / 2.
All weights are normalised once by w_T (the sum of incident weights
over all nodes, i.e. twice the sum of edge weights), so node masses
start at the random-walk stationary distribution and sum to 1.

Selecting an edge changes the entropy rate by

    gain = f(wn + m_u) + f(wn + m_v) - f(m_u) - f(m_v) - 2 f(wn)

with f(x) = x ln x (and 0 ln 0 = 0), wn the normalised edge weight and
m the current masses of the two endpoints. Committing the edge then
folds wn into both masses, which makes repeated application of the
same formula incremental. `entropy_rate` keeps the independent
from-scratch view: the conditional entropy of the random walk over
the selected edges with the unselected incident weight parked in
self-loops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import xlogy

from .errors import ArgumentError
from .types import MIRROR, AffinityMap

# Forward channels emitted per pixel, in construction order. Each
# in-frame undirected pair is produced exactly once, from its
# lexicographically smaller endpoint.
_FORWARD = (
    ("E", 4, 0, 1),
    ("SE", 7, 1, 1),
    ("S", 6, 1, 0),
    ("SW", 5, 1, -1),
)


def gain_formula(wn, m_u, m_v):
    """Entropy-rate gain of selecting edges with weights wn at masses m_u, m_v.

    Vectorised; every term uses the 0 ln 0 = 0 convention, so the
    result is finite for all non-negative inputs.
    """
    a = wn + m_u
    b = wn + m_v
    return (
        xlogy(a, a) + xlogy(b, b)
        - xlogy(m_u, m_u) - xlogy(m_v, m_v)
        - 2.0 * xlogy(wn, wn)
    )


@dataclass
class EdgeGain:
    """Gain (in nats) of selecting one edge."""

    edge: int
    gain: float


@dataclass
class PixelGraph:
    """Undirected weighted graph with per-node masses.

    edge_u/edge_v/edge_w hold one row per undirected edge; edge_wn is
    edge_w / w_total. masses start at the stationary distribution and
    grow as edges are committed.
    """

    node_count: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    w_total: float
    edge_wn: np.ndarray = field(init=False)
    masses: np.ndarray = field(init=False)
    committed: np.ndarray = field(init=False)
    shape: Optional[Tuple[int, int]] = None
    gain_evaluations: int = field(default=0, init=False)

    def __post_init__(self):
        if self.w_total <= 0.0:
            raise ArgumentError("graph has zero total weight")
        self.edge_wn = self.edge_w / self.w_total
        node_w = np.bincount(self.edge_u, weights=self.edge_w, minlength=self.node_count)
        node_w += np.bincount(self.edge_v, weights=self.edge_w, minlength=self.node_count)
        self.masses = node_w / self.w_total
        self.committed = np.zeros(len(self.edge_u), dtype=bool)

    @property
    def edge_count(self) -> int:
        return len(self.edge_u)

    def edge(self, idx: int) -> Tuple[int, int, float]:
        return int(self.edge_u[idx]), int(self.edge_v[idx]), float(self.edge_w[idx])

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Sequence[Tuple[int, int, float]],
        shape: Optional[Tuple[int, int]] = None,
    ) -> "PixelGraph":
        """Build a graph from an explicit edge list (testing and demos;
        the engine's public surfaces only accept affinity maps)."""
        if node_count < 1:
            raise ArgumentError("graph needs at least one node")
        u = np.asarray([e[0] for e in edges], dtype=np.int64)
        v = np.asarray([e[1] for e in edges], dtype=np.int64)
        w = np.asarray([e[2] for e in edges], dtype=np.float64)
        if len(u) and (u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= node_count):
            raise ArgumentError("edge endpoint out of range")
        if np.any(u == v):
            raise ArgumentError("self-loops are not allowed")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ArgumentError("edge weights must be finite and non-negative")
        pairs = set()
        for a, b in zip(u, v):
            key = (min(a, b), max(a, b))
            if key in pairs:
                raise ArgumentError(f"duplicate undirected edge {key}")
            pairs.add(key)
        return cls(node_count, u, v, w, w_total=2.0 * float(np.sum(w)), shape=shape)


def build_graph(amap: AffinityMap) -> PixelGraph:
    """Lattice graph from an affinity map, weights (a_ij + a_ji) / 2.

    Edges are emitted per pixel in row-major order, channels E, SE, S,
    SW, which fixes the tie-breaking order used everywhere downstream.
    Raises if every affinity is zero (the walk would be undefined).
    """
    h, w = amap.height, amap.width
    n = h * w
    idx = np.arange(n, dtype=np.int64).reshape(h, w)
    data = amap.data.astype(np.float64)

    per_channel_u = []
    per_channel_v = []
    per_channel_w = []
    per_channel_valid = []
    for _, chan, dr, dc in _FORWARD:
        weight = np.zeros((h, w), dtype=np.float64)
        valid = np.zeros((h, w), dtype=bool)
        rs = slice(0, h - dr)
        cs = slice(max(0, -dc), w - max(0, dc))
        rd = slice(dr, h)
        cd = slice(max(0, dc), w - max(0, -dc))
        weight[rs, cs] = (data[chan][rs, cs] + data[MIRROR[chan]][rd, cd]) / 2.0
        valid[rs, cs] = True
        neighbor = np.zeros((h, w), dtype=np.int64)
        neighbor[rs, cs] = idx[rd, cd]
        per_channel_u.append(idx)
        per_channel_v.append(neighbor)
        per_channel_w.append(weight)
        per_channel_valid.append(valid)

    # Interleave so flattening yields pixel-major, channel-minor order.
    u = np.stack(per_channel_u, axis=2).ravel()
    v = np.stack(per_channel_v, axis=2).ravel()
    wgt = np.stack(per_channel_w, axis=2).ravel()
    valid = np.stack(per_channel_valid, axis=2).ravel()

    u, v, wgt = u[valid], v[valid], wgt[valid]
    total = 2.0 * float(np.sum(wgt))
    if total <= 0.0:
        raise ArgumentError("affinity map is all zero; the pixel graph has no weight")
    return PixelGraph(n, u, v, wgt, w_total=total, shape=(h, w))


def edge_gain(graph: PixelGraph, edge: int) -> EdgeGain:
    """Entropy-rate gain of the edge at the graph's current masses."""
    u = graph.edge_u[edge]
    v = graph.edge_v[edge]
    g = gain_formula(graph.edge_wn[edge], graph.masses[u], graph.masses[v])
    graph.gain_evaluations += 1
    return EdgeGain(edge=int(edge), gain=float(g))


def commit_edge(graph: PixelGraph, edge: int) -> None:
    """Fold the edge's normalised weight into both endpoint masses."""
    if graph.committed[edge]:
        raise ArgumentError(f"edge {edge} already committed")
    wn = graph.edge_wn[edge]
    graph.masses[graph.edge_u[edge]] += wn
    graph.masses[graph.edge_v[edge]] += wn
    graph.committed[edge] = True


def entropy_rate(graph: PixelGraph, selected: Iterable[int]) -> float:
    """Entropy rate of the walk restricted to the selected edges.

    Unselected incident weight sits in per-node self-loops, so the
    empty selection is the deterministic all-self-loop process with
    entropy 0. Uses the initial stationary distribution, independent
    of any committed masses; this is the from-scratch counterpart to
    the incremental gain bookkeeping.
    """
    sel = np.asarray(sorted(set(int(e) for e in selected)), dtype=np.int64)
    node_w = np.bincount(graph.edge_u, weights=graph.edge_w, minlength=graph.node_count)
    node_w += np.bincount(graph.edge_v, weights=graph.edge_w, minlength=graph.node_count)
    mu = node_w / graph.w_total

    total = 0.0
    if sel.size:
        wn = graph.edge_wn[sel]
        for ends in (graph.edge_u[sel], graph.edge_v[sel]):
            total += float(np.sum(xlogy(wn, wn) - xlogy(wn, mu[ends])))
        loop = mu.copy()
        np.subtract.at(loop, graph.edge_u[sel], wn)
        np.subtract.at(loop, graph.edge_v[sel], wn)
        np.clip(loop, 0.0, None, out=loop)
    else:
        loop = mu
    total += float(np.sum(xlogy(loop, loop) - xlogy(loop, mu)))
    return -total + 0.0  # avoid returning -0.0
