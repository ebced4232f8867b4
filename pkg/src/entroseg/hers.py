"""Hierarchical entropy-rate segmentation.

Borůvka-style rounds over the pixel graph: every round, each current
tree picks its best unselected outgoing edge by entropy-rate gain
(masses frozen at round start, ties broken toward the smaller edge
index), the picks are deduplicated, sorted by gain descending, and
applied in that order, skipping any pick whose endpoints were already
joined within the round. The full merge order is recorded; cutting it
after node_count - k merges yields the k-way segmentation, so any
number of superpixels comes out of one build at union-find replay
cost with no gain recomputation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ArgumentError, FormatError
from .graph import PixelGraph, commit_edge, gain_formula
from .types import LabelMap, densify_labels


class DisjointSet:
    """Union-find over integer node ids, union by rank + path compression."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.rank = np.zeros(n, dtype=np.int16)
        self.count = n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return int(root)

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        rank = self.rank
        if rank[ra] < rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if rank[ra] == rank[rb]:
            rank[ra] += 1
        self.count -= 1
        return True

    def find_all(self) -> np.ndarray:
        """Roots of every node at once (pointer doubling, compresses in place)."""
        parent = self.parent
        while True:
            grand = parent[parent]
            if np.array_equal(grand, parent):
                break
            parent = grand
        self.parent = parent
        return parent


@dataclass
class MergeHierarchy:
    """Ordered merge record of one build; immutable once constructed.

    round_boundaries holds the cumulative merge count at the end of
    each round. shape is the source lattice (H, W) when known; merges
    over explicit edge-list graphs have no lattice shape and label out
    as a single row.
    """

    node_count: int
    merge_u: np.ndarray
    merge_v: np.ndarray
    merge_gain: np.ndarray
    round_boundaries: List[int]
    shape: Optional[Tuple[int, int]] = None
    gain_evaluations: int = 0

    @property
    def merge_count(self) -> int:
        return len(self.merge_u)

    @property
    def round_count(self) -> int:
        return len(self.round_boundaries)

    @property
    def merges(self) -> List[Tuple[int, int, float]]:
        return [
            (int(u), int(v), float(g))
            for u, v, g in zip(self.merge_u, self.merge_v, self.merge_gain)
        ]

    def label_shape(self) -> Tuple[int, int]:
        return self.shape if self.shape is not None else (1, self.node_count)


def build_hierarchy(graph: PixelGraph) -> MergeHierarchy:
    """Run Borůvka rounds to a single tree and record the merge order.

    Advances the graph's masses (via commit_edge); build from a fresh
    graph if you need to run twice. Raises on disconnected graphs.
    """
    n = graph.node_count
    eu, ev, wn = graph.edge_u, graph.edge_v, graph.edge_wn
    masses = graph.masses
    ds = DisjointSet(n)
    merges_u: List[int] = []
    merges_v: List[int] = []
    merges_g: List[float] = []
    boundaries: List[int] = []
    evaluations = 0

    while ds.count > 1:
        roots = ds.find_all()
        alive = np.flatnonzero(roots[eu] != roots[ev])
        if alive.size == 0:
            raise ArgumentError(
                f"graph is disconnected: {ds.count} components remain with no crossing edge"
            )
        gains = gain_formula(wn[alive], masses[eu[alive]], masses[ev[alive]])
        evaluations += int(alive.size)

        # Best outgoing edge per tree: group by root over both endpoints,
        # order gain descending then edge index ascending within a group.
        keys = np.concatenate([roots[eu[alive]], roots[ev[alive]]])
        gg = np.concatenate([gains, gains])
        ee = np.concatenate([alive, alive])
        order = np.lexsort((ee, -gg, keys))
        sorted_keys = keys[order]
        head = np.ones(sorted_keys.size, dtype=bool)
        head[1:] = sorted_keys[1:] != sorted_keys[:-1]
        picks = np.unique(ee[order[head]])
        pick_gains = gains[np.searchsorted(alive, picks)]

        for t in np.lexsort((picks, -pick_gains)):
            e = int(picks[t])
            if ds.union(int(eu[e]), int(ev[e])):
                commit_edge(graph, e)
                merges_u.append(int(eu[e]))
                merges_v.append(int(ev[e]))
                merges_g.append(float(pick_gains[t]))
        boundaries.append(len(merges_u))

    return MergeHierarchy(
        node_count=n,
        merge_u=np.asarray(merges_u, dtype=np.int64),
        merge_v=np.asarray(merges_v, dtype=np.int64),
        merge_gain=np.asarray(merges_g, dtype=np.float64),
        round_boundaries=boundaries,
        shape=graph.shape,
        gain_evaluations=evaluations,
    )


def _labels_from_roots(roots: np.ndarray, shape: Tuple[int, int]) -> LabelMap:
    return LabelMap(densify_labels(roots.reshape(shape)))


def _check_k(hierarchy: MergeHierarchy, k: int) -> None:
    lo = hierarchy.node_count - hierarchy.merge_count
    if not (1 <= k <= hierarchy.node_count) or k < lo:
        raise ArgumentError(
            f"k={k} out of range [{max(lo, 1)}, {hierarchy.node_count}] for this hierarchy"
        )


def extract(hierarchy: MergeHierarchy, k: int) -> LabelMap:
    """k-way segmentation: replay the first node_count - k merges.

    Labels are densified by first occurrence in row-major order, so
    identical inputs give bit-identical label maps.
    """
    _check_k(hierarchy, k)
    ds = DisjointSet(hierarchy.node_count)
    take = hierarchy.node_count - k
    mu, mv = hierarchy.merge_u, hierarchy.merge_v
    for i in range(take):
        if not ds.union(int(mu[i]), int(mv[i])):
            raise FormatError(f"hierarchy replay: merge {i} joins an already-joined pair")
    return _labels_from_roots(ds.find_all(), hierarchy.label_shape())


def extract_many(hierarchy: MergeHierarchy, ks: Sequence[int]) -> List[LabelMap]:
    """Segmentations for an ascending list of k, sharing one replay pass.

    Equivalent to mapping extract over ks (bit-identical output), but
    the union-find replay runs once with snapshots at each crossing.
    """
    if len(ks) == 0:
        raise ArgumentError("ks must be non-empty")
    if any(b < a for a, b in zip(ks, ks[1:])):
        raise ArgumentError(f"ks must be ascending, got {list(ks)}")
    for k in ks:
        _check_k(hierarchy, k)

    ds = DisjointSet(hierarchy.node_count)
    mu, mv = hierarchy.merge_u, hierarchy.merge_v
    applied = 0
    snapshots = {}
    for k in sorted(set(ks), reverse=True):
        target = hierarchy.node_count - k
        while applied < target:
            if not ds.union(int(mu[applied]), int(mv[applied])):
                raise FormatError(
                    f"hierarchy replay: merge {applied} joins an already-joined pair"
                )
            applied += 1
        snapshots[k] = _labels_from_roots(ds.find_all().copy(), hierarchy.label_shape())
    return [snapshots[k] for k in ks]
