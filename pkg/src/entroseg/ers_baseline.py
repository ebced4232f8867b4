"""Sequential greedy entropy-rate baseline.

One edge is added at a time: the globally best gain wins, with the
same mass bookkeeping as the hierarchical solver, so the two optimise
the identical objective state and differ only in selection schedule.
There is no balancing term, which is exactly what makes this baseline
slow and its partitions unbalanced next to the round-based solver.

Cached gains live in a max-heap and are revalidated on pop. Because
committing an edge raises the gains of its endpoints' other edges,
pop-time revalidation alone would under-select; every commit therefore
refreshes the heap entries of the edges incident to the two touched
nodes, which keeps the selection identical to a full-recompute greedy.
"""

from __future__ import annotations

import heapq
from typing import List

from .errors import ArgumentError
from .graph import PixelGraph, commit_edge, edge_gain
from .hers import DisjointSet, _labels_from_roots
from .types import LabelMap


def lazy_greedy_select(graph: PixelGraph, k: int) -> List[int]:
    """Edge indices committed on the way down to k components, in order."""
    n = graph.node_count
    if not (1 <= k <= n):
        raise ArgumentError(f"k={k} out of range [1, {n}]")

    incident: List[List[int]] = [[] for _ in range(n)]
    for e in range(graph.edge_count):
        incident[int(graph.edge_u[e])].append(e)
        incident[int(graph.edge_v[e])].append(e)

    version = [0] * n
    heap = []
    for e in range(graph.edge_count):
        u, v = int(graph.edge_u[e]), int(graph.edge_v[e])
        heapq.heappush(heap, (-edge_gain(graph, e).gain, e, version[u], version[v]))

    ds = DisjointSet(n)
    selected: List[int] = []
    while ds.count > k:
        if not heap:
            raise ArgumentError(f"graph is disconnected: cannot reach {k} components")
        neg_gain, e, vu, vv = heapq.heappop(heap)
        u, v = int(graph.edge_u[e]), int(graph.edge_v[e])
        if ds.find(u) == ds.find(v):
            continue
        if version[u] != vu or version[v] != vv:
            heapq.heappush(heap, (-edge_gain(graph, e).gain, e, version[u], version[v]))
            continue
        commit_edge(graph, e)
        ds.union(u, v)
        selected.append(e)
        version[u] += 1
        version[v] += 1
        for node in (u, v):
            for e2 in incident[node]:
                if graph.committed[e2]:
                    continue
                a, b = int(graph.edge_u[e2]), int(graph.edge_v[e2])
                if ds.find(a) == ds.find(b):
                    continue
                heapq.heappush(heap, (-edge_gain(graph, e2).gain, e2, version[a], version[b]))
    return selected


def lazy_greedy_segment(graph: PixelGraph, k: int) -> LabelMap:
    """Segment down to k components with the sequential greedy."""
    selected = lazy_greedy_select(graph, k)
    ds = DisjointSet(graph.node_count)
    for e in selected:
        ds.union(int(graph.edge_u[e]), int(graph.edge_v[e]))
    shape = graph.shape if graph.shape is not None else (1, graph.node_count)
    return _labels_from_roots(ds.find_all(), shape)
