"""Louvain community detection on weighted undirected graphs."""

from __future__ import annotations

import random
from collections.abc import Mapping

from .graphs import Node, WeightedGraph

# Gains below this are treated as zero; guards against float cycling.
_GAIN_EPS = 1e-12


def modularity(graph: WeightedGraph, partition: Mapping[Node, int], resolution: float = 1.0) -> float:
    m = graph.total_weight()
    if m == 0:
        return 0.0
    internal: dict[int, float] = {}
    degree: dict[int, float] = {}
    for u, v, w in graph.edges():
        cu, cv = partition[u], partition[v]
        if cu == cv:
            internal[cu] = internal.get(cu, 0.0) + w
        degree[cu] = degree.get(cu, 0.0) + w
        degree[cv] = degree.get(cv, 0.0) + w
    q = 0.0
    for c, d in degree.items():
        q += internal.get(c, 0.0) / m - resolution * (d / (2 * m)) ** 2
    return q


def _one_level(adj: list[dict[int, float]], m2: float, resolution: float, rng: random.Random) -> tuple[list[int], bool]:
    """Local-move phase. ``adj`` is a symmetric matrix in dict-of-rows form."""
    n = len(adj)
    k = [sum(row.values()) for row in adj]
    com = list(range(n))
    tot = list(k)
    order = list(range(n))
    rng.shuffle(order)
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = com[i]
            ki = k[i]
            links: dict[int, float] = {}
            for j, w in adj[i].items():
                if j != i:
                    links[com[j]] = links.get(com[j], 0.0) + w
            tot[ci] -= ki
            best = ci
            best_gain = links.get(ci, 0.0) - resolution * tot[ci] * ki / m2
            for c, w in links.items():
                gain = w - resolution * tot[c] * ki / m2
                if gain > best_gain + _GAIN_EPS:
                    best, best_gain = c, gain
            tot[best] += ki
            if best != ci:
                com[i] = best
                improved = True
                moved_any = True
    return com, moved_any


def louvain(graph: WeightedGraph, resolution: float = 1.0, seed: int = 0) -> dict[Node, int]:
    """Partition nodes by greedy modularity optimisation (Blondel et al.).

    Node visit order at every level is a shuffle driven by ``seed``, so the
    result is reproducible. Community ids are 0..k-1, numbered by the first
    node (in graph order) that belongs to each community.
    """
    nodes = graph.nodes
    if not nodes:
        return {}
    idx = {n: i for i, n in enumerate(nodes)}
    adj: list[dict[int, float]] = [dict() for _ in nodes]
    for u, v, w in graph.edges():
        a, b = idx[u], idx[v]
        if a == b:
            # a self-loop adds twice its weight to the node degree
            adj[a][a] = adj[a].get(a, 0.0) + 2 * w
            continue
        adj[a][b] = adj[a].get(b, 0.0) + w
        adj[b][a] = adj[b].get(a, 0.0) + w
    m2 = sum(sum(row.values()) for row in adj)
    membership = list(range(len(nodes)))
    if m2 > 0:
        rng = random.Random(seed)
        while True:
            com, moved = _one_level(adj, m2, resolution, rng)
            if not moved:
                break
            relabel: dict[int, int] = {}
            for c in com:
                relabel.setdefault(c, len(relabel))
            membership = [relabel[com[c]] for c in membership]
            new_adj: list[dict[int, float]] = [dict() for _ in relabel]
            for i, row in enumerate(adj):
                ci = relabel[com[i]]
                for j, w in row.items():
                    cj = relabel[com[j]]
                    new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
            adj = new_adj
            if len(adj) == 1:
                break
    final: dict[int, int] = {}
    out = {}
    for n, c in zip(nodes, membership):
        out[n] = final.setdefault(c, len(final))
    return out
