from __future__ import annotations

import numpy as np
from scipy import sparse

from .components import connected_components
from .graphs import Node, WeightedGraph


class ConvergenceError(RuntimeError):
    pass


def eigenvector_centrality(graph: WeightedGraph, tol: float = 1e-9, max_iter: int = 1000) -> dict[Node, float]:
    """Principal eigenvector of the weighted adjacency, L2-normalised.

    Power iteration runs on the largest connected component (first found on
    size ties); every other node scores 0. Iterating with ``A + I`` keeps
    the same eigenvectors but avoids oscillation on bipartite graphs such as
    stars. An edgeless graph scores 0 everywhere.
    """
    nodes = graph.nodes
    if not nodes:
        raise ValueError("eigenvector centrality of an empty graph")
    scores = {n: 0.0 for n in nodes}
    if graph.number_of_edges() == 0:
        return scores
    comps = connected_components(graph)
    largest = max(comps, key=len)
    members = [n for n in nodes if n in largest]
    idx = {n: i for i, n in enumerate(members)}
    rows, cols, vals = [], [], []
    for u, v, w in graph.edges():
        if u in idx:
            rows += [idx[u], idx[v]]
            cols += [idx[v], idx[u]]
            vals += [w, w] if u != v else [w, 0.0]
    n = len(members)
    mat = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n)) + sparse.identity(n, format="csr")
    x = np.full(n, 1.0 / np.sqrt(n))
    delta = float("inf")
    for _ in range(max_iter):
        nxt = mat @ x
        nxt /= np.linalg.norm(nxt)
        delta = float(np.linalg.norm(nxt - x))
        x = nxt
        if delta < tol:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations (last delta {delta:.3e})")
    for n_, i in idx.items():
        scores[n_] = float(x[i])
    return scores
