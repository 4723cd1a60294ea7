"""Agglomerative hierarchical clustering and Newick export."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

LINKAGES = ("average", "single", "complete")
METRICS = ("euclidean", "cityblock", "cosine", "precomputed")


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """Binary merge tree in the usual linkage numbering.

    Leaves are ``0..n-1`` (in ``labels`` order); merge ``k`` creates
    cluster ``n + k``.
    """

    labels: list[str]
    merges: list[Merge]

    @property
    def n_leaves(self) -> int:
        return len(self.labels)

    def linkage_matrix(self) -> np.ndarray:
        return np.array([[m.left, m.right, m.height, m.size] for m in self.merges], dtype=float)

    def leaves(self, cluster: int | None = None) -> list[str]:
        """Leaf labels under ``cluster`` (the root by default), left to right."""
        n = self.n_leaves
        if cluster is None:
            cluster = n + len(self.merges) - 1 if self.merges else 0
        out, stack = [], [cluster]
        while stack:
            c = stack.pop()
            if c < n:
                out.append(self.labels[c])
            else:
                m = self.merges[c - n]
                stack += [m.right, m.left]
        return out

    def merge_order(self) -> list[tuple[frozenset[str], frozenset[str], float]]:
        return [(frozenset(self.leaves(m.left)), frozenset(self.leaves(m.right)), m.height) for m in self.merges]

    def height(self, cluster: int) -> float:
        return 0.0 if cluster < self.n_leaves else self.merges[cluster - self.n_leaves].height

    def to_newick(self, precision: int = 6) -> str:
        n = self.n_leaves
        if not self.merges:
            return f"{_newick_name(self.labels[0])};" if self.labels else ";"

        def fmt(x: float) -> str:
            s = f"{x:.{precision}f}".rstrip("0").rstrip(".")
            return s if s not in ("", "-0") else "0"

        def render(c: int, parent_height: float) -> str:
            if c < n:
                body = _newick_name(self.labels[c])
            else:
                m = self.merges[c - n]
                body = f"({render(m.left, m.height)},{render(m.right, m.height)})"
            return f"{body}:{fmt(parent_height - self.height(c))}"

        root = self.merges[-1]
        return f"({render(root.left, root.height)},{render(root.right, root.height)});"


def _newick_name(label: str) -> str:
    if any(ch in label for ch in " ():;,[]'\t\n"):
        return "'" + label.replace("'", "''") + "'"
    return label


def pairwise_distances(matrix: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    x = np.asarray(matrix, dtype=float)
    if metric == "precomputed":
        return x.copy()
    if metric == "euclidean":
        # explicit differences (not the Gram trick) keep identical rows at exactly 0
        diff = x[:, None, :] - x[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=2))
    if metric == "cityblock":
        return np.abs(x[:, None, :] - x[None, :, :]).sum(axis=2)
    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0):
            raise ValueError("cosine metric undefined for all-zero rows")
        sim = (x @ x.T) / np.outer(norms, norms)
        d = 1.0 - np.clip(sim, -1.0, 1.0)
        np.fill_diagonal(d, 0.0)
        return d
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def hierarchical_cluster(matrix, labels: Sequence[str] | None = None, linkage: str = "average",
                         metric: str = "euclidean") -> Dendrogram:
    """Naive O(n^3) agglomerative clustering over the rows of ``matrix``.

    At each step the closest pair of active clusters merges; among equal
    distances the lexicographically smallest (id, id) pair wins, which makes
    the tree independent of floating-point scan order.

    ``linkage`` is one of ``average`` (UPGMA), ``single`` or ``complete``;
    cluster distances are updated with the Lance-Williams formulas.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or (metric == "precomputed" and x.shape[0] != x.shape[1]):
        raise ValueError("expected a 2-D matrix")
    n = x.shape[0]
    if n < 2:
        raise ValueError("hierarchical clustering needs at least 2 items")
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    labels = [str(i) for i in range(n)] if labels is None else [str(l) for l in labels]
    if len(labels) != n:
        raise ValueError("labels length does not match matrix")
    if np.any(np.isnan(x)):
        raise ValueError("matrix contains NaN")

    base = pairwise_distances(x, metric)
    dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(base[i, j])
    size = {i: 1 for i in range(n)}
    active = list(range(n))
    merges: list[Merge] = []
    for step in range(n - 1):
        best_key, best_d = None, math.inf
        for key, d in dist.items():
            if d < best_d or (d == best_d and key < best_key):
                best_key, best_d = key, d
        a, b = best_key
        new = n + step
        na, nb = size[a], size[b]
        merges.append(Merge(a, b, best_d, na + nb))
        active.remove(a)
        active.remove(b)
        for c in active:
            da = dist.pop((min(a, c), max(a, c)))
            db = dist.pop((min(b, c), max(b, c)))
            if linkage == "average":
                dn = (na * da + nb * db) / (na + nb)
            elif linkage == "single":
                dn = min(da, db)
            else:
                dn = max(da, db)
            dist[(c, new)] = dn
        del dist[(a, b)]
        size[new] = na + nb
        active.append(new)
    return Dendrogram(labels, merges)
