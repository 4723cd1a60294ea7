"""Weighted graph containers.

Both containers keep node insertion order, which every algorithm in this
package uses as its canonical iteration order. Edges are unique per node
pair; repeated ``add_edge`` calls accumulate weight.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Iterator

Node = Hashable


class _BaseGraph:
    directed = False

    def __init__(self, allow_self_loops: bool = False):
        self.allow_self_loops = allow_self_loops
        self.node_attrs: dict[Node, dict] = {}
        self.attrs: dict = {}

    def add_node(self, node: Node, **attrs) -> None:
        if node not in self.node_attrs:
            self.node_attrs[node] = {}
            self._init_node(node)
        self.node_attrs[node].update(attrs)

    def add_nodes(self, nodes: Iterable[Node]) -> None:
        for n in nodes:
            self.add_node(n)

    @property
    def nodes(self) -> list[Node]:
        return list(self.node_attrs)

    def has_node(self, node: Node) -> bool:
        return node in self.node_attrs

    def __contains__(self, node: Node) -> bool:
        return node in self.node_attrs

    def __len__(self) -> int:
        return len(self.node_attrs)

    def number_of_nodes(self) -> int:
        return len(self.node_attrs)

    def _check(self, u, v, weight):
        if u == v and not self.allow_self_loops:
            raise ValueError(f"self-loop on {u!r} not allowed")
        if not weight > 0:
            raise ValueError(f"edge weight must be positive, got {weight!r}")

    def add_edge(self, u: Node, v: Node, weight: float = 1) -> None:
        """Add ``weight`` to edge (u, v), creating nodes and the edge as needed."""
        self._check(u, v, weight)
        self.add_node(u)
        self.add_node(v)
        self._set(u, v, self.weight(u, v) + weight)

    def set_edge(self, u: Node, v: Node, weight: float) -> None:
        self._check(u, v, weight)
        self.add_node(u)
        self.add_node(v)
        self._set(u, v, weight)

    def number_of_edges(self) -> int:
        return sum(1 for _ in self.edges())

    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges())


class WeightedDigraph(_BaseGraph):
    directed = True

    def __init__(self, allow_self_loops: bool = False):
        super().__init__(allow_self_loops)
        self._succ: dict[Node, dict[Node, float]] = {}
        self._pred: dict[Node, dict[Node, float]] = {}

    def _init_node(self, node):
        self._succ[node] = {}
        self._pred[node] = {}

    def _set(self, u, v, w):
        self._succ[u][v] = w
        self._pred[v][u] = w

    def weight(self, u: Node, v: Node, default: float = 0) -> float:
        return self._succ.get(u, {}).get(v, default)

    def has_edge(self, u: Node, v: Node) -> bool:
        return v in self._succ.get(u, ())

    def remove_edge(self, u: Node, v: Node) -> None:
        del self._succ[u][v]
        del self._pred[v][u]

    def remove_node(self, node: Node) -> None:
        for v in list(self._succ[node]):
            del self._pred[v][node]
        for u in list(self._pred[node]):
            del self._succ[u][node]
        del self._succ[node], self._pred[node], self.node_attrs[node]

    def successors(self, node: Node) -> dict[Node, float]:
        return self._succ[node]

    def predecessors(self, node: Node) -> dict[Node, float]:
        return self._pred[node]

    def neighbors(self, node: Node) -> list[Node]:
        seen = dict.fromkeys(self._succ[node])
        seen.update(dict.fromkeys(self._pred[node]))
        return list(seen)

    def in_degree(self, node: Node) -> int:
        return len(self._pred[node])

    def out_degree(self, node: Node) -> int:
        return len(self._succ[node])

    def in_weight(self, node: Node) -> float:
        return sum(self._pred[node].values())

    def edges(self) -> Iterator[tuple[Node, Node, float]]:
        for u, nbrs in self._succ.items():
            for v, w in nbrs.items():
                yield u, v, w

    def copy(self) -> WeightedDigraph:
        g = WeightedDigraph(self.allow_self_loops)
        for n, a in self.node_attrs.items():
            g.add_node(n, **a)
        for u, v, w in self.edges():
            g.set_edge(u, v, w)
        g.attrs = dict(self.attrs)
        return g


class WeightedGraph(_BaseGraph):
    def __init__(self, allow_self_loops: bool = False):
        super().__init__(allow_self_loops)
        self._adj: dict[Node, dict[Node, float]] = {}

    def _init_node(self, node):
        self._adj[node] = {}

    def _set(self, u, v, w):
        self._adj[u][v] = w
        self._adj[v][u] = w

    def weight(self, u: Node, v: Node, default: float = 0) -> float:
        return self._adj.get(u, {}).get(v, default)

    def has_edge(self, u: Node, v: Node) -> bool:
        return v in self._adj.get(u, ())

    def remove_edge(self, u: Node, v: Node) -> None:
        del self._adj[u][v]
        if u != v:
            del self._adj[v][u]

    def remove_node(self, node: Node) -> None:
        for v in list(self._adj[node]):
            if v != node:
                del self._adj[v][node]
        del self._adj[node], self.node_attrs[node]

    def neighbors(self, node: Node) -> dict[Node, float]:
        return self._adj[node]

    def degree(self, node: Node) -> int:
        return len(self._adj[node])

    def strength(self, node: Node) -> float:
        return sum(self._adj[node].values())

    def edges(self) -> Iterator[tuple[Node, Node, float]]:
        """Each unordered edge once, oriented by node insertion order."""
        pos = {n: i for i, n in enumerate(self.node_attrs)}
        for u, nbrs in self._adj.items():
            pu = pos[u]
            for v, w in nbrs.items():
                if pos[v] >= pu:
                    yield u, v, w

    def adjacency_matrix(self, order: list[Node] | None = None):
        import numpy as np

        order = self.nodes if order is None else order
        idx = {n: i for i, n in enumerate(order)}
        mat = np.zeros((len(order), len(order)))
        for u, v, w in self.edges():
            if u in idx and v in idx:
                mat[idx[u], idx[v]] = w
                mat[idx[v], idx[u]] = w
        return mat

    def subgraph(self, nodes: Iterable[Node]) -> WeightedGraph:
        keep = set(nodes)
        g = WeightedGraph(self.allow_self_loops)
        for n, a in self.node_attrs.items():
            if n in keep:
                g.add_node(n, **a)
        for u, v, w in self.edges():
            if u in keep and v in keep:
                g.set_edge(u, v, w)
        return g

    def copy(self) -> WeightedGraph:
        g = self.subgraph(self.node_attrs)
        g.attrs = dict(self.attrs)
        return g
