from __future__ import annotations

from collections import deque

from .graphs import Node, WeightedDigraph, WeightedGraph


def connected_components(graph: WeightedGraph | WeightedDigraph) -> list[set[Node]]:
    """Connected components (weak for digraphs), in node-insertion discovery order.

    Isolated nodes come back as singleton sets.
    """
    seen: set[Node] = set()
    out: list[set[Node]] = []
    for start in graph.nodes:
        if start in seen:
            continue
        comp = {start}
        seen.add(start)
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for nbr in graph.neighbors(node):
                if nbr not in seen:
                    seen.add(nbr)
                    comp.add(nbr)
                    queue.append(nbr)
        out.append(comp)
    return out
