"""Graph serialisation: CSV edge lists and GEXF 1.2."""

from __future__ import annotations

import csv
import io
import math
import xml.etree.ElementTree as ET
from collections.abc import Mapping
from pathlib import Path

from .._io import atomic_write_text
from .graphs import WeightedDigraph, WeightedGraph

GEXF_NS = "http://gexf.net/1.2"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if value.is_integer() and math.isfinite(value):
            return str(int(value))
        return repr(value)
    return str(value)


def edge_list_csv(graph: WeightedGraph | WeightedDigraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "target", "weight"])
    for u, v, w in graph.edges():
        writer.writerow([u, v, _fmt(w)])
    return buf.getvalue()


def write_edge_csv(graph: WeightedGraph | WeightedDigraph, path: str | Path) -> None:
    atomic_write_text(path, edge_list_csv(graph))


def _attr_type(values) -> str:
    kinds = {type(v) for v in values if v is not None}
    if kinds <= {bool} and kinds:
        return "boolean"
    if kinds <= {int} and kinds:
        return "integer"
    if kinds <= {int, float} and kinds:
        return "double"
    return "string"


def gexf_document(graph: WeightedGraph | WeightedDigraph, node_attributes: list[str] | None = None,
                  labels: Mapping | None = None) -> str:
    """Render a GEXF 1.2 document carrying the named node attributes.

    Attributes are taken from ``graph.node_attrs``; their GEXF types are
    inferred from the values present.
    """
    if node_attributes is None:
        seen: dict[str, None] = {}
        for attrs in graph.node_attrs.values():
            seen.update(dict.fromkeys(attrs))
        node_attributes = list(seen)
    root = ET.Element("gexf", {"xmlns": GEXF_NS, "version": "1.2"})
    ET.SubElement(root, "meta").append(_text("creator", "coordscope"))
    g = ET.SubElement(root, "graph", {
        "mode": "static",
        "defaultedgetype": "directed" if graph.directed else "undirected",
    })
    if node_attributes:
        decl = ET.SubElement(g, "attributes", {"class": "node", "mode": "static"})
        for i, name in enumerate(node_attributes):
            typ = _attr_type(a.get(name) for a in graph.node_attrs.values())
            ET.SubElement(decl, "attribute", {"id": str(i), "title": name, "type": typ})
    nodes_el = ET.SubElement(g, "nodes")
    for node, attrs in graph.node_attrs.items():
        label = labels.get(node, node) if labels else node
        n_el = ET.SubElement(nodes_el, "node", {"id": str(node), "label": str(label)})
        present = [(i, name) for i, name in enumerate(node_attributes) if attrs.get(name) is not None]
        if present:
            vals = ET.SubElement(n_el, "attvalues")
            for i, name in present:
                ET.SubElement(vals, "attvalue", {"for": str(i), "value": _fmt(attrs[name])})
    edges_el = ET.SubElement(g, "edges")
    for k, (u, v, w) in enumerate(graph.edges()):
        ET.SubElement(edges_el, "edge", {"id": str(k), "source": str(u), "target": str(v), "weight": _fmt(float(w))})
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _text(tag: str, text: str) -> ET.Element:
    el = ET.Element(tag)
    el.text = text
    return el


def write_gexf(graph: WeightedGraph | WeightedDigraph, path: str | Path,
               node_attributes: list[str] | None = None, labels: Mapping | None = None) -> None:
    atomic_write_text(path, gexf_document(graph, node_attributes, labels))


def write_newick(dendrogram, path: str | Path, precision: int = 6) -> None:
    atomic_write_text(path, dendrogram.to_newick(precision) + "\n")
