"""Privacy-policy knowledge graph model: GraphML parsing, degrees, JSON export.

A policy graph is a directed labeled graph. Nodes carry an entity phrase
(``label``) and an open-vocabulary type tag (known values include ``DATA``
and ``ACTOR``); edges carry a relationship tag (known values include
``COLLECT`` and ``SUBSUM``) plus the originating policy sentence. Graphs are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import DanglingEdge, DuplicateNodeId, MalformedXml

# Known attribute vocabularies (open sets; unknown tags are preserved verbatim).
NODE_TYPE_DATA = "DATA"
NODE_TYPE_ACTOR = "ACTOR"
REL_COLLECT = "COLLECT"
REL_SUBSUM = "SUBSUM"

# Bucket count used when exporting degree color buckets for the explorer.
DEFAULT_COLOR_BUCKETS = 8

_GRAPHML_NS = "{http://graphml.graphdrawing.org/xmlns}"


@dataclass(frozen=True)
class PolicyNode:
    id: str
    label: str = ""
    node_type: str = ""
    attrs: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class PolicyEdge:
    source: str
    target: str
    relationship: str = ""
    text: str = ""
    edge_id: str = ""
    attrs: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class PolicyGraph:
    """Immutable policy graph; node sequence order is the canonical row order
    for every embedding derived from it."""

    nodes: tuple[PolicyNode, ...]
    edges: tuple[PolicyEdge, ...]
    node_index: Mapping[str, int] = field(compare=False, default_factory=dict)

    @staticmethod
    def build(nodes: Iterable[PolicyNode], edges: Iterable[PolicyEdge]) -> "PolicyGraph":
        nodes = tuple(nodes)
        edges = tuple(edges)
        index: dict[str, int] = {}
        for pos, node in enumerate(nodes):
            if not node.id:
                raise DuplicateNodeId("empty node id")
            if node.id in index:
                raise DuplicateNodeId(f"duplicate node id {node.id!r}")
            index[node.id] = pos
        seen_edge_ids: set[str] = set()
        for edge in edges:
            if edge.source not in index:
                raise DanglingEdge(f"edge {edge.edge_id!r} references unknown source {edge.source!r}")
            if edge.target not in index:
                raise DanglingEdge(f"edge {edge.edge_id!r} references unknown target {edge.target!r}")
            if edge.edge_id:
                if edge.edge_id in seen_edge_ids:
                    raise DuplicateNodeId(f"duplicate edge id {edge.edge_id!r}")
                seen_edge_ids.add(edge.edge_id)
        return PolicyGraph(nodes, edges, index)

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def node(self, node_id: str) -> PolicyNode:
        return self.nodes[self.node_index[node_id]]

    def incident_edges(self, node_id: str) -> tuple[PolicyEdge, ...]:
        return tuple(e for e in self.edges if e.source == node_id or e.target == node_id)


@dataclass(frozen=True)
class DegreeSummary:
    """Total (in + out) degree per node; a self-loop counts 2."""

    degrees: Mapping[str, int]
    max_degree: int


def _strip_ns(tag: str) -> str:
    return tag[len(_GRAPHML_NS):] if tag.startswith(_GRAPHML_NS) else tag


def _collect_data(element: ET.Element, key_names: Mapping[str, str]) -> dict[str, str]:
    """Gather <data> children as {attribute name: text}.

    Key references are resolved through declared <key> elements when present;
    a data element whose key attribute matches no declaration is kept under
    the raw key string so nothing is dropped.
    """
    out: dict[str, str] = {}
    for child in element:
        if _strip_ns(child.tag) != "data":
            continue
        key = child.get("key", "")
        name = key_names.get(key, key)
        out[name] = child.text or ""
    return out


def parse_graphml(data: bytes) -> PolicyGraph:
    """Parse GraphML bytes into a PolicyGraph, preserving document order.

    Attribute keys are resolved case-sensitively by GraphML key name
    ("label", "type", "relationship", "text"); any other declared attribute
    is retained in the node/edge ``attrs`` mapping but not interpreted.
    Missing optional attributes default to the empty string.

    Raises MalformedXml for unparseable input, DuplicateNodeId for repeated
    node ids, and DanglingEdge when an edge references an undeclared node
    (undeclared endpoints are an error, never silently created).
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    key_names: dict[str, str] = {}
    for key_el in root.iter():
        if _strip_ns(key_el.tag) == "key":
            key_id = key_el.get("id")
            attr_name = key_el.get("attr.name")
            if key_id and attr_name:
                key_names[key_id] = attr_name

    nodes: list[PolicyNode] = []
    edges: list[PolicyEdge] = []
    for element in root.iter():
        tag = _strip_ns(element.tag)
        if tag == "node":
            node_id = element.get("id")
            if not node_id:
                raise MalformedXml("node element without id attribute")
            values = _collect_data(element, key_names)
            extra = tuple(sorted((k, v) for k, v in values.items() if k not in ("label", "type")))
            nodes.append(PolicyNode(
                id=node_id,
                label=values.get("label", ""),
                node_type=values.get("type", ""),
                attrs=extra,
            ))
        elif tag == "edge":
            source = element.get("source")
            target = element.get("target")
            if source is None or target is None:
                raise MalformedXml("edge element without source/target")
            values = _collect_data(element, key_names)
            extra = tuple(sorted(
                (k, v) for k, v in values.items() if k not in ("relationship", "text", "id")
            ))
            edges.append(PolicyEdge(
                source=source,
                target=target,
                relationship=values.get("relationship", ""),
                text=values.get("text", ""),
                edge_id=element.get("id") or values.get("id", ""),
                attrs=extra,
            ))
    return PolicyGraph.build(nodes, edges)


def degree_summary(g: PolicyGraph) -> DegreeSummary:
    """Total undirected degree per node (self-loops count both endpoints)."""
    degrees = {node.id: 0 for node in g.nodes}
    for edge in g.edges:
        degrees[edge.source] += 1
        degrees[edge.target] += 1
    max_degree = max(degrees.values(), default=0)
    return DegreeSummary(degrees=degrees, max_degree=max_degree)


def degree_color_bucket(degree: int, max_degree: int, n_buckets: int) -> int:
    """Map a degree onto one of ``n_buckets`` color buckets.

    bucket = floor(n_buckets * degree / (max_degree + 1)); monotone in degree
    and always within [0, n_buckets).
    """
    if degree < 0 or max_degree < 0 or n_buckets < 1:
        raise ValueError("degree and max_degree must be >= 0, n_buckets >= 1")
    if degree > max_degree:
        raise ValueError("degree exceeds max_degree")
    return (n_buckets * degree) // (max_degree + 1)


def export_graph_json(g: PolicyGraph, degrees: DegreeSummary,
                      n_buckets: int = DEFAULT_COLOR_BUCKETS) -> bytes:
    """Serialize a graph (plus degree coloring) to the explorer JSON schema.

    Deterministic bytes: stable key order, UTF-8, newline-terminated. The
    document round-trips through :func:`parse_graph_json`.
    """
    doc = {
        "nodes": [
            {
                "id": node.id,
                "label": node.label,
                "type": node.node_type,
                "degree": degrees.degrees.get(node.id, 0),
                "color_bucket": degree_color_bucket(
                    degrees.degrees.get(node.id, 0), degrees.max_degree, n_buckets),
            }
            for node in g.nodes
        ],
        "edges": [
            {
                "source": edge.source,
                "target": edge.target,
                "relationship": edge.relationship,
                "text": edge.text,
                "id": edge.edge_id,
            }
            for edge in g.edges
        ],
    }
    return (json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8")


def parse_graph_json(data: bytes) -> PolicyGraph:
    """Inverse of :func:`export_graph_json` (degree fields are recomputable)."""
    doc = json.loads(data)
    nodes = [
        PolicyNode(id=n["id"], label=n.get("label", ""), node_type=n.get("type", ""))
        for n in doc.get("nodes", [])
    ]
    edges = [
        PolicyEdge(
            source=e["source"], target=e["target"],
            relationship=e.get("relationship", ""), text=e.get("text", ""),
            edge_id=e.get("id", ""),
        )
        for e in doc.get("edges", [])
    ]
    return PolicyGraph.build(nodes, edges)
