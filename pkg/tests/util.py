"""Shared builders for graphs, GraphML bytes, and synthetic datasets."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from ppkg.graph import PolicyEdge, PolicyGraph, PolicyNode
from ppkg.layout import embedding_from_positions

OFFERUP_SENTENCE = (
    "OfferUp collects information that you provide directly to us when you "
    "sign up and use the OfferUp service including Information when you "
    "register or update the details of your account")


def make_graph(nodes, edges=()) -> PolicyGraph:
    """nodes: ids or (id, label, type) triples; edges: (src, dst) pairs or
    (src, dst, relationship, text) tuples. Edge ids are e0, e1, ..."""
    node_objs = []
    for spec in nodes:
        if isinstance(spec, str):
            spec = (spec, f"label {spec}", "DATA")
        nid, label, ntype = spec
        node_objs.append(PolicyNode(id=nid, label=label, node_type=ntype, attrs=()))
    edge_objs = []
    for i, spec in enumerate(edges):
        if len(spec) == 2:
            spec = (*spec, "SUBSUM", "")
        src, dst, rel, text = spec
        edge_objs.append(PolicyEdge(source=src, target=dst, relationship=rel,
                                    text=text, edge_id=f"e{i}", attrs=()))
    return PolicyGraph.build(tuple(node_objs), tuple(edge_objs))


def graphml_bytes(nodes, edges=()) -> bytes:
    """Render the same specs as GraphML with the standard key declarations."""
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '<key id="d0" for="node" attr.name="label" attr.type="string"/>',
        '<key id="d1" for="node" attr.name="type" attr.type="string"/>',
        '<key id="d2" for="edge" attr.name="relationship" attr.type="string"/>',
        '<key id="d3" for="edge" attr.name="text" attr.type="string"/>',
        '<graph edgedefault="directed">',
    ]
    for spec in nodes:
        if isinstance(spec, str):
            spec = (spec, f"label {spec}", "DATA")
        nid, label, ntype = spec
        parts.append(f'<node id="{escape(nid)}">'
                     f'<data key="d0">{escape(label)}</data>'
                     f'<data key="d1">{escape(ntype)}</data></node>')
    for i, spec in enumerate(edges):
        if len(spec) == 2:
            spec = (*spec, "SUBSUM", "")
        src, dst, rel, text = spec
        parts.append(f'<edge id="e{i}" source="{escape(src)}" target="{escape(dst)}">'
                     f'<data key="d2">{escape(rel)}</data>'
                     f'<data key="d3">{escape(text)}</data></edge>')
    parts.append("</graph></graphml>")
    return "\n".join(parts).encode("utf-8")


OFFERUP_NODES = (
    ("n0", "information you provide to we include", "DATA"),
    ("n1", "information you register", "DATA"),
    ("n2", "we", "ACTOR"),
)
OFFERUP_EDGES = (
    ("n0", "n1", "SUBSUM", OFFERUP_SENTENCE),
    ("n2", "n0", "COLLECT",
     "OfferUp collects information that you provide directly to us."),
)


def offerup_graph() -> PolicyGraph:
    return make_graph(OFFERUP_NODES, OFFERUP_EDGES)


def offerup_graphml() -> bytes:
    return graphml_bytes(OFFERUP_NODES, OFFERUP_EDGES)


def blob_dataset(seed: int = 12345, n_per: int = 50, d: int = 4,
                 sep: float = 40.0, std: float = 1.0):
    """Three Gaussian blobs with center separation sep = (sep/std) sigma."""
    rng = np.random.default_rng(seed)
    centers = np.zeros((3, d))
    centers[1, 0] = sep
    centers[2, 1] = sep
    points = np.vstack([rng.normal(c, std, size=(n_per, d)) for c in centers])
    labels = np.repeat([0, 1, 2], n_per)
    return points, labels


def as_embedding(points: np.ndarray):
    """Wrap a (n, d) array as an EmbeddingMatrix with ids p0, p1, ..."""
    order = [f"p{i}" for i in range(len(points))]
    return embedding_from_positions(
        {nid: points[i] for i, nid in enumerate(order)}, order)


def rings_dataset(n_per: int = 100, radii=(1.0, 5.0)):
    """Two concentric rings of evenly spaced points."""
    points = []
    labels = []
    for ci, r in enumerate(radii):
        angles = np.linspace(0.0, 2.0 * np.pi, n_per, endpoint=False)
        points.append(np.c_[r * np.cos(angles), r * np.sin(angles)])
        labels.extend([ci] * n_per)
    return np.vstack(points), np.asarray(labels)


def random_policy_graphml(seed: int, n_nodes: int, n_edges: int) -> bytes:
    """Synthetic policy-flavored GraphML for scale and corpus tests."""
    rng = np.random.default_rng(seed)
    words = ["data", "email", "address", "location", "device", "identifier",
             "account", "advertising", "cookie", "usage", "activity",
             "contact", "phone", "profile", "payment", "history", "browser",
             "network", "analytics", "tracking"]
    nodes = []
    for i in range(n_nodes):
        label = " ".join(rng.choice(words, size=3))
        ntype = "DATA" if rng.random() < 0.8 else "ACTOR"
        nodes.append((f"n{i}", label, ntype))
    edges = []
    for _ in range(n_edges):
        src = int(rng.integers(n_nodes))
        dst = int(rng.integers(n_nodes))
        text = "we collect " + " ".join(rng.choice(words, size=8))
        rel = "COLLECT" if rng.random() < 0.5 else "SUBSUM"
        edges.append((f"n{src}", f"n{dst}", rel, text))
    return graphml_bytes(nodes, edges)
