"""Force-directed node embedding (Fruchterman-Reingold spring layout).

Positions every node of a policy graph in d-dimensional space by balancing
pairwise repulsion against edge attraction. The resulting matrix is the
embedding consumed by the dimensionality-reduction stage; its row order is
locked to the graph's node sequence.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyGraph, MissingNode, RaggedDimensions
from .graph import PolicyGraph

# Initial temperature as a fraction of the unit frame width.
_INITIAL_TEMPERATURE = 0.1
_MIN_DISTANCE = 1e-9


@dataclass(frozen=True)
class LayoutParams:
    seed: int
    dim: int = 2
    iterations: int = 50
    optimal_distance: float | None = None  # None = sqrt(1/n)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.optimal_distance is not None and self.optimal_distance <= 0:
            raise ValueError("optimal_distance must be positive")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """n x d coordinate matrix; row i belongs to node_order[i]."""

    data: np.ndarray
    node_order: tuple[str, ...]

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[0] != len(self.node_order):
            raise ValueError("data must be (len(node_order), d)")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("embedding entries must be finite")

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    @property
    def n(self) -> int:
        return int(self.data.shape[0])


def spring_layout(g: PolicyGraph, p: LayoutParams, rescale: bool = True) -> EmbeddingMatrix:
    """Fruchterman-Reingold layout of ``g``, deterministic given (g, p).

    The directed graph is treated as undirected with uniform edge weight 1.
    With k the optimal distance (default sqrt(1/n)), each node pair repels
    with force k^2/dist and each edge attracts with dist^2/k. Per-node
    displacement is capped by a temperature that decays linearly from 0.1 of
    the unit frame width to ~0 over ``iterations`` steps. Initial positions
    are drawn uniformly from [0,1)^d using ``p.seed``.

    When ``rescale`` is true (the default) the final coordinates are mapped
    axis-by-axis onto [-1, 1]; degenerate axes (zero span) collapse to 0.
    Pass ``rescale=False`` to inspect the raw converged positions, e.g. for
    force-balance checks.
    """
    n = len(g.nodes)
    if n == 0:
        raise EmptyGraph("spring_layout requires a non-empty graph")

    rng = np.random.default_rng(p.seed)
    pos = rng.random((n, p.dim))
    if n == 1:
        return EmbeddingMatrix(np.zeros((1, p.dim)), g.node_ids)

    k = p.optimal_distance if p.optimal_distance is not None else math.sqrt(1.0 / n)
    sources = np.array([g.node_index[e.source] for e in g.edges], dtype=np.intp)
    targets = np.array([g.node_index[e.target] for e in g.edges], dtype=np.intp)

    t = _INITIAL_TEMPERATURE
    dt = t / (p.iterations + 1)
    for _ in range(p.iterations):
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt(np.sum(delta * delta, axis=-1))
        np.clip(dist, _MIN_DISTANCE, None, out=dist)
        np.fill_diagonal(dist, np.inf)
        # repulsion k^2/d between all pairs, applied along the unit vector
        disp = np.einsum("ijd,ij->id", delta, (k * k) / (dist * dist))
        if len(sources):
            edelta = pos[sources] - pos[targets]
            edist = np.sqrt(np.sum(edelta * edelta, axis=-1))
            np.clip(edist, _MIN_DISTANCE, None, out=edist)
            pull = edelta * (edist / k)[:, None]
            np.subtract.at(disp, sources, pull)
            np.add.at(disp, targets, pull)
        length = np.sqrt(np.sum(disp * disp, axis=-1))
        np.clip(length, _MIN_DISTANCE, None, out=length)
        pos = pos + disp * (np.minimum(length, t) / length)[:, None]
        t -= dt

    if rescale:
        lo = pos.min(axis=0)
        hi = pos.max(axis=0)
        span = hi - lo
        scaled = np.zeros_like(pos)
        ok = span > 0
        scaled[:, ok] = 2.0 * (pos[:, ok] - lo[ok]) / span[ok] - 1.0
        pos = scaled
    return EmbeddingMatrix(pos, g.node_ids)


def embedding_from_positions(positions: Mapping[str, Sequence[float]],
                             order: Sequence[str]) -> EmbeddingMatrix:
    """Assemble an EmbeddingMatrix whose rows follow ``order`` exactly."""
    dims = {len(v) for v in positions.values()}
    if len(dims) > 1:
        raise RaggedDimensions(f"position vectors have mixed lengths {sorted(dims)}")
    missing = [node_id for node_id in order if node_id not in positions]
    if missing:
        raise MissingNode(f"no position for node(s) {missing}")
    dim = dims.pop() if dims else 0
    data = np.zeros((len(order), dim), dtype=float)
    for i, node_id in enumerate(order):
        data[i] = np.asarray(positions[node_id], dtype=float)
    return EmbeddingMatrix(data, tuple(order))


def residual_forces(em: EmbeddingMatrix, g: PolicyGraph,
                    optimal_distance: float | None = None) -> np.ndarray:
    """Net spring force on every node at the given positions (n x d).

    Evaluates the same force model as :func:`spring_layout`; near a converged
    (un-rescaled) layout the row norms approach zero.
    """
    n = em.n
    k = optimal_distance if optimal_distance is not None else math.sqrt(1.0 / n)
    pos = em.data
    delta = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.sum(delta * delta, axis=-1))
    np.clip(dist, _MIN_DISTANCE, None, out=dist)
    np.fill_diagonal(dist, np.inf)
    force = np.einsum("ijd,ij->id", delta, (k * k) / (dist * dist))
    for e in g.edges:
        i, j = g.node_index[e.source], g.node_index[e.target]
        if i == j:
            continue
        edelta = pos[i] - pos[j]
        edist = max(float(np.linalg.norm(edelta)), _MIN_DISTANCE)
        pull = edelta * (edist / k)
        force[i] -= pull
        force[j] += pull
    return force


def write_embedding_csv(em: EmbeddingMatrix) -> bytes:
    """CSV persistence: header ``node_id,x0,...,x{d-1}``, rows in node order."""
    buf = io.StringIO()
    buf.write("node_id," + ",".join(f"x{i}" for i in range(em.dim)) + "\n")
    for node_id, row in zip(em.node_order, em.data):
        buf.write(node_id + "," + ",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue().encode("utf-8")
