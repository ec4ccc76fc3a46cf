"""Clustering of 2-D projections, plus LDA topic clustering over policy text.

Six procedures: mini-batch K-Means, agglomerative (Lance-Williams),
DBSCAN, HDBSCAN, spectral, and LDA. Every tie-break (nearest centroid,
merge order, border assignment, argmax topic) is deterministic and
documented so that repeated runs with one seed are bit-identical. Labels
are canonicalized to 0..k_found-1 in order of first appearance; -1 marks
noise.
"""

from __future__ import annotations

import logging
import math
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numba
import numpy as np

from .errors import EmptyVocabulary, TooFewPoints
from .graph import PolicyGraph
from .layout import EmbeddingMatrix
from .dimred import Projection

logger = logging.getLogger(__name__)

MBKMEANS = "mbkmeans"
AGGLOMERATIVE = "agglomerative"
DBSCAN = "dbscan"
HDBSCAN = "hdbscan"
SPECTRAL = "spectral"
LDA = "lda"

# Row order used by report tables; DBSCAN sits outside the default grid.
CANONICAL_METHOD_ORDER = (MBKMEANS, AGGLOMERATIVE, DBSCAN, HDBSCAN, SPECTRAL, LDA)
DEFAULT_METHODS = (MBKMEANS, AGGLOMERATIVE, HDBSCAN, SPECTRAL, LDA)

NOISE = -1


@dataclass(frozen=True)
class ClusterParams:
    seed: int
    k: int = 5
    batch_size: int = 100
    linkage: str = "ward"
    eps: float = 0.5
    min_pts: int = 5
    min_cluster_size: int = 5
    min_samples: int | None = None  # None = min_cluster_size
    affinity: str = "rbf"
    gamma: float = 1.0
    knn_m: int = 10
    n_topics: int = 5
    alpha: float = 0.1
    beta: float = 0.01
    gibbs_iters: int = 1000

    def __post_init__(self):
        if min(self.k, self.batch_size, self.min_pts, self.min_cluster_size,
               self.n_topics, self.gibbs_iters, self.knn_m) < 1:
            raise ValueError("count parameters must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.linkage not in ("single", "complete", "average", "ward"):
            raise ValueError(f"unknown linkage {self.linkage!r}")
        if self.affinity not in ("rbf", "knn"):
            raise ValueError(f"unknown affinity {self.affinity!r}")


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-point labels aligned to the source node order; -1 = noise."""

    labels: tuple[int, ...]
    k_found: int
    method: str
    params: Mapping[str, object]

    def label_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)


def canonicalize_labels(labels: Iterable[int]) -> tuple[tuple[int, ...], int]:
    """Relabel non-noise clusters 0..k-1 by first appearance; noise stays -1."""
    mapping: dict[int, int] = {}
    out: list[int] = []
    for label in labels:
        label = int(label)
        if label == NOISE:
            out.append(NOISE)
            continue
        if label not in mapping:
            mapping[label] = len(mapping)
        out.append(mapping[label])
    return tuple(out), len(mapping)


def _as_points(y) -> np.ndarray:
    if isinstance(y, Projection):
        return np.asarray(y.data, dtype=float)
    if isinstance(y, EmbeddingMatrix):
        return np.asarray(y.data, dtype=float)
    return np.asarray(y, dtype=float)


def _sq_distance_matrix(points: np.ndarray) -> np.ndarray:
    sq = np.sum(points * points, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def _sq_to_centers(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return (np.sum(points * points, axis=1)[:, None]
            + np.sum(centers * centers, axis=1)[None, :]
            - 2.0 * points @ centers.T).clip(min=0.0)


# ---------------------------------------------------------------------------
# K-Means family


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    closest = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            draw = rng.random() * total
            idx = min(int(np.searchsorted(np.cumsum(closest), draw, side="right")), n - 1)
        centers[c] = points[idx]
        np.minimum(closest, np.sum((points - centers[c]) ** 2, axis=1), out=closest)
    return centers


@dataclass(frozen=True)
class LloydResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    inertia_trace: tuple[float, ...]


def lloyd_kmeans(points, k: int, seed: int, restarts: int = 1,
                 max_iter: int = 300, tol: float = 1e-10) -> LloydResult:
    """Full-batch Lloyd iteration with k-means++ seeding.

    Assignment ties go to the lowest centroid index; an emptied centroid is
    re-seeded on the point with the greatest distance to its assigned
    centroid (lowest index on ties). The best of ``restarts`` runs by final
    inertia is returned; per-iteration inertia is recorded and
    non-increasing.
    """
    points = _as_points(points)
    n = len(points)
    if n < k:
        raise TooFewPoints(f"{n} points for k={k}")
    rng = np.random.default_rng(seed)
    best: LloydResult | None = None
    for _ in range(restarts):
        centers = _kmeans_pp_init(points, k, rng)
        trace: list[float] = []
        labels = np.zeros(n, dtype=np.int64)
        for _ in range(max_iter):
            d2 = _sq_to_centers(points, centers)
            labels = np.argmin(d2, axis=1)
            trace.append(float(d2[np.arange(n), labels].sum()))
            new_centers = centers.copy()
            for c in range(k):
                mask = labels == c
                if mask.any():
                    new_centers[c] = points[mask].mean(axis=0)
                else:
                    new_centers[c] = points[int(np.argmax(d2[np.arange(n), labels]))]
            shift = float(np.max(np.sqrt(np.sum((new_centers - centers) ** 2, axis=1))))
            centers = new_centers
            if shift < tol:
                break
        d2 = _sq_to_centers(points, centers)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), labels].sum())
        trace.append(inertia)
        if best is None or inertia < best.inertia:
            best = LloydResult(labels, centers, inertia, tuple(trace))
    assert best is not None
    return best


def kmeans_inertia(points, labels: Sequence[int]) -> float:
    """Within-cluster sum of squared distances to per-cluster means."""
    points = _as_points(points)
    labels = np.asarray(labels)
    total = 0.0
    for c in np.unique(labels):
        if c == NOISE:
            continue
        cluster = points[labels == c]
        total += float(np.sum((cluster - cluster.mean(axis=0)) ** 2))
    return total


def minibatch_kmeans(y, p: ClusterParams) -> ClusterAssignment:
    """Mini-batch K-Means (per-centroid learning rate 1/count-seen).

    Each of up to 100 epochs draws one random batch of size
    min(batch_size, n), assigns it against the centroid snapshot, then
    applies the per-sample convex updates; stops early once the centroid
    drift falls below 1e-6. Final labels are nearest-centroid with ties to
    the lowest centroid index.
    """
    points = _as_points(y)
    n = len(points)
    if n < p.k:
        raise TooFewPoints(f"{n} points for k={p.k}")
    rng = np.random.default_rng(p.seed)
    centers = _kmeans_pp_init(points, p.k, rng)
    counts = np.zeros(p.k)
    batch_size = min(p.batch_size, n)
    for _ in range(100):
        previous = centers.copy()
        batch = rng.choice(n, size=batch_size, replace=False)
        assign = np.argmin(_sq_to_centers(points[batch], centers), axis=1)
        for idx, c in zip(batch, assign):
            counts[c] += 1
            eta = 1.0 / counts[c]
            centers[c] = (1.0 - eta) * centers[c] + eta * points[idx]
        drift = float(np.max(np.sqrt(np.sum((centers - previous) ** 2, axis=1))))
        if drift < 1e-6:
            break
    labels = np.argmin(_sq_to_centers(points, centers), axis=1)
    labels, k_found = canonicalize_labels(labels)
    return ClusterAssignment(labels, k_found, MBKMEANS,
                             {"k": p.k, "batch_size": p.batch_size, "seed": p.seed})


# ---------------------------------------------------------------------------
# Agglomerative (Lance-Williams)


def agglomerative(y, p: ClusterParams) -> ClusterAssignment:
    """Bottom-up merging under single/complete/average/ward linkage.

    Inter-cluster distances are maintained with Lance-Williams updates
    (squared Euclidean for ward). Ties merge the pair with the
    lexicographically smallest (min cluster id, max cluster id), cluster id
    being the smallest member index.
    """
    points = _as_points(y)
    n = len(points)
    if n < p.k:
        raise TooFewPoints(f"{n} points for k={p.k}")
    d2 = _sq_distance_matrix(points)
    work = d2 if p.linkage == "ward" else np.sqrt(d2)
    work = np.where(np.triu(np.ones((n, n), dtype=bool), k=1), work, np.inf)
    sizes = np.ones(n)
    membership = np.arange(n)
    indices = np.arange(n)

    def _pair_value(a: np.ndarray, b: int) -> np.ndarray:
        return np.where(a < b, work[a, b], work[b, a])

    for _ in range(n - p.k):
        flat = int(np.argmin(work))
        i, j = divmod(flat, n)
        dij = work[i, j]
        active = (membership == indices)
        ks = indices[active & (indices != i) & (indices != j)]
        dik = _pair_value(ks, i)
        djk = _pair_value(ks, j)
        if p.linkage == "single":
            merged = np.minimum(dik, djk)
        elif p.linkage == "complete":
            merged = np.maximum(dik, djk)
        elif p.linkage == "average":
            merged = (sizes[i] * dik + sizes[j] * djk) / (sizes[i] + sizes[j])
        else:  # ward, on squared distances
            total = sizes[i] + sizes[j] + sizes[ks]
            merged = ((sizes[i] + sizes[ks]) * dik + (sizes[j] + sizes[ks]) * djk
                      - sizes[ks] * dij) / total
        lo = np.minimum(ks, i)
        hi = np.maximum(ks, i)
        work[lo, hi] = merged
        work[j, :] = np.inf
        work[:, j] = np.inf
        sizes[i] += sizes[j]
        membership[membership == j] = i
    labels, k_found = canonicalize_labels(membership)
    return ClusterAssignment(labels, k_found, AGGLOMERATIVE,
                             {"k": p.k, "linkage": p.linkage})


# ---------------------------------------------------------------------------
# Density-based methods


def dbscan(y, p: ClusterParams) -> ClusterAssignment:
    """Core/border/noise DBSCAN with a documented determinism rule.

    A point is core when it has >= min_pts neighbors within eps, counting
    itself. Clusters grow from core points in ascending node-index order, so
    a border point reachable from several clusters joins the first one that
    reaches it in that scan order. Noise is -1.
    """
    points = _as_points(y)
    n = len(points)
    if n == 0:
        return ClusterAssignment((), 0, DBSCAN, {"eps": p.eps, "min_pts": p.min_pts})
    dist = np.sqrt(_sq_distance_matrix(points))
    within = dist <= p.eps
    core = within.sum(axis=1) >= p.min_pts
    labels = np.full(n, NOISE, dtype=np.int64)
    cluster = 0
    for i in range(n):
        if not core[i] or labels[i] != NOISE:
            continue
        labels[i] = cluster
        queue = deque([i])
        while queue:
            u = queue.popleft()
            if not core[u]:
                continue
            for v in np.nonzero(within[u])[0]:
                if labels[v] == NOISE:
                    labels[v] = cluster
                    queue.append(v)
        cluster += 1
    out, k_found = canonicalize_labels(labels)
    return ClusterAssignment(out, k_found, DBSCAN, {"eps": p.eps, "min_pts": p.min_pts})


def _prim_mst(weights: np.ndarray) -> list[tuple[float, int, int]]:
    """Deterministic Prim MST on a dense symmetric matrix (ties: lowest index)."""
    n = weights.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = weights[0].copy()
    best[0] = np.inf
    parent = np.zeros(n, dtype=np.intp)
    edges: list[tuple[float, int, int]] = []
    for _ in range(n - 1):
        v = int(np.argmin(best))
        edges.append((float(best[v]), int(parent[v]), v))
        in_tree[v] = True
        best[v] = np.inf
        improved = weights[v] < best
        improved[in_tree] = False
        parent[improved] = v
        best[improved] = weights[v][improved]
    return edges


def _single_linkage_merges(edges: list[tuple[float, int, int]],
                           n: int) -> list[tuple[int, int, float, int]]:
    """Union MST edges ascending into scipy-style merges (new ids n..2n-2)."""
    order = sorted(edges, key=lambda e: (e[0], min(e[1], e[2]), max(e[1], e[2])))
    parent = list(range(2 * n - 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    merges: list[tuple[int, int, float, int]] = []
    sizes = [1] * (2 * n - 1)
    next_id = n
    for w, u, v in order:
        ru, rv = find(u), find(v)
        size = sizes[ru] + sizes[rv]
        merges.append((min(ru, rv), max(ru, rv), w, size))
        parent[ru] = parent[rv] = next_id
        sizes[next_id] = size
        next_id += 1
    return merges


def _condense_tree(merges: list[tuple[int, int, float, int]], n: int,
                   min_cluster_size: int) -> list[tuple[int, int, float, int]]:
    """Condensed-tree rows (parent, child, lambda, child_size).

    Children below ``min_cluster_size`` fall out of their parent cluster
    point-by-point; splits into two large-enough children spawn new
    condensed clusters. Cluster ids start at n; lambda = 1/distance.
    """
    children: dict[int, tuple[int, int, float]] = {}
    subtree_size = [1] * (2 * n - 1)
    for idx, (left, right, dist, size) in enumerate(merges):
        node = n + idx
        children[node] = (left, right, dist)
        subtree_size[node] = size

    def leaves(node: int) -> list[int]:
        out: list[int] = []
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur < n:
                out.append(cur)
            else:
                left, right, _ = children[cur]
                stack.extend((right, left))
        return out

    root = 2 * n - 2
    rows: list[tuple[int, int, float, int]] = []
    relabel = {root: n}
    next_label = n + 1
    stack = [root]
    while stack:
        node = stack.pop()
        if node < n:
            continue
        left, right, dist = children[node]
        lam = 1.0 / max(dist, 1e-12)
        cluster = relabel[node]
        left_size = subtree_size[left] if left >= n else 1
        right_size = subtree_size[right] if right >= n else 1
        if left_size >= min_cluster_size and right_size >= min_cluster_size:
            for child, child_size in ((left, left_size), (right, right_size)):
                relabel[child] = next_label
                rows.append((cluster, next_label, lam, child_size))
                next_label += 1
            stack.extend((right, left))
        elif left_size < min_cluster_size and right_size < min_cluster_size:
            for point in leaves(left) + leaves(right):
                rows.append((cluster, point, lam, 1))
        elif left_size < min_cluster_size:
            for point in leaves(left):
                rows.append((cluster, point, lam, 1))
            relabel[right] = cluster
            stack.append(right)
        else:
            for point in leaves(right):
                rows.append((cluster, point, lam, 1))
            relabel[left] = cluster
            stack.append(left)
    return rows


def _select_excess_of_mass(rows: list[tuple[int, int, float, int]],
                           n: int) -> set[int]:
    """Stability-based cluster selection; the root cluster is never selected."""
    births: dict[int, float] = {n: 0.0}
    cluster_children: dict[int, list[int]] = {}
    for parent, child, lam, _ in rows:
        if child >= n:
            births[child] = lam
            cluster_children.setdefault(parent, []).append(child)
    stability: dict[int, float] = {c: 0.0 for c in births}
    for parent, child, lam, child_size in rows:
        stability[parent] += (lam - births[parent]) * child_size

    selected: dict[int, bool] = {}
    subtree: dict[int, float] = {}
    for cluster in sorted(births, reverse=True):
        kids = cluster_children.get(cluster, [])
        child_sum = sum(subtree[c] for c in kids)
        if cluster == n:
            selected[cluster] = False
            subtree[cluster] = max(stability[cluster], child_sum)
            continue
        if not kids:
            selected[cluster] = True
            subtree[cluster] = stability[cluster]
        elif stability[cluster] >= child_sum:
            selected[cluster] = True
            subtree[cluster] = stability[cluster]
            stack = list(kids)
            while stack:
                c = stack.pop()
                selected[c] = False
                stack.extend(cluster_children.get(c, []))
        else:
            selected[cluster] = False
            subtree[cluster] = child_sum
    return {c for c, on in selected.items() if on}


def hdbscan(y, p: ClusterParams) -> ClusterAssignment:
    """Hierarchical density clustering; the cluster count is data-driven.

    Mutual reachability distance uses the core distance at ``min_samples``
    (default min_cluster_size, counting the point itself); a minimum
    spanning tree over it gives the single-linkage hierarchy, condensed at
    ``min_cluster_size`` and selected by excess-of-mass stability. Points
    outside every selected cluster are noise (-1).
    """
    if p.min_cluster_size < 2:
        raise ValueError("min_cluster_size must be >= 2")
    points = _as_points(y)
    n = len(points)
    echo = {"min_cluster_size": p.min_cluster_size,
            "min_samples": p.min_samples or p.min_cluster_size}
    if n < 2 * p.min_cluster_size:
        return ClusterAssignment((NOISE,) * n, 0, HDBSCAN, echo)
    min_samples = min(p.min_samples or p.min_cluster_size, n)
    dist = np.sqrt(_sq_distance_matrix(points))
    core = np.sort(dist, axis=1)[:, min_samples - 1]
    mreach = np.maximum(np.maximum(core[:, None], core[None, :]), dist)
    np.fill_diagonal(mreach, 0.0)
    merges = _single_linkage_merges(_prim_mst(mreach), n)
    rows = _condense_tree(merges, n, p.min_cluster_size)
    selected = _select_excess_of_mass(rows, n)

    parent_of: dict[int, int] = {}
    fallout: dict[int, int] = {}
    for parent, child, _, _ in rows:
        if child >= n:
            parent_of[child] = parent
        else:
            fallout[child] = parent
    labels = np.full(n, NOISE, dtype=np.int64)
    for point in range(n):
        cluster: int | None = fallout.get(point, n)
        while cluster is not None and cluster not in selected:
            cluster = parent_of.get(cluster)
        if cluster is not None:
            labels[point] = cluster
    out, k_found = canonicalize_labels(labels)
    return ClusterAssignment(out, k_found, HDBSCAN, echo)


# ---------------------------------------------------------------------------
# Spectral


def spectral(y, p: ClusterParams) -> ClusterAssignment:
    """Normalized spectral clustering on an rbf or symmetrized kNN affinity.

    Embeds points in the bottom-k eigenvectors of
    L = I - D^{-1/2} W D^{-1/2} (rows L2-normalized) and clusters with
    full-batch Lloyd, 10 seeded restarts. An isolated vertex in the
    affinity graph gets a 1e-12 self-loop (logged) to keep degrees
    invertible.
    """
    points = _as_points(y)
    n = len(points)
    if n < p.k:
        raise TooFewPoints(f"{n} points for k={p.k}")
    d2 = _sq_distance_matrix(points)
    if p.affinity == "rbf":
        w = np.exp(-p.gamma * d2)
    else:
        m = min(p.knn_m, n - 1)
        dist = np.sqrt(d2)
        adjacency = np.zeros((n, n))
        order = np.argsort(dist, axis=1, kind="stable")
        for i in range(n):
            neighbors = order[i][order[i] != i][:m]
            adjacency[i, neighbors] = 1.0
        w = 0.5 * (adjacency + adjacency.T)
    degrees = w.sum(axis=1)
    isolated = degrees <= 0.0
    if isolated.any():
        logger.warning("%d isolated vertices in affinity graph; adding 1e-12 self-loops",
                       int(isolated.sum()))
        w[isolated, isolated] += 1e-12
        degrees = w.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    lap = np.eye(n) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    lap = (lap + lap.T) / 2.0
    _, vectors = np.linalg.eigh(lap)
    emb = vectors[:, : p.k].copy()
    norms = np.sqrt(np.sum(emb * emb, axis=1))
    emb /= np.maximum(norms, 1e-12)[:, None]
    result = lloyd_kmeans(emb, p.k, seed=p.seed, restarts=10)
    labels, k_found = canonicalize_labels(result.labels)
    return ClusterAssignment(labels, k_found, SPECTRAL,
                             {"k": p.k, "affinity": p.affinity,
                              "gamma": p.gamma, "knn_m": p.knn_m, "seed": p.seed})


def normalized_laplacian(w: np.ndarray) -> np.ndarray:
    """I - D^{-1/2} W D^{-1/2} for a symmetric non-negative affinity."""
    degrees = w.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(np.maximum(degrees, 1e-300))
    lap = np.eye(w.shape[0]) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    return (lap + lap.T) / 2.0


# ---------------------------------------------------------------------------
# LDA over policy text


_TOKEN_RE = re.compile(r"[a-z0-9]+")

STOP_WORDS = frozenset("""
a about above after again all also am an and any are as at be because been
before being below between both but by can could did do does doing down
during each few for from further had has have having he her here hers him
his how i if in into is it its itself just may me more most my no nor not
of off on once only or other our ours out over own same she should so some
such than that the their theirs them then there these they this those
through to too under until up very was we were what when where which while
who whom why will with would you your yours
""".split())


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens with stop-words removed."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in STOP_WORDS]


def node_documents(g: PolicyGraph) -> list[list[str]]:
    """One token document per node: its label plus the texts of incident edges."""
    docs = [tokenize(node.label) for node in g.nodes]
    for edge in g.edges:
        tokens = tokenize(edge.text)
        if not tokens:
            continue
        si = g.node_index[edge.source]
        ti = g.node_index[edge.target]
        docs[si] = docs[si] + tokens
        if ti != si:
            docs[ti] = docs[ti] + tokens
    return docs


@numba.njit(cache=True)
def _mix64_scalar(x):
    x = x + numba.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> numba.uint64(30))) * numba.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> numba.uint64(27))) * numba.uint64(0x94D049BB133111EB)
    return x ^ (x >> numba.uint64(31))


@numba.njit(cache=True)
def _uniform01(base, counter):
    h = _mix64_scalar(base ^ _mix64_scalar(counter))
    return (h >> numba.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _gibbs_sweeps(doc_of, word_of, z, n_dk, n_kw, n_k, alpha, beta, iters, seed):
    """Collapsed Gibbs sweeps; the topic draw u is a counter-based hash of
    (seed, sweep, token) so the chain is a pure function of the seed."""
    total_tokens = doc_of.shape[0]
    n_topics = n_dk.shape[1]
    vocab_size = n_kw.shape[1]
    cumulative = np.empty(n_topics)
    for sweep in range(iters):
        base = _mix64_scalar(numba.uint64(seed) ^ (numba.uint64(sweep) + numba.uint64(1)))
        for t in range(total_tokens):
            d = doc_of[t]
            w = word_of[t]
            old = z[t]
            n_dk[d, old] -= 1
            n_kw[old, w] -= 1
            n_k[old] -= 1
            running = 0.0
            for topic in range(n_topics):
                weight = ((n_dk[d, topic] + alpha)
                          * (n_kw[topic, w] + beta)
                          / (n_k[topic] + vocab_size * beta))
                running += weight
                cumulative[topic] = running
            u = _uniform01(base, numba.uint64(t)) * running
            new = 0
            while new < n_topics - 1 and cumulative[new] < u:
                new += 1
            z[t] = new
            n_dk[d, new] += 1
            n_kw[new, w] += 1
            n_k[new] += 1


@dataclass(frozen=True)
class LdaResult:
    assignment: ClusterAssignment
    doc_topic: np.ndarray   # rows sum to 1; columns follow canonical labels
    topic_word: np.ndarray  # same column/row permutation as doc_topic


def lda_cluster(docs: Sequence[Sequence[str]], p: ClusterParams) -> LdaResult:
    """Topic clustering of per-node token documents via collapsed Gibbs.

    After ``gibbs_iters`` sweeps, each node is labeled with the argmax of
    its document-topic distribution (ties to the lowest topic index); nodes
    with no tokens are noise (-1). Topic rows of the returned distributions
    are permuted to match the canonical label order, with never-assigned
    topics appended afterwards.
    """
    doc_of: list[int] = []
    word_of: list[int] = []
    vocab: dict[str, int] = {}
    for token in sorted({tok for doc in docs for tok in doc}):
        vocab[token] = len(vocab)
    if not vocab:
        raise EmptyVocabulary("no tokens in any document")
    for d, doc in enumerate(docs):
        for token in doc:
            doc_of.append(d)
            word_of.append(vocab[token])
    n_docs = len(docs)
    k = p.n_topics
    doc_of_arr = np.asarray(doc_of, dtype=np.int64)
    word_of_arr = np.asarray(word_of, dtype=np.int64)
    rng = np.random.default_rng(p.seed)
    z = rng.integers(k, size=len(doc_of_arr), dtype=np.int64)

    n_dk = np.zeros((n_docs, k), dtype=np.int64)
    n_kw = np.zeros((k, len(vocab)), dtype=np.int64)
    n_k = np.zeros(k, dtype=np.int64)
    for t in range(len(doc_of_arr)):
        n_dk[doc_of_arr[t], z[t]] += 1
        n_kw[z[t], word_of_arr[t]] += 1
        n_k[z[t]] += 1
    _gibbs_sweeps(doc_of_arr, word_of_arr, z, n_dk, n_kw, n_k,
                  float(p.alpha), float(p.beta), int(p.gibbs_iters), np.uint64(p.seed))

    doc_lengths = n_dk.sum(axis=1)
    theta = (n_dk + p.alpha) / (doc_lengths[:, None] + k * p.alpha)
    phi = (n_kw + p.beta) / (n_k[:, None] + len(vocab) * p.beta)

    raw = np.full(n_docs, NOISE, dtype=np.int64)
    nonempty = doc_lengths > 0
    raw[nonempty] = np.argmax(theta[nonempty], axis=1)
    labels, k_found = canonicalize_labels(raw)

    old_order: list[int] = []
    for old, new in sorted(
            {int(o): labels[i] for i, o in enumerate(raw) if o != NOISE}.items(),
            key=lambda kv: kv[1]):
        old_order.append(old)
    old_order.extend(t for t in range(k) if t not in old_order)
    theta = theta[:, old_order]
    theta[~nonempty] = 1.0 / k
    phi = phi[old_order]

    assignment = ClusterAssignment(labels, k_found, LDA,
                                   {"n_topics": k, "alpha": p.alpha, "beta": p.beta,
                                    "gibbs_iters": p.gibbs_iters, "seed": p.seed})
    return LdaResult(assignment, theta, phi)


# ---------------------------------------------------------------------------
# Cluster annotation


def annotate_clusters(assignment: ClusterAssignment, g: PolicyGraph,
                      top_n: int = 5) -> dict[int, list[str]]:
    """Top terms per cluster by TF-IDF over node-label tokens.

    Each non-noise cluster is one document of its member nodes' label
    tokens; idf = ln(#clusters / #clusters containing the term). Ties rank
    lexicographically. Noise points contribute nothing.
    """
    counts: dict[int, dict[str, int]] = {}
    for node, label in zip(g.nodes, assignment.labels):
        if label == NOISE:
            continue
        bag = counts.setdefault(label, {})
        for token in tokenize(node.label):
            bag[token] = bag.get(token, 0) + 1
    if not counts:
        return {}
    n_clusters = len(counts)
    df: dict[str, int] = {}
    for bag in counts.values():
        for token in bag:
            df[token] = df.get(token, 0) + 1
    annotations: dict[int, list[str]] = {}
    for cluster in sorted(counts):
        bag = counts[cluster]
        scored = sorted(
            ((tf * math.log(n_clusters / df[token]), token) for token, tf in bag.items()),
            key=lambda st: (-st[0], st[1]))
        annotations[cluster] = [token for _, token in scored[:top_n]]
    return annotations
