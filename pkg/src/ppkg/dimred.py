"""Dimensionality reduction of node embeddings: PCA, t-SNE, and UMAP.

All three methods preserve the source node order row-for-row and are
bit-deterministic given (input, params, seed): exact O(n^2) neighbor and
gradient computations, fixed summation order, and a counter-based generator
for UMAP's negative sampling. Corpus policy graphs are small (hundreds of
nodes), so no approximate variants are provided.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np
from scipy.optimize import curve_fit

from .errors import DegenerateInput, TooFewPoints
from .layout import EmbeddingMatrix

logger = logging.getLogger(__name__)

_EPS = 1e-12

PCA_METHOD = "PCA"
TSNE_METHOD = "TSNE"
UMAP_METHOD = "UMAP"


@dataclass(frozen=True)
class TsneParams:
    seed: int
    perplexity: float = 30.0
    learning_rate: float = 200.0
    n_iter: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250  # momentum also switches 0.5 -> 0.8 here

    def __post_init__(self):
        if self.perplexity <= 0 or self.learning_rate <= 0 or self.early_exaggeration <= 0:
            raise ValueError("perplexity, learning_rate, early_exaggeration must be positive")
        if self.n_iter < 250:
            raise ValueError("n_iter must be >= 250")


@dataclass(frozen=True)
class UmapParams:
    seed: int
    n_neighbors: int = 15
    min_dist: float = 0.1
    n_epochs: int = 500

    def __post_init__(self):
        if self.n_neighbors < 2:
            raise ValueError("n_neighbors must be >= 2")
        if self.min_dist < 0:
            raise ValueError("min_dist must be >= 0")
        if self.n_epochs < 1:
            raise ValueError("n_epochs must be >= 1")


@dataclass(frozen=True)
class Projection:
    """Low-dimensional coordinates; row order identical to the source embedding."""

    data: np.ndarray
    method: str
    params: Mapping[str, object]
    node_order: tuple[str, ...]
    loss_trace: tuple[float, ...] | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.data)):
            raise ValueError("projection entries must be finite")


class CalibrationResult(NamedTuple):
    beta: float
    converged: bool


def _pairwise_sq_distances(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def pca(x: EmbeddingMatrix, out_dim: int) -> tuple[Projection, np.ndarray]:
    """Project onto the top principal components of the sample covariance.

    Components are the eigenvectors of cov(X) with eigenvalues descending
    (1/(n-1) normalization); each component's sign is fixed by making its
    largest-magnitude loading positive. Returns the projection together with
    the per-component explained variances.
    """
    n, d = x.data.shape
    if n < 2:
        raise DegenerateInput("pca requires at least 2 points")
    if out_dim < 1 or out_dim > min(n, d):
        raise ValueError(f"out_dim must be in [1, {min(n, d)}]")
    centered = x.data - x.data.mean(axis=0)
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:out_dim]
    for row in components:
        anchor = int(np.argmax(np.abs(row)))
        if row[anchor] < 0:
            row *= -1.0
    explained = (singular[:out_dim] ** 2) / (n - 1)
    proj = Projection(
        data=centered @ components.T,
        method=PCA_METHOD,
        params={"out_dim": out_dim},
        node_order=x.node_order,
    )
    return proj, explained


def _entropy_and_probs(sq_row: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    # shift for numerical stability; entropy in nats
    logits = -beta * (sq_row - sq_row.min())
    p = np.exp(logits)
    total = p.sum()
    p /= total
    nonzero = p > 0
    entropy = -float(np.sum(p[nonzero] * np.log(p[nonzero])))
    return entropy, p


def perplexity_calibration(distances_row: np.ndarray,
                           target_perplexity: float) -> CalibrationResult:
    """Solve for the precision beta with perplexity(p(.|i)) = target.

    p(j|i) is proportional to exp(-beta * d_ij^2) over the given neighbor
    distances. Binary search (bracket expansion, then bisection, at most 50
    steps) until |2^H - target| <= 1e-5 * target. On non-convergence the
    best beta found is returned with ``converged=False``.
    """
    distances_row = np.asarray(distances_row, dtype=float)
    if distances_row.size < 2:
        raise ValueError("calibration needs at least 2 neighbor distances")
    sq = distances_row ** 2
    tol = 1e-5 * target_perplexity

    beta = 1.0
    beta_lo, beta_hi = 0.0, math.inf
    best = CalibrationResult(beta, False)
    best_err = math.inf
    for _ in range(50):
        entropy, _ = _entropy_and_probs(sq, beta)
        perp = math.exp(entropy)
        err = abs(perp - target_perplexity)
        if err < best_err:
            best, best_err = CalibrationResult(beta, False), err
        if err <= tol:
            return CalibrationResult(beta, True)
        if perp > target_perplexity:
            # too flat: sharpen
            beta_lo = beta
            beta = beta * 2.0 if beta_hi == math.inf else (beta + beta_hi) / 2.0
        else:
            beta_hi = beta
            beta = beta / 2.0 if beta_lo == 0.0 else (beta + beta_lo) / 2.0
    return best


def conditional_neighbor_probs(sq_distances: np.ndarray, perplexity: float) -> np.ndarray:
    """Row-calibrated conditional probabilities p(j|i) (zero diagonal)."""
    n = sq_distances.shape[0]
    cond = np.zeros((n, n))
    for i in range(n):
        others = np.delete(np.arange(n), i)
        row = np.sqrt(sq_distances[i, others])
        beta, converged = perplexity_calibration(row, perplexity)
        if not converged:
            logger.warning("perplexity calibration did not converge for row %d", i)
        _, p = _entropy_and_probs(sq_distances[i, others], beta)
        cond[i, others] = p
    return cond


def joint_neighbor_probs(sq_distances: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized affinities p_ij = (p(j|i) + p(i|j)) / (2n); sums to 1."""
    cond = conditional_neighbor_probs(sq_distances, perplexity)
    n = cond.shape[0]
    return (cond + cond.T) / (2.0 * n)


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(P||Q) over off-diagonal entries, with floors against log(0)."""
    pf = np.maximum(p, _EPS)
    qf = np.maximum(q, _EPS)
    mask = ~np.eye(p.shape[0], dtype=bool)
    return float(np.sum(p[mask] * np.log(pf[mask] / qf[mask])))


def effective_perplexity(requested: float, n: int) -> float:
    """Auto-clamp the perplexity to (n-1)/3; tiny policies carry a warning."""
    cap = (n - 1) / 3.0
    if requested > cap:
        logger.warning("perplexity %.3g clamped to %.3g for n=%d", requested, cap, n)
        return cap
    return requested


def tsne(x: EmbeddingMatrix, p: TsneParams) -> Projection:
    """t-SNE projection to 2-D, deterministic given (x, p).

    High-dimensional affinities are perplexity-calibrated Gaussians,
    symmetrized to sum to 1; low-dimensional affinities use a Student-t
    kernel with one degree of freedom. Gradient descent on KL(P||Q) runs
    with early exaggeration (x ``early_exaggeration`` for the first 250
    iterations) and momentum 0.5 switching to 0.8 afterwards; the initial
    layout is Gaussian(0, 1e-4) from ``p.seed``. The KL value against the
    un-exaggerated P is recorded every 50 iterations in ``loss_trace``.
    """
    n = x.n
    if n < 5:
        raise TooFewPoints("tsne requires at least 5 points")
    perplexity = effective_perplexity(p.perplexity, n)

    sq = _pairwise_sq_distances(x.data)
    pm = joint_neighbor_probs(sq, perplexity)
    pm = np.maximum(pm, _EPS)

    rng = np.random.default_rng(p.seed)
    y = rng.standard_normal((n, 2)) * 1e-4
    update = np.zeros_like(y)
    gains = np.ones_like(y)
    trace: list[float] = []

    for it in range(p.n_iter):
        exaggerating = it < p.exaggeration_iters
        momentum = 0.5 if exaggerating else 0.8
        p_eff = pm * p.early_exaggeration if exaggerating else pm

        num = 1.0 / (1.0 + _pairwise_sq_distances(y))
        np.fill_diagonal(num, 0.0)
        q = num / num.sum()

        if it % 50 == 0 or it == p.n_iter - 1:
            trace.append(kl_divergence(pm, np.maximum(q, _EPS)))

        w = (p_eff - np.maximum(q, _EPS)) * num
        grad = 4.0 * (w.sum(axis=1)[:, None] * y - w @ y)
        # van der Maaten's adaptive gains keep the fixed learning rate stable
        agree = np.sign(grad) == np.sign(update)
        gains = np.where(agree, gains * 0.8, gains + 0.2)
        np.clip(gains, 0.01, None, out=gains)
        update = momentum * update - p.learning_rate * gains * grad
        y = y + update
        y = y - y.mean(axis=0)

    return Projection(
        data=y,
        method=TSNE_METHOD,
        params={
            "perplexity": perplexity,
            "learning_rate": p.learning_rate,
            "n_iter": p.n_iter,
            "early_exaggeration": p.early_exaggeration,
            "seed": p.seed,
        },
        node_order=x.node_order,
        loss_trace=tuple(trace),
    )


def smooth_bandwidth(neighbor_distances: np.ndarray, rho: float, target: float,
                     max_iter: int = 64, tol: float = 1e-5) -> float:
    """Binary-search sigma with sum_j exp(-max(0, d_j - rho)/sigma) = target."""
    shifted = np.maximum(neighbor_distances - rho, 0.0)
    lo, hi, mid = 0.0, math.inf, 1.0
    for _ in range(max_iter):
        total = float(np.sum(np.exp(-shifted / mid)))
        if abs(total - target) < tol:
            break
        if total > target:
            hi = mid
            mid = (lo + hi) / 2.0
        else:
            lo = mid
            mid = mid * 2.0 if hi == math.inf else (lo + hi) / 2.0
    return mid


def fit_embedding_curve(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Least-squares (a, b) for the low-dimensional kernel 1/(1 + a d^(2b)).

    The target is the standard piecewise reference curve: 1 inside
    ``min_dist``, exponential decay with the given spread outside.
    """
    def curve(d, a, b):
        return 1.0 / (1.0 + a * d ** (2.0 * b))

    xs = np.linspace(0.0, 3.0 * spread, 300)
    ys = np.where(xs < min_dist, 1.0, np.exp(-(xs - min_dist) / spread))
    (a, b), _ = curve_fit(curve, xs, ys)
    return float(a), float(b)


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 wraparound is intended
    with np.errstate(over="ignore"):
        x = (x + np.uint64(0x9E3779B97F4A7C15))
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))


def _negative_indices(seed: int, edge_ids: np.ndarray, epoch: int,
                      n_negatives: int, n: int) -> np.ndarray:
    """Counter-based draw of negative-sample indices, shape (len(edge_ids), n_negatives).

    Each (seed, edge, epoch, slot) tuple hashes to one index, so the sampling
    order is a pure function of the seed rather than of execution order.
    """
    slots = np.arange(n_negatives, dtype=np.uint64)
    counter = (edge_ids.astype(np.uint64)[:, None] * np.uint64(n_negatives)
               + slots[None, :])
    counter = counter + _mix64(np.uint64(epoch) + np.uint64(0x5851F42D4C957F2D))
    h = _mix64(counter ^ _mix64(np.asarray(seed, dtype=np.uint64)))
    return (h % np.uint64(n)).astype(np.intp)


_NEGATIVES_PER_POSITIVE = 5
_GRAD_CLIP = 4.0


def umap(x: EmbeddingMatrix, p: UmapParams) -> Projection:
    """UMAP projection to 2-D, deterministic given (x, p).

    Builds the exact Euclidean k-nearest-neighbor graph, calibrates each
    point's fuzzy membership (rho = nearest-neighbor distance, sigma solved
    so the local membership mass hits log2(k)), takes the fuzzy union
    a + b - ab, and optimizes the cross-entropy layout by per-epoch
    stochastic gradient steps with 5 negative samples per positive edge.
    Negative-sample order is derived from the seed with a counter-based
    hash, so runs are reproducible. Initialization is the PCA projection
    rescaled to [-10, 10].
    """
    n = x.n
    if n <= p.n_neighbors:
        if n < 3:
            raise TooFewPoints("umap requires at least 3 points")
        k = n - 1
        logger.warning("n_neighbors %d clamped to %d for n=%d", p.n_neighbors, k, n)
    else:
        k = p.n_neighbors

    sq = _pairwise_sq_distances(x.data)
    dist = np.sqrt(sq)
    order = np.argsort(dist, axis=1, kind="stable")
    # first column is the point itself (distance 0)
    neighbor_idx = np.empty((n, k), dtype=np.intp)
    for i in range(n):
        row = order[i][order[i] != i]
        neighbor_idx[i] = row[:k]
    neighbor_dist = np.take_along_axis(dist, neighbor_idx, axis=1)

    target = math.log2(k)
    memberships = np.zeros((n, n))
    for i in range(n):
        rho = float(neighbor_dist[i, 0])
        sigma = smooth_bandwidth(neighbor_dist[i], rho, target)
        weights = np.exp(-np.maximum(neighbor_dist[i] - rho, 0.0) / sigma)
        memberships[i, neighbor_idx[i]] = weights
    graph = memberships + memberships.T - memberships * memberships.T

    a, b = fit_embedding_curve(p.min_dist)

    init, _ = pca(x, out_dim=min(2, min(n, x.dim)))
    y = np.zeros((n, 2))
    y[:, : init.data.shape[1]] = init.data
    peak = np.abs(y).max()
    if peak > 0:
        y *= 10.0 / peak

    heads, tails = np.nonzero(np.triu(graph, k=1))
    weights = graph[heads, tails]
    if len(weights) == 0:
        return Projection(y, UMAP_METHOD, _umap_params_echo(p, k, a, b), x.node_order)
    epochs_per_sample = weights.max() / weights
    next_sample = epochs_per_sample.copy()
    edge_ids = np.arange(len(heads), dtype=np.uint64)

    for epoch in range(p.n_epochs):
        alpha = 1.0 - epoch / p.n_epochs
        active = np.nonzero(next_sample <= epoch + 1)[0]
        if len(active) == 0:
            continue
        hi, ti = heads[active], tails[active]
        delta = y[hi] - y[ti]
        d2 = np.sum(delta * delta, axis=1)
        pow_term = a * d2 ** b
        att = np.where(d2 > 0.0, (-2.0 * a * b * d2 ** (b - 1.0)) / (pow_term + 1.0), 0.0)
        grad = np.clip(att[:, None] * delta, -_GRAD_CLIP, _GRAD_CLIP) * alpha
        buf = np.zeros_like(y)
        np.add.at(buf, hi, grad)
        np.subtract.at(buf, ti, grad)

        negs = _negative_indices(p.seed, edge_ids[active], epoch, _NEGATIVES_PER_POSITIVE, n)
        for slot in range(_NEGATIVES_PER_POSITIVE):
            mi = negs[:, slot]
            keep = mi != hi
            delta_n = y[hi] - y[mi]
            d2n = np.sum(delta_n * delta_n, axis=1)
            rep = (2.0 * b) / ((0.001 + d2n) * (a * d2n ** b + 1.0))
            grad_n = np.clip(rep[:, None] * delta_n, -_GRAD_CLIP, _GRAD_CLIP)
            grad_n[d2n == 0.0] = _GRAD_CLIP
            grad_n[~keep] = 0.0
            np.add.at(buf, hi, grad_n * alpha)
        y = y + buf
        next_sample[active] += epochs_per_sample[active]

    return Projection(y, UMAP_METHOD, _umap_params_echo(p, k, a, b), x.node_order)


def _umap_params_echo(p: UmapParams, k: int, a: float, b: float) -> dict[str, object]:
    return {
        "n_neighbors": k,
        "min_dist": p.min_dist,
        "n_epochs": p.n_epochs,
        "seed": p.seed,
        "curve_a": a,
        "curve_b": b,
    }


def write_projection_csv(proj: Projection) -> bytes:
    """CSV persistence: ``node_id,x,y`` rows in node order."""
    lines = ["node_id,x,y"]
    for node_id, row in zip(proj.node_order, proj.data):
        lines.append(f"{node_id},{float(row[0])!r},{float(row[1])!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")
