"""Cluster-validity metrics and the report grid built from them.

Silhouette and Davies-Bouldin are computed on the same 2-D projection the
clustering consumed. Noise points (-1) are excluded from both metrics and
reported as a noise fraction instead. The report grid is clustering rows
by DR columns, serialized as CSV in two stanzas (silhouette first, then
davies_bouldin) and as JSON with full-precision values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .clustering import (AGGLOMERATIVE, CANONICAL_METHOD_ORDER, DBSCAN, HDBSCAN,
                         LDA, MBKMEANS, NOISE, SPECTRAL, ClusterAssignment,
                         _as_points)
from .errors import DuplicateCell, LengthMismatch, UndefinedMetric

DR_ORDER = ("tsne", "umap", "pca")

DR_DISPLAY = {"tsne": "t-SNE", "umap": "UMAP", "pca": "PCA"}
METHOD_DISPLAY = {
    MBKMEANS: "MB K-means",
    AGGLOMERATIVE: "Agglomerative",
    DBSCAN: "DBSCAN",
    HDBSCAN: "HDBSCAN",
    SPECTRAL: "Spectral",
    LDA: "LDA",
}

COINCIDENT_CENTROIDS = "coincident_centroids"


@dataclass(frozen=True)
class MetricValue:
    """One report cell; None marks a metric that is undefined for the cell.

    A cell is undefined when fewer than 2 non-noise clusters or fewer than
    3 non-noise points remain after noise exclusion.
    """

    silhouette: float | None
    davies_bouldin: float | None
    n_evaluated: int
    noise_fraction: float
    flags: tuple[str, ...] = ()


def _drop_noise(points: np.ndarray, labels: np.ndarray):
    keep = labels != NOISE
    frac = float(1.0 - keep.mean()) if len(labels) else 0.0
    return points[keep], labels[keep], int(keep.sum()), frac


def _require_defined(labels: np.ndarray) -> None:
    if len(labels) == 0:
        raise UndefinedMetric("all points are noise")
    if len(np.unique(labels)) < 2:
        raise UndefinedMetric("fewer than 2 non-noise clusters")


def silhouette_score(y, a: ClusterAssignment | Sequence[int]) -> float:
    """Mean silhouette over non-noise points.

    a(i) is the mean distance to the rest of i's cluster, b(i) the minimum
    over other clusters of the mean distance to that cluster,
    s = (b - a) / max(a, b). Points in singleton clusters score 0, as does
    any point where max(a, b) = 0.
    """
    points = _as_points(y)
    labels = a.label_array() if isinstance(a, ClusterAssignment) else np.asarray(a)
    points, labels, _, _ = _drop_noise(points, labels)
    _require_defined(labels)
    uniq = np.unique(labels)
    dist = _distance_matrix(points)
    m = len(points)
    sums = np.empty((m, len(uniq)))
    counts = np.empty(len(uniq))
    for idx, c in enumerate(uniq):
        mask = labels == c
        counts[idx] = mask.sum()
        sums[:, idx] = dist[:, mask].sum(axis=1)
    own = np.searchsorted(uniq, labels)
    own_count = counts[own]
    scores = np.zeros(m)
    multi = own_count > 1
    a_val = np.zeros(m)
    a_val[multi] = sums[np.arange(m), own][multi] / (own_count[multi] - 1.0)
    mean_to = sums / counts[None, :]
    mean_to[np.arange(m), own] = np.inf
    b_val = mean_to.min(axis=1)
    denom = np.maximum(a_val, b_val)
    nonzero = multi & (denom > 0.0)
    scores[nonzero] = (b_val[nonzero] - a_val[nonzero]) / denom[nonzero]
    return float(scores.mean())


def _distance_matrix(points: np.ndarray) -> np.ndarray:
    sq = np.sum(points * points, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(d2)


def _davies_bouldin(points: np.ndarray, labels: np.ndarray) -> tuple[float, bool]:
    uniq = np.unique(labels)
    k = len(uniq)
    centroids = np.empty((k, points.shape[1]))
    scatter = np.empty(k)
    for idx, c in enumerate(uniq):
        cluster = points[labels == c]
        centroids[idx] = cluster.mean(axis=0)
        scatter[idx] = float(np.mean(np.sqrt(np.sum((cluster - centroids[idx]) ** 2, axis=1))))
    gaps = _distance_matrix(centroids)
    coincident = False
    ratio = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            if i == j:
                ratio[i, j] = -np.inf
            elif gaps[i, j] == 0.0:
                ratio[i, j] = np.inf
                coincident = True
            else:
                ratio[i, j] = (scatter[i] + scatter[j]) / gaps[i, j]
    return float(np.mean(ratio.max(axis=1))), coincident


def davies_bouldin_score(y, a: ClusterAssignment | Sequence[int]) -> float:
    """Davies-Bouldin index over non-noise points (lower is better).

    Per cluster i: centroid mu_i and scatter S_i = mean distance to mu_i;
    R_ij = (S_i + S_j) / ||mu_i - mu_j||; the index is the mean over i of
    max_{j != i} R_ij. Coincident centroids make the index +inf.
    """
    points = _as_points(y)
    labels = a.label_array() if isinstance(a, ClusterAssignment) else np.asarray(a)
    points, labels, _, _ = _drop_noise(points, labels)
    _require_defined(labels)
    value, _ = _davies_bouldin(points, labels)
    return value


def metric_value(y, a: ClusterAssignment) -> MetricValue:
    """Both metrics for one (projection, assignment) pair as a report cell."""
    points = _as_points(y)
    labels = a.label_array()
    kept, kept_labels, n_eval, noise_fraction = _drop_noise(points, labels)
    if n_eval < 3 or len(np.unique(kept_labels)) < 2:
        return MetricValue(None, None, n_eval, noise_fraction)
    sil = silhouette_score(kept, kept_labels)
    dbi, coincident = _davies_bouldin(kept, kept_labels)
    flags = (COINCIDENT_CENTROIDS,) if coincident else ()
    return MetricValue(sil, dbi, n_eval, noise_fraction, flags)


def adjusted_rand(a: Sequence[int], b: Sequence[int]) -> float:
    """Pair-counting adjusted Rand index; 1.0 iff the partitions agree.

    Noise (-1) is treated as an ordinary label here; callers comparing
    clusterings with noise should subset first. A zero denominator (both
    partitions trivial) returns 1.0.
    """
    if len(a) != len(b):
        raise LengthMismatch(f"label sequences of length {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        return 1.0
    contingency: dict[tuple[int, int], int] = {}
    rows: dict[int, int] = {}
    cols: dict[int, int] = {}
    for la, lb in zip(a, b):
        key = (int(la), int(lb))
        contingency[key] = contingency.get(key, 0) + 1
        rows[key[0]] = rows.get(key[0], 0) + 1
        cols[key[1]] = cols.get(key[1], 0) + 1

    def comb2(x: int) -> float:
        return x * (x - 1) / 2.0

    sum_ij = sum(comb2(v) for v in contingency.values())
    sum_a = sum(comb2(v) for v in rows.values())
    sum_b = sum(comb2(v) for v in cols.values())
    expected = sum_a * sum_b / comb2(n)
    maximum = (sum_a + sum_b) / 2.0
    if maximum == expected:
        return 1.0
    return float((sum_ij - expected) / (maximum - expected))


# ---------------------------------------------------------------------------
# Report grid


@dataclass(frozen=True)
class MetricsReport:
    """Grid of MetricValue keyed (cluster_method, dr_method).

    The CSV rendering has a silhouette stanza then a davies_bouldin stanza,
    each with DR columns t-SNE, UMAP, PCA. Missing cells render "n/a",
    undefined metrics "undef", infinite Davies-Bouldin "inf"; footnotes
    explain undef/inf cells and the LDA row. The DBSCAN row only appears
    when DBSCAN cells exist.
    """

    cells: Mapping[tuple[str, str], MetricValue]
    aggregation: str = "per-policy"

    def row_methods(self) -> tuple[str, ...]:
        present = {ck for ck, _ in self.cells}
        return tuple(m for m in CANONICAL_METHOD_ORDER
                     if m != DBSCAN or m in present)

    def to_csv(self) -> str:
        lines: list[str] = []
        notes: list[str] = []
        for metric in ("silhouette", "davies_bouldin"):
            lines.append(f"table,{metric}")
            lines.append("method," + ",".join(DR_DISPLAY[d] for d in DR_ORDER))
            for method in self.row_methods():
                rendered = []
                for dr in DR_ORDER:
                    cell = self.cells.get((method, dr))
                    rendered.append(self._render(cell, metric, method, dr, notes))
                lines.append(METHOD_DISPLAY[method] + "," + ",".join(rendered))
        lines.append(f"note,aggregation: {self.aggregation}")
        if any(ck == LDA for ck, _ in self.cells):
            lines.append("note,LDA labels derive from policy text; "
                         "each DR column scores those labels on that projection")
        lines.extend(dict.fromkeys(notes))
        return "\n".join(lines) + "\n"

    def _render(self, cell: MetricValue | None, metric: str,
                method: str, dr: str, notes: list[str]) -> str:
        if cell is None:
            return "n/a"
        value = getattr(cell, metric)
        where = f"{METHOD_DISPLAY[method]}/{DR_DISPLAY[dr]}"
        if value is None:
            notes.append(f"note,undef {where}: n_evaluated={cell.n_evaluated}"
                         f" noise_fraction={repr(cell.noise_fraction)}")
            return "undef"
        if math.isinf(value):
            notes.append(f"note,inf {where}: coincident centroids")
            return "inf"
        return repr(float(value))

    def to_json(self) -> str:
        def encode(value: float | None):
            if value is None:
                return None
            if math.isinf(value):
                return "inf"
            return value

        payload = {
            "aggregation": self.aggregation,
            "dr_order": list(DR_ORDER),
            "cluster_order": list(self.row_methods()),
            "cells": [
                {
                    "cluster_method": ck,
                    "dr_method": dk,
                    "silhouette": encode(cell.silhouette),
                    "davies_bouldin": encode(cell.davies_bouldin),
                    "n_evaluated": cell.n_evaluated,
                    "noise_fraction": cell.noise_fraction,
                    "flags": list(cell.flags),
                }
                for (ck, dk), cell in sorted(self.cells.items())
            ],
        }
        return json.dumps(payload, ensure_ascii=False, separators=(",", ":")) + "\n"


def build_metrics_report(cells: Iterable[tuple[str, str, MetricValue]],
                         aggregation: str = "per-policy") -> MetricsReport:
    """Assemble a report from (dr_method, cluster_method, value) triples."""
    grid: dict[tuple[str, str], MetricValue] = {}
    for dr, method, value in cells:
        key = (method, dr)
        if key in grid:
            raise DuplicateCell(f"cell {method}/{dr} given twice")
        grid[key] = value
    return MetricsReport(grid, aggregation)


def mean_metrics_report(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Unweighted corpus mean over per-policy reports, cell by cell.

    A mean cell is defined only where every contributing policy defined it;
    otherwise it renders undef with the summed evaluation counts.
    """
    keys: list[tuple[str, str]] = []
    for report in reports:
        for key in report.cells:
            if key not in keys:
                keys.append(key)
    merged: dict[tuple[str, str], MetricValue] = {}
    n_reports = len(reports)
    for key in keys:
        values = [r.cells[key] for r in reports if key in r.cells]
        n_eval = sum(v.n_evaluated for v in values)
        noise = float(np.mean([v.noise_fraction for v in values]))
        defined = (len(values) == n_reports
                   and all(v.silhouette is not None for v in values)
                   and all(v.davies_bouldin is not None for v in values))
        if defined:
            merged[key] = MetricValue(
                float(np.mean([v.silhouette for v in values])),
                float(np.mean([v.davies_bouldin for v in values])),
                n_eval, noise,
                tuple(sorted({f for v in values for f in v.flags})))
        else:
            merged[key] = MetricValue(None, None, n_eval, noise)
    return MetricsReport(merged, "corpus-mean (unweighted)")
