"""Acceptance checks, one test per shipped guarantee.

Each test prints one PASS line with its measured time; a failed assert is
the FAIL line. Tolerances and time budgets are stated inline and are not
to be loosened.
"""

from __future__ import annotations

import hashlib
import json
import time

import numpy as np

from ppkg.cli import main
from ppkg.clustering import (NOISE, ClusterParams, dbscan, hdbscan, kmeans_inertia,
                             lloyd_kmeans, minibatch_kmeans, spectral)
from ppkg.dimred import TsneParams, UmapParams, pca, tsne, umap
from ppkg.layout import embedding_from_positions
from ppkg.metrics import (adjusted_rand, davies_bouldin_score, silhouette_score)
from ppkg.pipeline import config_from_dict, evaluate_grid, run_pipeline
from oracles import davies_bouldin_reference, pca_reference, silhouette_reference
from util import as_embedding, make_graph, random_policy_graphml


def _ok(cid: str, detail: str) -> None:
    print(f"PASS {cid}: {detail}")


def test_c01_metric_scores_match_oracles(four_point_fixture) -> None:
    """Silhouette and Davies-Bouldin agree with loop oracles to 1e-9 on 100
    random datasets (n <= 200, 2-D, k <= 8), plus the 4-point fixture."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(1234)
    for _ in range(100):
        n = int(rng.integers(4, 201))
        k = int(rng.integers(2, 9))
        points = rng.normal(size=(n, 2)) * rng.uniform(0.5, 4.0)
        labels = rng.integers(k, size=n)
        labels[:k] = np.arange(k)
        assert abs(silhouette_score(points, labels)
                   - silhouette_reference(points, labels)) <= 1e-9
        assert abs(davies_bouldin_score(points, labels)
                   - davies_bouldin_reference(points, labels)) <= 1e-9
    points, labels = four_point_fixture
    assert abs(silhouette_score(points, labels) - 0.9002) <= 1e-4
    assert abs(davies_bouldin_score(points, labels) - 0.1000) <= 1e-9
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _ok("C1", f"metric oracles, 100 datasets + fixture ({elapsed:.2f}s)")


def test_c02_pca_matches_oracle() -> None:
    """PCA agrees with a covariance-eigendecomposition oracle on 50 random
    matrices (n <= 200, d <= 10): projections equal up to per-component
    sign, explained variances within 1e-8."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(4321)
    for _ in range(50):
        n = int(rng.integers(2, 201))
        d = int(rng.integers(1, 11))
        out = int(rng.integers(1, min(n, d) + 1))
        x = rng.normal(scale=rng.uniform(0.5, 3.0), size=(n, d))
        proj, explained = pca(as_embedding(x), out_dim=out)
        ref_proj, ref_explained = pca_reference(x, out)
        for j in range(out):
            col, ref = proj.data[:, j], ref_proj[:, j]
            assert (np.allclose(col, ref, atol=1e-8)
                    or np.allclose(col, -ref, atol=1e-8))
        assert np.allclose(explained, ref_explained, atol=1e-8)
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _ok("C2", f"pca oracle, 50 matrices ({elapsed:.2f}s)")


def test_c03_embeddings_preserve_blobs(blobs) -> None:
    """K-means on the t-SNE and on the UMAP projection of 150 well-separated
    blob points (>= 20 sigma) each recovers the blobs with ARI >= 0.95,
    each within 30s."""
    points, truth = blobs
    assert len(points) == 150
    em = as_embedding(points)

    t0 = time.perf_counter()
    proj_t = tsne(em, TsneParams(seed=3))
    ari_t = adjusted_rand(lloyd_kmeans(proj_t.data, 3, seed=0, restarts=10).labels, truth)
    t_tsne = time.perf_counter() - t0
    assert ari_t >= 0.95
    assert t_tsne < 30.0

    t0 = time.perf_counter()
    proj_u = umap(em, UmapParams(seed=4))
    ari_u = adjusted_rand(lloyd_kmeans(proj_u.data, 3, seed=0, restarts=10).labels, truth)
    t_umap = time.perf_counter() - t0
    assert ari_u >= 0.95
    assert t_umap < 30.0
    _ok("C3", f"t-SNE ARI {ari_t:.3f} ({t_tsne:.1f}s), UMAP ARI {ari_u:.3f} ({t_umap:.1f}s)")


def test_c04_full_grid_is_complete(blobs) -> None:
    """The full 3-DR x 5-clustering grid on the blob fixture yields exactly
    15 report cells, every one defined, in the two-stanza CSV layout."""
    points, truth = blobs
    vocab = [["cookie", "tracking", "advertising"],
             ["email", "address", "phone"],
             ["location", "device", "identifier"]]
    nodes = [(f"n{i}", " ".join(vocab[truth[i]][j % 3] for j in range(i, i + 3)),
              "DATA") for i in range(len(points))]
    g = make_graph(nodes)
    order = [f"n{i}" for i in range(len(points))]
    em = embedding_from_positions(
        {nid: points[i] for i, nid in enumerate(order)}, order)
    c = config_from_dict({"seed": 4, "cluster": {"k": 3, "n_topics": 3}})
    grid = evaluate_grid(g, em, c, "blobs")
    assert len(grid.report.cells) == 15
    for (method, dr), cell in grid.report.cells.items():
        assert cell.silhouette is not None, f"{method}/{dr} undefined"
        assert cell.davies_bouldin is not None, f"{method}/{dr} undefined"

    lines = grid.report.to_csv().splitlines()
    assert lines[0] == "table,silhouette"
    assert lines[1] == "method,t-SNE,UMAP,PCA"
    rows = ("MB K-means", "Agglomerative", "HDBSCAN", "Spectral", "LDA")
    parsed = 0
    for stanza_start in (2, 9):
        assert lines[stanza_start - 2].startswith("table,")
        for offset, name in enumerate(rows):
            cells = lines[stanza_start + offset].split(",")
            assert cells[0] == name
            values = [float(v) for v in cells[1:]]  # raises if any n/a or undef
            parsed += len(values)
    assert parsed == 30  # 15 cells x 2 metrics
    _ok("C4", "15/15 grid cells defined in two-stanza CSV")


def test_c05_spectral_beats_kmeans_on_rings(rings) -> None:
    """Concentric rings: spectral clustering on the kNN affinity separates
    them exactly (ARI = 1.0) while Lloyd on raw coordinates stays < 0.5."""
    points, truth = rings
    a = spectral(points, ClusterParams(seed=0, k=2, affinity="knn", knn_m=10))
    ari_spectral = adjusted_rand(a.labels, truth)
    assert ari_spectral == 1.0
    ari_lloyd = adjusted_rand(
        lloyd_kmeans(points, 2, seed=0, restarts=10).labels, truth)
    assert ari_lloyd < 0.5
    _ok("C5", f"spectral ARI {ari_spectral:.1f}, Lloyd ARI {ari_lloyd:.3f}")


def test_c06_density_methods_handle_noise(blobs) -> None:
    """DBSCAN labels the two-group-plus-straggler line exactly; HDBSCAN
    sends 5 planted outliers to noise and keeps ARI >= 0.95 on the rest."""
    line = np.asarray([0.0, 0.1, 0.2, 0.3, 0.4,
                       10.0, 10.1, 10.2, 10.3, 10.4, 50.0])[:, None]
    a = dbscan(line, ClusterParams(seed=0, eps=0.5, min_pts=3))
    assert a.labels == (0, 0, 0, 0, 0, 1, 1, 1, 1, 1, -1)

    points, truth = blobs
    outliers = np.zeros((5, points.shape[1]))
    for i in range(5):
        outliers[i, i % points.shape[1]] = 10.0 ** (3 + i)
    stacked = np.vstack([points, outliers])
    h = hdbscan(stacked, ClusterParams(seed=0, min_cluster_size=5))
    labels = h.label_array()
    assert np.all(labels[len(points):] == NOISE)
    ari = adjusted_rand(labels[: len(points)], truth)
    assert ari >= 0.95
    _ok("C6", f"dbscan exact, hdbscan outliers -> noise, rest ARI {ari:.3f}")


def test_c07_minibatch_tracks_lloyd(blobs) -> None:
    """Mini-batch k-means lands within 5% of full-batch Lloyd inertia for
    each of 10 seeds."""
    points, _ = blobs
    worst = 0.0
    for seed in range(10):
        full = lloyd_kmeans(points, 3, seed=seed, restarts=10).inertia
        mini = kmeans_inertia(points,
                              minibatch_kmeans(points, ClusterParams(seed=seed, k=3)).labels)
        worst = max(worst, mini / full)
        assert mini <= 1.05 * full, f"seed {seed}: {mini:.4f} vs {full:.4f}"
    _ok("C7", f"10 seeds, worst inertia ratio {worst:.4f}")


def test_c08_runs_are_byte_identical(tmp_path) -> None:
    """Two pipeline runs with one config produce byte-identical artifacts."""
    src = tmp_path / "policy.graphml"
    src.write_bytes(random_policy_graphml(seed=8, n_nodes=80, n_edges=160))
    doc = {"seed": 17, "input": str(src)}
    first = run_pipeline(config_from_dict({**doc, "out": str(tmp_path / "a")}))
    second = run_pipeline(config_from_dict({**doc, "out": str(tmp_path / "b")}))
    assert first.artifacts == second.artifacts
    differing = [rel for rel in first.artifacts
                 if (first.out_dir / rel).read_bytes() != (second.out_dir / rel).read_bytes()]
    assert differing == []
    _ok("C8", f"{len(first.artifacts)} artifacts byte-identical across runs")


def test_c09_corpus_scale_budget(tmp_path) -> None:
    """A 1000-node, 2000-edge policy runs the full default grid in under
    120 seconds."""
    src = tmp_path / "big.graphml"
    src.write_bytes(random_policy_graphml(seed=9, n_nodes=1000, n_edges=2000))
    c = config_from_dict({"seed": 9, "input": str(src), "out": str(tmp_path / "art")})
    t0 = time.perf_counter()
    artifacts = run_pipeline(c)
    elapsed = time.perf_counter() - t0
    assert artifacts.policies == ("big",)
    assert elapsed < 120.0
    manifest = json.loads(artifacts.manifest_path.read_text(encoding="utf-8"))
    assert len(manifest["artifacts"]) == 55
    _ok("C9", f"1000n/2000e full grid in {elapsed:.1f}s (budget 120s)")


def test_c10_corrupt_corpus_degrades_gracefully(tmp_path, capsys) -> None:
    """A corpus with one corrupt file exits 2 and still writes artifacts
    for every valid file."""
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "alpha.graphml").write_bytes(random_policy_graphml(1, 25, 40))
    (corpus / "beta.graphml").write_bytes(random_policy_graphml(2, 25, 40))
    (corpus / "corrupt.graphml").write_bytes(b"<graphml><node id='x'")
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "seed": 10, "input": str(corpus), "out": str(tmp_path / "art"),
        "dr": ["pca"], "clustering": ["mbkmeans"], "cluster": {"k": 3},
    }), encoding="utf-8")
    code = main(["run", "--config", str(config_path)])
    captured = capsys.readouterr()
    assert code == 2
    assert "corrupt.graphml" in captured.err
    for policy in ("alpha", "beta"):
        assert (tmp_path / "art" / policy / "metrics.csv").exists()
        assert (tmp_path / "art" / policy / "pca_mbkmeans.svg").exists()
    manifest = json.loads((tmp_path / "art" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["policies"] == ["alpha", "beta"]
    assert len(manifest["errors"]) == 1
    _ok("C10", "exit 2 with artifacts for both valid policies")
