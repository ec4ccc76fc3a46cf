"""Clustering toolkit for privacy-policy knowledge graphs.

Parses GraphML policy graphs, embeds them with a spring layout, reduces to
2-D (PCA, t-SNE, UMAP), clusters six ways, validates with Silhouette and
Davies-Bouldin, and emits reports, SVG scatterplots, and a small HTTP API
for interactive exploration. Everything is deterministic under an explicit
seed.
"""

from .clustering import (ClusterAssignment, ClusterParams, LdaResult,
                         agglomerative, annotate_clusters, canonicalize_labels,
                         dbscan, hdbscan, lda_cluster, lloyd_kmeans,
                         minibatch_kmeans, node_documents, spectral, tokenize)
from .dimred import Projection, TsneParams, UmapParams, pca, tsne, umap
from .errors import PpkgError
from .graph import (PolicyEdge, PolicyGraph, PolicyNode, degree_summary,
                    export_graph_json, parse_graph_json, parse_graphml)
from .layout import EmbeddingMatrix, LayoutParams, spring_layout
from .metrics import (MetricsReport, MetricValue, adjusted_rand,
                      build_metrics_report, davies_bouldin_score, metric_value,
                      silhouette_score)
from .pipeline import RunConfig, evaluate_grid, load_config, run_pipeline
from .render import render_scatter

__version__ = "0.1.0"

__all__ = [
    "ClusterAssignment", "ClusterParams", "LdaResult", "agglomerative",
    "annotate_clusters", "canonicalize_labels", "dbscan", "hdbscan",
    "lda_cluster", "lloyd_kmeans", "minibatch_kmeans", "node_documents",
    "spectral", "tokenize", "Projection", "TsneParams", "UmapParams", "pca",
    "tsne", "umap", "PpkgError", "PolicyEdge", "PolicyGraph", "PolicyNode",
    "degree_summary", "export_graph_json", "parse_graph_json", "parse_graphml",
    "EmbeddingMatrix", "LayoutParams", "spring_layout", "MetricsReport",
    "MetricValue", "adjusted_rand", "build_metrics_report",
    "davies_bouldin_score", "metric_value", "silhouette_score", "RunConfig",
    "evaluate_grid", "load_config", "run_pipeline", "render_scatter",
    "__version__",
]
