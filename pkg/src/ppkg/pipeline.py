"""End-to-end orchestration: parse, layout, reduce, cluster, score, render.

One RunConfig drives everything. Execution is sequential and fully
deterministic: stage seeds are derived from the base seed by hashing
(policy id, stage name), every artifact is written with stable bytes, and
the manifest records each artifact path with its sha256 digest. A corpus
run skips files that fail to parse, records the error in the manifest, and
continues with the rest.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

from .clustering import (LDA, ClusterAssignment, ClusterParams, LdaResult,
                         agglomerative, annotate_clusters, dbscan, hdbscan,
                         lda_cluster, minibatch_kmeans, node_documents, spectral)
from .dimred import Projection, TsneParams, UmapParams, pca, tsne, umap, write_projection_csv
from .errors import InvalidConfig, NoValidInputs, PpkgError
from .graph import PolicyGraph, degree_summary, export_graph_json, parse_graphml
from .layout import EmbeddingMatrix, LayoutParams, spring_layout, write_embedding_csv
from .metrics import MetricsReport, build_metrics_report, mean_metrics_report, metric_value
from .render import render_scatter

logger = logging.getLogger(__name__)

DR_METHODS = ("pca", "tsne", "umap")
CLUSTER_METHODS = ("mbkmeans", "agglomerative", "dbscan", "hdbscan", "spectral", "lda")
# DBSCAN is runnable but outside the default grid (it found too few clusters
# on this material to rank).
DEFAULT_DR = ("pca", "tsne", "umap")
DEFAULT_CLUSTERING = ("mbkmeans", "agglomerative", "hdbscan", "spectral", "lda")

_CLUSTER_FUNCS = {
    "mbkmeans": minibatch_kmeans,
    "agglomerative": agglomerative,
    "dbscan": dbscan,
    "hdbscan": hdbscan,
    "spectral": spectral,
}


@dataclass(frozen=True)
class RunConfig:
    """Mirror of the JSON config document, plus CLI overrides."""

    seed: int
    input: str | None = None
    out: str | None = None
    dr_methods: tuple[str, ...] = DEFAULT_DR
    cluster_methods: tuple[str, ...] = DEFAULT_CLUSTERING
    layout: LayoutParams | None = None
    tsne: TsneParams | None = None
    umap: UmapParams | None = None
    cluster: ClusterParams | None = None

    def __post_init__(self):
        if not self.dr_methods:
            raise InvalidConfig("dr", "at least one DR method required")
        if not self.cluster_methods:
            raise InvalidConfig("clustering", "at least one clustering method required")
        if self.layout is None:
            object.__setattr__(self, "layout", LayoutParams(seed=self.seed))
        if self.tsne is None:
            object.__setattr__(self, "tsne", TsneParams(seed=self.seed))
        if self.umap is None:
            object.__setattr__(self, "umap", UmapParams(seed=self.seed))
        if self.cluster is None:
            object.__setattr__(self, "cluster", ClusterParams(seed=self.seed))


def derive_seed(base: int, *parts: object) -> int:
    """Stable per-stage seed: sha256 over the base seed and stage labels."""
    digest = hashlib.sha256(str(int(base)).encode("ascii"))
    for part in parts:
        digest.update(b"\x1f")
        digest.update(str(part).encode("utf-8"))
    return int.from_bytes(digest.digest()[:8], "big") % (2 ** 63)


def _subset(doc: Mapping[str, object], field: str, allowed: Sequence[str],
            default: tuple[str, ...]) -> tuple[str, ...]:
    raw = doc.get(field)
    if raw is None:
        return default
    if not isinstance(raw, (list, tuple)) or not all(isinstance(m, str) for m in raw):
        raise InvalidConfig(field, "expected a list of method tags")
    for m in raw:
        if m not in allowed:
            raise InvalidConfig(field, f"unknown method {m!r}")
    # canonical order, duplicates dropped
    return tuple(m for m in allowed if m in raw)


def _params(doc: Mapping[str, object], field: str, cls, seed: int):
    raw = doc.get(field, {})
    if not isinstance(raw, Mapping):
        raise InvalidConfig(field, "expected an object")
    if "seed" in raw:
        raise InvalidConfig(field, "seed is set at the top level only")
    try:
        return cls(seed=seed, **raw)
    except TypeError as exc:
        raise InvalidConfig(field, f"unknown parameter ({exc})") from None
    except ValueError as exc:
        raise InvalidConfig(field, str(exc)) from None


def config_from_dict(doc: Mapping[str, object], *, input_override: str | None = None,
                     out_override: str | None = None,
                     seed_override: int | None = None) -> RunConfig:
    """Build a validated RunConfig from a JSON-shaped mapping."""
    known = {"seed", "input", "out", "dr", "clustering", "layout", "tsne", "umap", "cluster"}
    for key in doc:
        if key not in known:
            raise InvalidConfig(key, "unknown config field")
    seed = seed_override if seed_override is not None else doc.get("seed")
    if seed is None:
        raise InvalidConfig("seed", "mandatory; no wall-clock default")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise InvalidConfig("seed", "must be a non-negative integer")
    return RunConfig(
        seed=seed,
        input=input_override or doc.get("input"),
        out=out_override or doc.get("out"),
        dr_methods=_subset(doc, "dr", DR_METHODS, DEFAULT_DR),
        cluster_methods=_subset(doc, "clustering", CLUSTER_METHODS, DEFAULT_CLUSTERING),
        layout=_params(doc, "layout", LayoutParams, seed),
        tsne=_params(doc, "tsne", TsneParams, seed),
        umap=_params(doc, "umap", UmapParams, seed),
        cluster=_params(doc, "cluster", ClusterParams, seed),
    )


def load_config(path: str | Path, **overrides) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig("config", f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InvalidConfig("config", "top level must be an object")
    return config_from_dict(doc, **overrides)


def config_to_dict(c: RunConfig) -> dict:
    """Field-for-field JSON mirror (sub-param seeds omitted; derived)."""
    def fields(params, drop=("seed",)):
        out = {}
        for name in params.__dataclass_fields__:
            if name not in drop:
                out[name] = getattr(params, name)
        return out

    return {
        "seed": c.seed,
        "input": c.input,
        "out": c.out,
        "dr": list(c.dr_methods),
        "clustering": list(c.cluster_methods),
        "layout": fields(c.layout),
        "tsne": fields(c.tsne),
        "umap": fields(c.umap),
        "cluster": fields(c.cluster),
    }


# ---------------------------------------------------------------------------
# Grid evaluation (shared by batch runs and the HTTP service)


@dataclass(frozen=True)
class GridResult:
    projections: Mapping[str, Projection]
    assignments: Mapping[tuple[str, str], ClusterAssignment]
    annotations: Mapping[tuple[str, str], Mapping[int, list[str]]]
    report: MetricsReport
    lda: LdaResult | None


def evaluate_grid(g: PolicyGraph, em: EmbeddingMatrix, c: RunConfig,
                  policy_id: str) -> GridResult:
    """Run each configured DR, each clustering per DR, and score every cell.

    LDA is clustered once from the policy text; its fixed labels are then
    scored against each DR projection, which is why it fills every DR
    column of the report.
    """
    projections: dict[str, Projection] = {}
    for dr in c.dr_methods:
        if dr == "pca":
            proj, _ = pca(em, 2)
        elif dr == "tsne":
            proj = tsne(em, replace(c.tsne, seed=derive_seed(c.seed, policy_id, "tsne")))
        else:
            proj = umap(em, replace(c.umap, seed=derive_seed(c.seed, policy_id, "umap")))
        projections[dr] = proj

    lda_result: LdaResult | None = None
    if LDA in c.cluster_methods:
        lda_result = lda_cluster(
            node_documents(g),
            replace(c.cluster, seed=derive_seed(c.seed, policy_id, "lda")))

    assignments: dict[tuple[str, str], ClusterAssignment] = {}
    annotations: dict[tuple[str, str], Mapping[int, list[str]]] = {}
    cells = []
    for dr in c.dr_methods:
        proj = projections[dr]
        for method in c.cluster_methods:
            if method == LDA:
                assert lda_result is not None
                assignment = lda_result.assignment
            else:
                params = replace(c.cluster,
                                 seed=derive_seed(c.seed, policy_id, dr, method))
                assignment = _CLUSTER_FUNCS[method](proj, params)
            assignments[(dr, method)] = assignment
            annotations[(dr, method)] = annotate_clusters(assignment, g)
            cells.append((dr, method, metric_value(proj, assignment)))
    return GridResult(projections, assignments, annotations,
                      build_metrics_report(cells), lda_result)


# ---------------------------------------------------------------------------
# Batch runs


@dataclass(frozen=True)
class RunArtifacts:
    out_dir: Path
    manifest_path: Path
    artifacts: tuple[str, ...]
    errors: tuple[tuple[str, str], ...]
    policies: tuple[str, ...]


def discover_inputs(input_path: str | None) -> list[Path]:
    if not input_path:
        raise NoValidInputs("no input path configured")
    path = Path(input_path)
    if path.is_dir():
        found = sorted(p for p in path.iterdir()
                       if p.is_file() and p.suffix == ".graphml")
        if not found:
            raise NoValidInputs(f"no .graphml files under {path}")
        return found
    if path.is_file():
        return [path]
    raise NoValidInputs(f"input path {path} does not exist")


def _labels_csv(assignment: ClusterAssignment, node_order: Sequence[str]) -> bytes:
    lines = ["node_id,label"]
    lines.extend(f"{node},{label}" for node, label in zip(node_order, assignment.labels))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _annotations_json(annotations: Mapping[int, list[str]]) -> bytes:
    doc = {str(cluster): list(terms) for cluster, terms in sorted(annotations.items())}
    return (json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8")


class _Writer:
    """Writes artifacts under one root and records relative path -> digest."""

    def __init__(self, root: Path):
        self.root = root
        self.digests: dict[str, str] = {}

    def put(self, rel: str, data: bytes) -> None:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self.digests[rel] = hashlib.sha256(data).hexdigest()


def _process_policy(g: PolicyGraph, policy_id: str, c: RunConfig,
                    writer: _Writer) -> MetricsReport:
    writer.put(f"{policy_id}/graph.json", export_graph_json(g, degree_summary(g)))
    layout_params = replace(c.layout, seed=derive_seed(c.seed, policy_id, "layout"))
    em = spring_layout(g, layout_params)
    writer.put(f"{policy_id}/embedding.csv", write_embedding_csv(em))
    grid = evaluate_grid(g, em, c, policy_id)
    for dr, proj in grid.projections.items():
        writer.put(f"{policy_id}/{dr}.csv", write_projection_csv(proj))
        sidecar = {"method": proj.method, "params": dict(proj.params)}
        writer.put(f"{policy_id}/{dr}.meta.json",
                   (json.dumps(sidecar, ensure_ascii=False, sort_keys=True,
                               separators=(",", ":")) + "\n").encode("utf-8"))
    for (dr, method), assignment in grid.assignments.items():
        stem = f"{policy_id}/{dr}_{method}"
        writer.put(f"{stem}.labels.csv", _labels_csv(assignment, em.node_order))
        writer.put(f"{stem}.annotations.json",
                   _annotations_json(grid.annotations[(dr, method)]))
        writer.put(f"{stem}.svg",
                   render_scatter(grid.projections[dr], assignment,
                                  grid.annotations[(dr, method)],
                                  title=f"{policy_id} {dr} {method}"))
    writer.put(f"{policy_id}/metrics.csv", grid.report.to_csv().encode("utf-8"))
    writer.put(f"{policy_id}/metrics.json", grid.report.to_json().encode("utf-8"))
    return grid.report


def run_pipeline(c: RunConfig) -> RunArtifacts:
    """Execute the whole flow over one file or a corpus directory.

    Parse failures on individual corpus files are collected and do not
    abort the run; NoValidInputs is raised only when nothing succeeds.
    Repeated runs with one config produce byte-identical artifacts.
    """
    inputs = discover_inputs(c.input)
    out_dir = Path(c.out or "artifacts")
    out_dir.mkdir(parents=True, exist_ok=True)
    writer = _Writer(out_dir)
    errors: list[tuple[str, str]] = []
    policies: list[str] = []
    reports: list[MetricsReport] = []
    for path in inputs:
        policy_id = path.stem
        try:
            g = parse_graphml(path.read_bytes())
            reports.append(_process_policy(g, policy_id, c, writer))
            policies.append(policy_id)
        except PpkgError as exc:
            logger.warning("skipping %s: %s", path, exc)
            errors.append((str(path), f"{type(exc).__name__}: {exc}"))
    if not policies:
        raise NoValidInputs(
            "; ".join(f"{p}: {e}" for p, e in errors) or "no inputs processed")
    if len(policies) > 1:
        corpus = mean_metrics_report(reports)
        writer.put("corpus_metrics.csv", corpus.to_csv().encode("utf-8"))
        writer.put("corpus_metrics.json", corpus.to_json().encode("utf-8"))
    manifest = {
        "config": config_to_dict(c),
        "policies": policies,
        "errors": [{"input": p, "error": e} for p, e in errors],
        "artifacts": dict(sorted(writer.digests.items())),
    }
    manifest_bytes = (json.dumps(manifest, ensure_ascii=False, sort_keys=True,
                                 separators=(",", ":")) + "\n").encode("utf-8")
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_bytes(manifest_bytes)
    return RunArtifacts(out_dir, manifest_path,
                        tuple(sorted(writer.digests)), tuple(errors), tuple(policies))
