"""HTTP service exposing the corpus and on-demand clustering runs.

One run = one (DR method, clustering method) cell for one policy. Run ids
are digests of (policy id, methods, resolved params, seed), so identical
requests deduplicate to a single computation and replaying a request
returns the same payload. The spring layout of each policy is computed
once from the service config seed; the request seed drives DR and
clustering only, so two runs over one policy share node geometry.
"""

from __future__ import annotations

import hashlib
import json
import logging
import socket
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .clustering import ClusterParams
from .dimred import TsneParams, UmapParams
from .errors import BindFailure, InvalidConfig, PpkgError
from .graph import PolicyGraph, degree_summary, export_graph_json, parse_graphml
from .layout import EmbeddingMatrix, spring_layout
from .pipeline import (CLUSTER_METHODS, DR_METHODS, RunConfig, config_to_dict,
                       derive_seed, discover_inputs, evaluate_grid)
from .render import render_scatter

logger = logging.getLogger(__name__)


class RunRequest(BaseModel):
    dr: str
    clustering: str
    seed: int
    params: dict = {}
    config_digest: Optional[str] = None


@dataclass
class _Job:
    status: str = "pending"
    payload: dict | None = None
    svg: bytes | None = None
    detail: str | None = None
    done: threading.Event = field(default_factory=threading.Event)


def config_digest(c: RunConfig) -> str:
    doc = json.dumps(config_to_dict(c), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()[:16]


def _split_params(dr: str, params: Mapping[str, object], seed: int):
    """Partition a flat params dict into DR params and cluster params."""
    remaining = dict(params)
    dr_cls = {"tsne": TsneParams, "umap": UmapParams}.get(dr)
    dr_kwargs = {}
    if dr_cls is not None:
        for name in list(remaining):
            if name in dr_cls.__dataclass_fields__ and name != "seed":
                dr_kwargs[name] = remaining.pop(name)
    for name in remaining:
        if name == "seed" or name not in ClusterParams.__dataclass_fields__:
            raise InvalidConfig("params", f"unknown parameter {name!r}")
    try:
        cluster = ClusterParams(seed=seed, **remaining)
        dr_params = dr_cls(seed=seed, **dr_kwargs) if dr_cls else None
    except (TypeError, ValueError) as exc:
        raise InvalidConfig("params", str(exc)) from None
    return dr_params, cluster


def _run_id(policy_id: str, req: RunRequest, cluster: ClusterParams,
            dr_params) -> str:
    def fields(p):
        if p is None:
            return {}
        return {k: getattr(p, k) for k in p.__dataclass_fields__ if k != "seed"}

    doc = json.dumps({
        "policy": policy_id,
        "dr": req.dr,
        "clustering": req.clustering,
        "dr_params": fields(dr_params),
        "cluster_params": fields(cluster),
        "seed": req.seed,
    }, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()[:16]


def create_app(config: RunConfig) -> FastAPI:
    """Build the FastAPI app over the corpus named by ``config.input``."""
    policies: dict[str, PolicyGraph] = {}
    for path in discover_inputs(config.input):
        try:
            policies[path.stem] = parse_graphml(path.read_bytes())
        except PpkgError as exc:
            logger.warning("service skipping %s: %s", path, exc)
    if not policies:
        raise InvalidConfig("input", "no parseable policy in corpus")

    embeddings: dict[str, EmbeddingMatrix] = {}
    jobs: dict[str, _Job] = {}
    lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=1)
    digest = config_digest(config)

    def embedding_for(policy_id: str) -> EmbeddingMatrix:
        with lock:
            cached = embeddings.get(policy_id)
        if cached is not None:
            return cached
        params = replace(config.layout,
                         seed=derive_seed(config.seed, policy_id, "layout"))
        em = spring_layout(policies[policy_id], params)
        with lock:
            embeddings.setdefault(policy_id, em)
            return embeddings[policy_id]

    def compute(run_id: str, policy_id: str, req: RunRequest,
                dr_params, cluster: ClusterParams) -> None:
        job = jobs[run_id]
        try:
            g = policies[policy_id]
            em = embedding_for(policy_id)
            run_config = replace(
                config, seed=req.seed,
                dr_methods=(req.dr,), cluster_methods=(req.clustering,),
                cluster=cluster,
                tsne=dr_params if req.dr == "tsne" else config.tsne,
                umap=dr_params if req.dr == "umap" else config.umap)
            grid = evaluate_grid(g, em, run_config, policy_id)
            proj = grid.projections[req.dr]
            assignment = grid.assignments[(req.dr, req.clustering)]
            annotations = grid.annotations[(req.dr, req.clustering)]
            cell = grid.report.cells[(req.clustering, req.dr)]
            job.payload = {
                "status": "done",
                "run_id": run_id,
                "policy": policy_id,
                "dr": req.dr,
                "clustering": req.clustering,
                "seed": req.seed,
                "positions": {node: [float(x), float(y)]
                              for node, (x, y) in zip(proj.node_order, proj.data)},
                "labels": {node: int(label)
                           for node, label in zip(proj.node_order, assignment.labels)},
                "k_found": assignment.k_found,
                "metrics": {
                    "silhouette": cell.silhouette,
                    "davies_bouldin": None if cell.davies_bouldin is None
                    else (cell.davies_bouldin
                          if cell.davies_bouldin != float("inf") else "inf"),
                    "n_evaluated": cell.n_evaluated,
                    "noise_fraction": cell.noise_fraction,
                },
                "annotations": {str(k): v for k, v in sorted(annotations.items())},
            }
            job.svg = render_scatter(proj, assignment, annotations,
                                     title=f"{policy_id} {req.dr} {req.clustering}")
            job.status = "done"
        except Exception as exc:  # surfaced via the run status, not a 500
            logger.exception("run %s failed", run_id)
            job.status = "error"
            job.detail = f"{type(exc).__name__}: {exc}"
        finally:
            job.done.set()

    app = FastAPI(title="policy graph clustering service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.get("/api/config")
    def get_config():
        return {"config": config_to_dict(config), "digest": digest,
                "dr_methods": list(DR_METHODS),
                "cluster_methods": list(CLUSTER_METHODS)}

    @app.get("/api/policies")
    def list_policies():
        return [{"id": pid,
                 "node_count": len(g.nodes),
                 "edge_count": len(g.edges)}
                for pid, g in sorted(policies.items())]

    @app.get("/api/policies/{policy_id}/graph")
    def get_graph(policy_id: str):
        g = policies.get(policy_id)
        if g is None:
            raise HTTPException(404, detail=f"unknown policy {policy_id!r}")
        return Response(content=export_graph_json(g, degree_summary(g)),
                        media_type="application/json")

    @app.post("/api/policies/{policy_id}/run")
    def post_run(policy_id: str, req: RunRequest):
        if policy_id not in policies:
            raise HTTPException(404, detail=f"unknown policy {policy_id!r}")
        if req.config_digest is not None and req.config_digest != digest:
            raise HTTPException(
                409, detail={"field": "config_digest",
                             "message": "config mismatch: service config digest is "
                                        f"{digest}"})
        if req.dr not in DR_METHODS:
            raise HTTPException(422, detail={"field": "dr",
                                             "message": f"unknown method {req.dr!r}"})
        if req.clustering not in CLUSTER_METHODS:
            raise HTTPException(
                422, detail={"field": "clustering",
                             "message": f"unknown method {req.clustering!r}"})
        if req.seed < 0:
            raise HTTPException(422, detail={"field": "seed",
                                             "message": "must be non-negative"})
        try:
            dr_params, cluster = _split_params(req.dr, req.params, req.seed)
        except InvalidConfig as exc:
            raise HTTPException(422, detail={"field": exc.field,
                                             "message": str(exc)}) from None
        run_id = _run_id(policy_id, req, cluster, dr_params)
        with lock:
            if run_id not in jobs:
                jobs[run_id] = _Job()
                executor.submit(compute, run_id, policy_id, req, dr_params, cluster)
        return {"run_id": run_id}

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        job = jobs.get(run_id)
        if job is None:
            raise HTTPException(404, detail=f"unknown run {run_id!r}")
        if job.status == "pending":
            return {"status": "pending", "run_id": run_id}
        if job.status == "error":
            return {"status": "error", "run_id": run_id, "detail": job.detail}
        return job.payload

    @app.get("/api/runs/{run_id}/svg")
    def get_svg(run_id: str):
        job = jobs.get(run_id)
        if job is None:
            raise HTTPException(404, detail=f"unknown run {run_id!r}")
        if job.status != "done":
            raise HTTPException(409, detail=f"run {run_id} is {job.status}")
        return Response(content=job.svg, media_type="image/svg+xml")

    return app


def serve(config: RunConfig, bind: str) -> None:
    """Bind and serve until interrupted; BindFailure if the address is taken."""
    host, _, port_text = bind.rpartition(":")
    host = host or "127.0.0.1"
    try:
        port = int(port_text)
    except ValueError:
        raise InvalidConfig("bind", f"expected host:port, got {bind!r}") from None
    app = create_app(config)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
        sock.listen(128)
    except OSError as exc:
        sock.close()
        raise BindFailure(f"cannot bind {bind}: {exc}") from None
    import uvicorn

    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    try:
        server.run(sockets=[sock])
    finally:
        sock.close()
