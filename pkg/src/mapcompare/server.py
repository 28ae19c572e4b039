"""Read/label HTTP interface over pipeline artifacts.

Read endpoints serve stored artifacts; the relations endpoint recomputes the
thresholded graph per query (cheap relative to storing every sweep). Label
writes go to an append-only log with a last-write-wins view, so human labels
survive restarts.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import crossmap as xm
from .config import RunConfig
from .pipeline import Pipeline, relation_graph_payload

__all__ = ["LabelStore", "create_app", "serve"]


class LabelStore:
    """Append-only label log; the view keeps the last write per entity."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._view: dict[str, dict] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._view[rec["entity"]] = rec

    def put(self, entity: str, label: str, author: str = "") -> dict:
        import time

        rec = {"entity": entity, "label": label, "author": author, "ts": time.time()}
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
                fh.flush()
            self._view[entity] = rec
        return rec

    def get(self, entity: str) -> dict | None:
        return self._view.get(entity)

    def all(self) -> dict[str, dict]:
        return dict(self._view)


class LabelRequest(BaseModel):
    entity: str
    label: str
    author: str = ""


def create_app(config: RunConfig) -> FastAPI:
    pipe = Pipeline(config)
    out = Path(config.output_dir)
    bundle_path = out / "export" / "bundle.json"
    if not bundle_path.exists():
        raise FileNotFoundError(
            f"no export bundle at {bundle_path}: run the 'export' stage first"
        )
    bundle = json.loads(bundle_path.read_text())
    cm = pipe.load_crossmap()
    labels = LabelStore(out / "labels.jsonl")

    topics = {d["entity"].split(":")[1]: d for d in bundle["topics"]}
    clusters = {d["entity"].split(":")[1]: d for d in bundle["clusters"]}

    app = FastAPI(title="mapcompare", version="0.1.0")

    @app.get("/api/summary")
    def summary():
        return bundle["summary"]

    @app.get("/api/topics")
    def topic_list():
        dist = bundle["distances"]
        return [
            {
                "id": int(tid),
                "prevalence": dist["prevalence"][int(tid)],
                "coords": dist["coords"][int(tid)],
                "label": (labels.get(f"topic:{tid}") or {}).get("label"),
            }
            for tid in sorted(topics, key=int)
        ]

    @app.get("/api/topics/{t}")
    def topic_dossier(t: str):
        if t not in topics:
            raise HTTPException(status_code=404, detail=f"unknown topic {t!r}")
        dossier = dict(topics[t])
        rec = labels.get(f"topic:{t}")
        dossier["human_label"] = rec["label"] if rec else None
        return dossier

    @app.get("/api/clusters/{c}")
    def cluster_dossier(c: str):
        if c not in clusters:
            raise HTTPException(status_code=404, detail=f"unknown cluster {c!r}")
        dossier = dict(clusters[c])
        rec = labels.get(f"cluster:{c}")
        dossier["human_label"] = rec["label"] if rec else None
        return dossier

    @app.get("/api/distances")
    def distances():
        return bundle["distances"]

    @app.get("/api/relations")
    def relations(tct: float = None, ttc: float = None):
        tau_ct = config.tau_ct if tct is None else tct
        tau_tc = config.tau_tc if ttc is None else ttc
        try:
            g = xm.relate(cm, tau_ct, tau_tc)
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e)) from e
        return relation_graph_payload(g)

    @app.get("/api/sweep")
    def sweep_endpoint(side: str = "cluster-to-topic"):
        path = out / "sweep" / f"{side}.json"
        if side not in ("cluster-to-topic", "topic-to-cluster"):
            raise HTTPException(status_code=400, detail=f"unknown side {side!r}")
        if not path.exists():
            raise HTTPException(status_code=404, detail="sweep stage not run")
        return json.loads(path.read_text())

    @app.post("/api/labels")
    def post_label(req: LabelRequest):
        kind, _, ident = req.entity.partition(":")
        known = (
            kind == "topic"
            and ident in topics
            or kind == "cluster"
            and ident in clusters
        )
        if not known:
            raise HTTPException(status_code=404, detail=f"unknown entity {req.entity!r}")
        return labels.put(req.entity, req.label, req.author)

    @app.get("/api/labels")
    def get_labels():
        return labels.all()

    return app


def serve(config: RunConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)
