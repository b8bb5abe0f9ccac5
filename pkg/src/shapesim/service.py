"""Annotation backend.

Serves initial clusters to annotators, records confirm/divide rounds in
an append-only JSONL log, derives and exports per-annotator edge sets,
and reports progress. The log is the source of truth: replaying it into
a fresh server reproduces every session state and export bit-exactly,
because a round is acknowledged only after the durable append.
"""

from __future__ import annotations

import io
import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import annotation, simgraph
from .simgraph import LabeledEdgeSet, read_partition


@dataclass
class ServiceConfig:
    tasks_path: str
    log_path: str
    tokens: dict[str, str]  # token -> annotator id
    preview_dir: str | None = None
    static_dir: str | None = None  # built web UI, served at /
    host: str = "127.0.0.1"
    port: int = 8000

    @classmethod
    def load(cls, path) -> "ServiceConfig":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        return cls(
            tasks_path=raw["tasks"],
            log_path=raw["log"],
            tokens=dict(raw["tokens"]),
            preview_dir=raw.get("preview_dir"),
            static_dir=raw.get("static_dir"),
            host=raw.get("host", "127.0.0.1"),
            port=int(raw.get("port", 8000)),
        )


class UnknownAnnotator(Exception):
    pass


class RoundRejected(Exception):
    def __init__(self, message: str, offending: list[str] | None = None):
        super().__init__(message)
        self.offending = offending or []


@dataclass
class Progress:
    per_annotator: dict[str, dict] = field(default_factory=dict)
    consistency: dict[str, float] = field(default_factory=dict)


class AnnotationServer:
    """Session bookkeeping over the immutable task file and the round log.

    Writes are serialized per (annotator, cluster) session; the log append
    itself is under a single lock so records are never interleaved.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        clusters = read_partition(config.tasks_path).clusters()
        self.tasks: dict[int, tuple[str, ...]] = {
            cid: tuple(sorted(members)) for cid, members in enumerate(clusters)
        }
        self.sessions: dict[tuple[str, int], annotation.ClusterAnnotation] = {}
        self._lock = threading.Lock()
        self._log = None
        self._replay_log()
        self._log = open(config.log_path, "a", encoding="utf-8", newline="\n")

    def close(self) -> None:
        if self._log:
            self._log.close()
            self._log = None

    def _replay_log(self) -> None:
        path = Path(self.config.log_path)
        if not path.exists():
            return
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                self._apply(rec["annotator"], int(rec["cluster"]), rec["checked"])

    def _annotator(self, token: str) -> str:
        try:
            return self.config.tokens[token]
        except KeyError:
            raise UnknownAnnotator(f"unknown annotator token") from None

    def _apply(self, annotator: str, cluster_id: int, checked) -> annotation.ClusterAnnotation:
        key = (annotator, cluster_id)
        state = self.sessions.get(key)
        if state is None:
            if cluster_id not in self.tasks:
                raise RoundRejected(f"unknown cluster {cluster_id}")
            state = annotation.ClusterAnnotation(
                cluster_id=str(cluster_id), members=self.tasks[cluster_id]
            )
        try:
            new_state = annotation.apply_round(state, checked)
        except ValueError as exc:
            raise RoundRejected(str(exc), sorted(set(checked) - state.remaining)) from exc
        self.sessions[key] = new_state
        return new_state

    # -- operations ---------------------------------------------------------

    def next_cluster(self, token: str) -> dict | None:
        """Lowest-id cluster not yet completed by this annotator, with the
        current remaining set (all members for a fresh cluster)."""
        annotator = self._annotator(token)
        for cid in sorted(self.tasks):
            state = self.sessions.get((annotator, cid))
            if state is not None and state.terminal:
                continue
            remaining = sorted(state.remaining) if state else list(self.tasks[cid])
            return {
                "cluster_id": cid,
                "members": list(self.tasks[cid]),
                "remaining": remaining,
                "round": len(state.rounds) if state else 0,
                "previews": [f"/api/preview/{m}.xyz" for m in remaining],
            }
        return None

    def submit_round(self, token: str, cluster_id: int, checked: list[str]) -> dict:
        annotator = self._annotator(token)
        with self._lock:
            state = self.sessions.get((annotator, cluster_id))
            rec = {
                "annotator": annotator,
                "cluster": cluster_id,
                "round": len(state.rounds) if state else 0,
                "checked": sorted(checked),
                "ts": datetime.now(timezone.utc).isoformat(),
            }
            new_state = self._apply(annotator, cluster_id, checked)
            # durable append before acknowledging
            self._log.write(json.dumps(rec, separators=(",", ":")) + "\n")
            self._log.flush()
            os.fsync(self._log.fileno())
        return {
            "remaining": sorted(new_state.remaining),
            "terminal": new_state.terminal,
        }

    def export_edges(self, token: str) -> str:
        """Edge-set TSV over this annotator's completed clusters."""
        annotator = self._annotator(token)
        merged = LabeledEdgeSet(owner=annotator)
        completed = 0
        for (a, _cid), state in sorted(self.sessions.items()):
            if a == annotator and state.terminal:
                merged.update(annotation.derive_edges(state, owner=annotator))
                completed += 1
        if completed == 0:
            raise RoundRejected("no completed clusters to export")
        buf = io.StringIO()
        for (x, y), lbl in sorted(merged.entries.items()):
            buf.write(f"{x}\t{y}\t{'+1' if lbl == simgraph.POSITIVE else '-1'}\n")
        return buf.getvalue()

    def progress(self) -> Progress:
        prog = Progress()
        exports: dict[str, LabeledEdgeSet] = {}
        for annotator in sorted(set(self.config.tokens.values())):
            done = [
                s
                for (a, _), s in self.sessions.items()
                if a == annotator and s.terminal
            ]
            edges = LabeledEdgeSet(owner=annotator)
            for s in done:
                edges.update(annotation.derive_edges(s))
            exports[annotator] = edges
            prog.per_annotator[annotator] = {
                "completed": len(done),
                "total": len(self.tasks),
                "edges_labeled": len(edges),
            }
        names = sorted(exports)
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                c = simgraph.consistency(exports[names[i]], exports[names[j]])
                if c is not None:
                    prog.consistency[f"{names[i]}/{names[j]}"] = c
        return prog


def create_app(config: ServiceConfig):
    """FastAPI application over an AnnotationServer."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import PlainTextResponse, Response

    server = AnnotationServer(config)
    app = FastAPI(title="shapesim annotation service")
    app.state.server = server

    @app.get("/api/health")
    def health():
        return {"status": "ok", "clusters": len(server.tasks)}

    @app.get("/api/clusters/next")
    def next_cluster(annotator: str):
        try:
            task = server.next_cluster(annotator)
        except UnknownAnnotator:
            raise HTTPException(status_code=401, detail="unknown annotator token")
        if task is None:
            return Response(status_code=204)
        return task

    @app.post("/api/clusters/{cluster_id}/rounds")
    def submit_round(cluster_id: int, body: dict):
        try:
            return server.submit_round(
                body["annotator"], cluster_id, list(body.get("checked", []))
            )
        except UnknownAnnotator:
            raise HTTPException(status_code=401, detail="unknown annotator token")
        except RoundRejected as exc:
            raise HTTPException(
                status_code=409,
                detail={"message": str(exc), "offending": exc.offending},
            )

    @app.get("/api/export")
    def export(annotator: str):
        try:
            tsv = server.export_edges(annotator)
        except UnknownAnnotator:
            raise HTTPException(status_code=401, detail="unknown annotator token")
        except RoundRejected as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return PlainTextResponse(
            tsv,
            headers={"Content-Disposition": "attachment; filename=edges.tsv"},
            media_type="text/tab-separated-values",
        )

    @app.get("/api/progress")
    def progress():
        p = server.progress()
        return {"per_annotator": p.per_annotator, "consistency": p.consistency}

    @app.get("/api/preview/{model_id}.xyz")
    def preview(model_id: str):
        if not config.preview_dir:
            raise HTTPException(status_code=404, detail="no preview directory configured")
        path = Path(config.preview_dir) / f"{model_id}.xyz"
        if not path.resolve().is_relative_to(Path(config.preview_dir).resolve()):
            raise HTTPException(status_code=404, detail="not found")
        if not path.exists():
            raise HTTPException(status_code=404, detail="not found")
        return PlainTextResponse(path.read_text(encoding="utf-8"))

    if config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True))

    return app
