"""HTTP service for run control, artifacts, live logs, and re-rendering.

Single-process in-memory registry; the artifact directory is the only
persistence, so a restarted server lists completed runs from disk.
Interactive rerenders always use the downsampled working volume; the
bounded render pool keeps concurrent requests from oversubscribing the
CPU.  Renders are pure, so identical requests return identical PNGs.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, Response, StreamingResponse

from .config import RunConfig
from .errors import AutovisError, ConfigError
from .pipeline import make_final_renderer, prepare_volume, run
from .render import Camera
from .transfer import tf_from_dict
from .viewsphere import Viewpoint, camera_for

RENDER_POOL_SIZE = 2
_FINISHED = ("done", "degraded", "failed")


class _RunEntry:
    def __init__(self, run_id: str, out_dir: str):
        self.run_id = run_id
        self.out_dir = out_dir
        self.state = "pending"
        self.error: str | None = None
        self.lock = threading.Lock()
        self.volume = None
        self.run_doc: dict | None = None

    def to_handle(self) -> dict:
        handle = {"run_id": self.run_id, "state": self.state,
                  "artifacts": self.artifact_names()}
        if self.error:
            handle["error"] = self.error
        return handle

    def artifact_names(self) -> list[str]:
        if not os.path.isdir(self.out_dir):
            return []
        names = []
        for root, _dirs, files in os.walk(self.out_dir):
            rel = os.path.relpath(root, self.out_dir)
            for f in sorted(files):
                names.append(f if rel == "." else os.path.join(rel, f))
        return sorted(names)

    def current_stage(self) -> str:
        """Most recent stage_start in the log, for mid-run status."""
        path = os.path.join(self.out_dir, "run_log.jsonl")
        stage = "pending"
        try:
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    try:
                        rec = json.loads(line)
                    except json.JSONDecodeError:
                        continue
                    if rec.get("event") == "stage_start":
                        stage = f"stage:{rec.get('stage')}"
        except OSError:
            pass
        return stage


def create_app(artifacts_root, run_defaults: RunConfig | None = None,
               responder=None) -> FastAPI:
    """Build the service around one artifacts root directory.

    ``responder`` is forwarded to mock providers of launched runs so
    tests can drive the pipeline without fixture files.
    """
    os.makedirs(artifacts_root, exist_ok=True)
    app = FastAPI(title="autovis")
    # the browser explorer is served from its own origin (local tool)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    registry: dict[str, _RunEntry] = {}
    registry_lock = threading.Lock()
    render_slots = threading.Semaphore(RENDER_POOL_SIZE)
    defaults = run_defaults or RunConfig()

    def rescan() -> None:
        for name in sorted(os.listdir(artifacts_root)):
            out_dir = os.path.join(artifacts_root, name)
            run_json = os.path.join(out_dir, "run.json")
            if not os.path.isfile(run_json):
                continue
            with registry_lock:
                if name in registry:
                    continue
                entry = _RunEntry(name, out_dir)
                try:
                    with open(run_json, encoding="utf-8") as fh:
                        doc = json.load(fh)
                    entry.state = doc.get("status", "failed")
                    entry.error = doc.get("error")
                except (OSError, json.JSONDecodeError):
                    entry.state = "failed"
                    entry.error = "unreadable run.json"
                registry[name] = entry

    rescan()

    def get_entry(run_id: str) -> _RunEntry:
        with registry_lock:
            entry = registry.get(run_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no run {run_id}")
        return entry

    @app.post("/runs", status_code=202)
    def start_run(body: dict):
        input_path = body.get("input")
        meta_path = body.get("meta")
        if not input_path or not meta_path:
            raise HTTPException(status_code=422,
                                detail="body needs input and meta paths")
        try:
            cfg = RunConfig.from_dict({**defaults.to_dict(),
                                       **body.get("config", {})})
        except (ConfigError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        if not os.path.exists(input_path) or not os.path.exists(meta_path):
            raise HTTPException(status_code=422,
                                detail="input or meta file not found")
        run_id = "run-" + uuid.uuid4().hex[:12]
        out_dir = os.path.join(artifacts_root, run_id)
        entry = _RunEntry(run_id, out_dir)
        with registry_lock:
            registry[run_id] = entry

        def worker():
            entry.state = "running"
            try:
                result = run(input_path, meta_path, cfg, out_dir,
                             responder=responder)
                entry.state = result.status
                entry.error = result.error
            except Exception as exc:  # registry must reflect any crash
                entry.state = "failed"
                entry.error = f"{type(exc).__name__}: {exc}"

        threading.Thread(target=worker, daemon=True).start()
        return entry.to_handle()

    @app.get("/runs")
    def list_runs():
        rescan()
        with registry_lock:
            return {"runs": [e.to_handle() for _, e in sorted(registry.items())]}

    @app.get("/runs/{run_id}")
    def get_status(run_id: str):
        entry = get_entry(run_id)
        handle = entry.to_handle()
        if entry.state == "running":
            handle["state"] = entry.current_stage()
        return handle

    @app.get("/runs/{run_id}/log")
    def stream_log(run_id: str):
        entry = get_entry(run_id)
        log_path = os.path.join(entry.out_dir, "run_log.jsonl")

        def events():
            offset = 0
            while True:
                finished = entry.state in _FINISHED
                chunk = ""
                try:
                    with open(log_path, encoding="utf-8") as fh:
                        fh.seek(offset)
                        chunk = fh.read()
                        offset = fh.tell()
                except OSError:
                    pass
                for line in chunk.splitlines():
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        seq = json.loads(line).get("seq", 0)
                    except json.JSONDecodeError:
                        seq = 0
                    yield f"id: {seq}\ndata: {line}\n\n"
                if finished:
                    yield "event: end\ndata: {}\n\n"
                    return
                time.sleep(0.05)

        return StreamingResponse(events(), media_type="text/event-stream")

    def load_run_context(entry: _RunEntry):
        """Volume + saved tf/views, cached per run after first use."""
        with entry.lock:
            if entry.volume is None:
                try:
                    with open(os.path.join(entry.out_dir, "run.json"),
                              encoding="utf-8") as fh:
                        run_doc = json.load(fh)
                    cfg = RunConfig.from_dict(run_doc["config"])
                    entry.volume = prepare_volume(run_doc["input"],
                                                  run_doc["meta"], cfg)
                    entry.run_doc = run_doc
                except (OSError, KeyError, AutovisError) as exc:
                    raise HTTPException(status_code=409,
                                        detail=f"run not renderable: {exc}"
                                        ) from exc
            return entry.volume, entry.run_doc

    @app.post("/runs/{run_id}/render")
    def rerender(run_id: str, body: dict):
        entry = get_entry(run_id)
        volume, run_doc = load_run_context(entry)
        try:
            with open(os.path.join(entry.out_dir, "views.json"),
                      encoding="utf-8") as fh:
                views_doc = json.load(fh)
            if "tf" in body:
                tf = tf_from_dict(body["tf"])
            else:
                with open(os.path.join(entry.out_dir, "tf.json"),
                          encoding="utf-8") as fh:
                    tf = tf_from_dict(json.load(fh))
            center = tuple(views_doc["sphere"]["center"])
            lattice = views_doc["lattice"]
            if "camera" in body:
                cam = Camera.from_dict(body["camera"])
            elif "camera_index" in body:
                idx = int(body["camera_index"])
                if not 0 <= idx < len(lattice):
                    raise ConfigError(f"camera_index {idx} outside lattice")
                cam = camera_for(Viewpoint.from_dict(lattice[idx]), center)
            else:
                idx = int(run_doc["final_view_index"])
                cam = camera_for(Viewpoint.from_dict(lattice[idx]), center)
            resolution = int(body.get("resolution", 256))
            if not 16 <= resolution <= 4096:
                raise ConfigError(f"resolution {resolution} outside [16, 4096]")
        except (ConfigError, KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except OSError as exc:
            raise HTTPException(status_code=409,
                                detail=f"run artifacts incomplete: {exc}"
                                ) from exc
        with render_slots:
            image = make_final_renderer(volume, tf)(cam, resolution,
                                                    resolution)
        return Response(content=image.to_png_bytes(), media_type="image/png")

    @app.get("/runs/{run_id}/artifacts")
    def list_artifacts(run_id: str):
        entry = get_entry(run_id)
        return {"run_id": run_id, "artifacts": entry.artifact_names()}

    @app.get("/runs/{run_id}/artifacts/{name:path}")
    def fetch_artifact(run_id: str, name: str):
        entry = get_entry(run_id)
        base = os.path.realpath(entry.out_dir)
        path = os.path.realpath(os.path.join(base, name))
        if not path.startswith(base + os.sep):
            raise HTTPException(status_code=404, detail="no such artifact")
        if not os.path.isfile(path):
            raise HTTPException(status_code=404, detail="no such artifact")
        return FileResponse(path)

    return app
