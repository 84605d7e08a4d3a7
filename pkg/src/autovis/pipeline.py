"""Four-stage agentic workflow: profile, forage, suggest TF, select views.

Stages are sequential; within a stage, renders and chats fan out under
the provider's concurrency bound and results are aggregated by sort
order, never by arrival.  Every stage persists its structured output
before the next stage starts, so a crashed run can resume at stage
granularity.  With the scripted mock provider the whole pipeline is a
pure function of (inputs, fixtures).
"""

from __future__ import annotations

import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .config import RunConfig, make_web_adapter
from .errors import AllEvaluationsFailed, ArtifactError, AutovisError
from .knowledge import KnowledgeIndex, RegionsOfInterest, forage
from .mllm import ChatRequest, Provider, is_failed, make_provider
from .prompts_loader import render_prompt
from .records import DataProfile, IsovalueRecord, ViewSelection
from .render import (Camera, Image, composite_mesh_layers, extract_isosurface,
                     four_view_cameras, grayscale_xray_tf, orthogonal_cameras,
                     render_dvr, render_mesh, render_mesh_layer)
from .transfer import (RampOpacity, TransferFunction, build_continuous_tf,
                       build_discrete_tf, default_band_width, export_tf,
                       label_isovalues, sample_isovalues, sample_rsvs,
                       tf_from_dict)
from .viewsphere import (Trajectory, camera_for, catmull_rom_path,
                         fibonacci_lattice, view_sphere)
from .volume import Volume, downsample, load_meta, load_raw, normalize

SCHEMA_VERSION = 1

FALLBACK_KEYWORDS = ["unknown volumetric structure"]

# deterministic fallback palette when the TF designer fails
_PALETTE = (
    (0.894, 0.102, 0.110), (0.216, 0.494, 0.722), (0.302, 0.686, 0.290),
    (0.596, 0.306, 0.639), (1.000, 0.498, 0.000), (0.800, 0.800, 0.200),
    (0.651, 0.337, 0.157), (0.969, 0.506, 0.749), (0.600, 0.600, 0.600),
)


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


class RunLog:
    """Append-only event log with monotone sequence numbers.

    Events carry a wall-clock ts field; everything else is a pure
    function of the run, so artifact comparisons strip ts only.
    """

    def __init__(self, path=None):
        self.path = path
        self.events: list[dict] = []
        self.degradations: list[str] = []
        self._seq = 0
        self._lock = threading.Lock()
        if path:
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
            # truncate: a fresh run owns its log
            with open(path, "w", encoding="utf-8"):
                pass

    def emit(self, event: str, **detail) -> None:
        with self._lock:
            rec = {"seq": self._seq, "ts": time.time(), "event": event}
            rec.update(detail)
            self._seq += 1
            self.events.append(rec)
            if self.path:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def fallback(self, what: str, **detail) -> None:
        with self._lock:
            self.degradations.append(what)
        self.emit("fallback", what=what, **detail)

    @property
    def degraded(self) -> bool:
        return bool(self.degradations)


def _argmax_first(values: list) -> int:
    """Index of the maximum, first occurrence winning ties."""
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


# -- stage 1: profiling and recognition ----------------------------------

def profile_and_recognize(v: Volume, provider: Provider, cfg: RunConfig,
                          log: RunLog | None = None) -> DataProfile:
    """Score N ramp settings over 6 orthogonal x-ray views, then recognize.

    One evaluator chat per ramp setting, one recognizer chat and one
    best-view chat on the winning setting's images: N+2 chats total.
    """
    log = log or RunLog()
    rsvs = sample_rsvs(v.v_min, v.v_max, cfg.n_rsv)
    cams = orthogonal_cameras(v)
    res = cfg.intermediate_resolution
    per_rsv_images: list[tuple[Image, ...]] = []
    evaluations: list[dict | None] = []
    for rsv in rsvs:
        tf = grayscale_xray_tf(RampOpacity(rsv=rsv, v_min=v.v_min, v_max=v.v_max))
        imgs = tuple(render_dvr(v, tf, cam, res, res,
                                workers=cfg.render_workers) for cam in cams)
        per_rsv_images.append(imgs)
        reply = provider.chat(ChatRequest(
            role_tag="evaluator",
            system_prompt=render_prompt("evaluator_system"),
            user_prompt=render_prompt("evaluator_user", count=len(imgs),
                                      rsv=_fmt(rsv), v_min=_fmt(v.v_min),
                                      v_max=_fmt(v.v_max)),
            images=imgs, temperature=cfg.temperature, schema_id="evaluation"))
        evaluations.append(None if is_failed(reply.parsed) else reply.parsed)
    if all(e is None for e in evaluations):
        raise AllEvaluationsFailed(
            f"all {len(rsvs)} ramp evaluations returned failed")
    overall = [(-1 if e is None else e["overall_score"]) for e in evaluations]
    best_idx = _argmax_first(overall)
    winning = per_rsv_images[best_idx]

    reply = provider.chat(ChatRequest(
        role_tag="recognizer",
        system_prompt=render_prompt("recognizer_system"),
        user_prompt=render_prompt("recognizer_user", count=len(winning)),
        images=winning, temperature=cfg.temperature, schema_id="recognition"))
    fallback_used = False
    if is_failed(reply.parsed):
        keywords, object_type = list(FALLBACK_KEYWORDS), "simulated"
        fallback_used = True
        log.fallback("recognition_failed")
    else:
        keywords = reply.parsed["keywords"]
        object_type = reply.parsed["object_type"]

    reply = provider.chat(ChatRequest(
        role_tag="evaluator",
        system_prompt=render_prompt("evaluator_system"),
        user_prompt=render_prompt("view_pick_user", count=len(winning)),
        images=winning, temperature=cfg.temperature, schema_id="evaluation"))
    if is_failed(reply.parsed):
        best_view = 0
        fallback_used = True
        log.fallback("view_pick_failed")
    else:
        view_scores = reply.parsed["view_scores"]
        best_view = _argmax_first(view_scores)

    return DataProfile(
        object_keywords=keywords, object_type=object_type,
        best_rsv=rsvs[best_idx], best_rsv_score=max(overall[best_idx], 1),
        best_initial_view=best_view, rsv_candidates=rsvs,
        rsv_scores=[max(o, 0) for o in overall], fallback_used=fallback_used)


# -- stage 3: transfer-function suggestion --------------------------------

def _fallback_assignment(index: int, isovalue: float, v_min: float,
                         v_max: float, object_type: str) -> dict:
    t = (isovalue - v_min) / (v_max - v_min) if v_max > v_min else 0.0
    if object_type == "simulated":
        g = 1.0 - t
        return {"color": [g, g, g], "opacity": t, "accepted": True}
    return {"color": list(_PALETTE[index % len(_PALETTE)]),
            "opacity": 0.15 + 0.7 * t, "accepted": True}


def _records_brief(records: list[IsovalueRecord]) -> str:
    rows = []
    for i, r in enumerate(records):
        rows.append({
            "isovalue_index": i, "isovalue": float(_fmt(r.isovalue)),
            "geometric_role": r.geometric_role,
            "scientific_salience": r.scientific_salience,
            "occlusion_risk": r.occlusion_risk, "confidence": r.confidence,
            "shape_summary": r.shape_summary,
        })
    return json.dumps(rows, indent=2)


def suggest_tf(v: Volume, profile: DataProfile, roi: RegionsOfInterest,
               provider: Provider, cfg: RunConfig, log: RunLog | None = None
               ) -> tuple[list[IsovalueRecord], TransferFunction]:
    """Swarm semantic analysis per isovalue, then one consolidating design.

    M semantic-analyzer chats run concurrently and aggregate sorted by
    isovalue; one TF-designer chat assigns colors and opacities.
    Empirical data drops low-confidence records, fine-tunes the
    survivors, and yields a discrete band TF; simulated data yields a
    continuous TF over all records.
    """
    log = log or RunLog()
    if v.meta.value_kind == "label":
        isovalues = label_isovalues(v)
    else:
        isovalues = sample_isovalues(v.v_min, v.v_max, cfg.m_isovalues)
    meshes = [extract_isosurface(v, iso) for iso in isovalues]
    cams = four_view_cameras(v)
    res = cfg.intermediate_resolution
    images = [tuple(render_mesh(mesh, (1.0, 1.0, 1.0), cam, res, res)
                    for cam in cams) for mesh in meshes]
    object_str = ", ".join(profile.object_keywords)
    roi_str = "; ".join(roi.keywords) if roi.keywords else "(none)"

    def analyze(i: int):
        return provider.chat(ChatRequest(
            role_tag="semantic_analyzer",
            system_prompt=render_prompt("semantic_analyzer_system"),
            user_prompt=render_prompt(
                "semantic_analyzer_user", count=len(cams),
                isovalue=_fmt(isovalues[i]), index=i + 1, total=len(isovalues),
                v_min=_fmt(v.v_min), v_max=_fmt(v.v_max),
                object=object_str, roi=roi_str),
            images=images[i], temperature=cfg.temperature,
            schema_id="semantic_analysis"))

    with ThreadPoolExecutor(max_workers=cfg.provider.max_concurrency) as pool:
        replies = list(pool.map(analyze, range(len(isovalues))))

    records: list[IsovalueRecord] = []
    for i, (iso, reply) in enumerate(zip(isovalues, replies)):
        if is_failed(reply.parsed):
            log.fallback(f"sa_failed_{i}")
            records.append(IsovalueRecord(
                isovalue=iso, geometric_role="unknown", scientific_salience=1,
                occlusion_risk=1, confidence=1, shape_summary="failed",
                explanation="semantic analysis returned failed"))
        else:
            records.append(IsovalueRecord(isovalue=iso, **reply.parsed))

    reply = provider.chat(ChatRequest(
        role_tag="tf_designer",
        system_prompt=render_prompt("tf_designer_system"),
        user_prompt=render_prompt("tf_designer_user", object=object_str,
                                  object_type=profile.object_type, roi=roi_str,
                                  records=_records_brief(records)),
        temperature=cfg.temperature, schema_id="tf_design"))
    assignments: dict[int, dict] = {}
    if is_failed(reply.parsed):
        log.fallback("tfd_failed")
    else:
        for row in reply.parsed["assignments"]:
            if row["isovalue_index"] < len(records):
                assignments.setdefault(row["isovalue_index"], row)
    for i, rec in enumerate(records):
        a = assignments.get(i)
        if a is None:
            a = _fallback_assignment(i, rec.isovalue, v.v_min, v.v_max,
                                     profile.object_type)
            if not is_failed(reply.parsed):
                log.fallback(f"tfd_missing_{i}")
        rec.assigned_color = tuple(a["color"])
        rec.assigned_opacity = float(a["opacity"])
        rec.accepted = bool(a["accepted"])

    if profile.object_type == "empirical":
        for rec in records:
            if rec.confidence < cfg.confidence_threshold:
                rec.accepted = False
            if not rec.accepted:
                rec.assigned_opacity = 0.0
        target_roi = roi.keywords[0] if roi.keywords else object_str
        for i, rec in enumerate(records):
            if not rec.accepted:
                continue
            v_prev = isovalues[i - 1] if i > 0 else v.v_min
            v_next = isovalues[i + 1] if i < len(isovalues) - 1 else v.v_max
            if not v_prev < rec.isovalue < v_next:
                continue  # label sets can touch the range bounds
            rec.tuned_isovalue = fine_tune_isovalue(
                v, rec, (v_prev, v_next), provider, cfg,
                target=f"{rec.geometric_role} of {target_roi}", log=log)
        tf = build_discrete_tf(
            records, default_band_width(v.v_min, v.v_max, len(isovalues)))
    else:
        tf = build_continuous_tf(records)
    return records, tf


def fine_tune_isovalue(v: Volume, record: IsovalueRecord,
                       neighbors: tuple[float, float], provider: Provider,
                       cfg: RunConfig, target: str = "the structure",
                       log: RunLog | None = None) -> float:
    """Comparative hill climb on the isovalue within neighbor bounds.

    Judged moves of step (v_next - v_prev) / step_divisor: each pass
    tries both directions, moving while the judge prefers the new
    rendering; a pass that moved halves the step and repeats.  Stops
    when a pass makes no move, after max_judgments comparisons, or when
    the step falls below (v_next - v_prev) / stop_divisor.  A failed
    judge ends tuning at the original isovalue.
    """
    log = log or RunLog()
    v_prev, v_next = float(neighbors[0]), float(neighbors[1])
    if not v_prev < record.isovalue < v_next:
        raise ArtifactError(
            f"isovalue {record.isovalue} outside neighbor bounds "
            f"({v_prev}, {v_next})")
    span = v_next - v_prev
    step = span / cfg.ift_step_divisor
    floor = span / cfg.ift_stop_divisor
    cam = four_view_cameras(v)[3]  # diagonal view shows the most geometry
    res = cfg.intermediate_resolution
    render_cache: dict[float, Image] = {}

    def shot(iso: float) -> Image:
        if iso not in render_cache:
            render_cache[iso] = render_mesh(extract_isosurface(v, iso),
                                            (1.0, 1.0, 1.0), cam, res, res)
        return render_cache[iso]

    current = record.isovalue
    judgments = 0
    while judgments < cfg.ift_max_judgments and step >= floor:
        moved = False
        for direction in (1.0, -1.0):
            while judgments < cfg.ift_max_judgments:
                cand = min(max(current + direction * step, v_prev), v_next)
                if cand == current:
                    break
                reply = provider.chat(ChatRequest(
                    role_tag="ift_judge",
                    system_prompt=render_prompt("ift_judge_system"),
                    user_prompt=render_prompt("ift_judge_user",
                                              prior_isovalue=_fmt(current),
                                              new_isovalue=_fmt(cand),
                                              target=target),
                    images=(shot(current), shot(cand)),
                    temperature=cfg.temperature, schema_id="ift_judgment"))
                judgments += 1
                if is_failed(reply.parsed):
                    log.fallback("ift_judge_failed",
                                 isovalue=record.isovalue)
                    return record.isovalue
                if reply.parsed["better"] == "new":
                    current = cand
                    moved = True
                else:
                    break
            if judgments >= cfg.ift_max_judgments:
                break
        if not moved:
            break
        step /= 2.0
    return min(max(current, v_prev), v_next)


# -- stage 4: view selection ----------------------------------------------

def make_final_renderer(v: Volume, tf: TransferFunction):
    """Renderer for the final method: DVR for continuous TFs, shaded
    surface compositing for discrete ones.  Meshes are extracted once."""
    if tf.mode == "continuous":
        def render_one(cam: Camera, w: int, h: int, workers: int = 1) -> Image:
            return render_dvr(v, tf, cam, w, h, workers=workers)
        return render_one
    surfaces = [(extract_isosurface(v, value), color, opacity)
                for value, color, opacity in tf.control_points if opacity > 0]

    def render_one(cam: Camera, w: int, h: int, workers: int = 1) -> Image:
        layers = []
        for mesh, color, opacity in surfaces:
            depth, shade = render_mesh_layer(mesh, cam, w, h)
            layers.append((depth, shade, color, opacity))
        return composite_mesh_layers(layers, w, h)
    return render_one


def _strided_anchors(k: int, count: int) -> list[int]:
    stride = max(1, k // count)
    return list(range(0, k, stride))[:count]


def select_views(v: Volume, tf: TransferFunction, profile: DataProfile,
                 roi: RegionsOfInterest, provider: Provider, cfg: RunConfig,
                 log: RunLog | None = None
                 ) -> tuple[ViewSelection, Trajectory]:
    """Rank lattice viewpoints with one selector chat and densify anchors."""
    log = log or RunLog()
    center, radius = view_sphere(v)
    lattice = fibonacci_lattice(cfg.k_viewpoints, center, radius)
    render_one = make_final_renderer(v, tf)
    res = cfg.intermediate_resolution
    images = tuple(render_one(camera_for(vp, center), res, res,
                              workers=cfg.render_workers) for vp in lattice)
    k = cfg.k_viewpoints
    reply = provider.chat(ChatRequest(
        role_tag="view_selector",
        system_prompt=render_prompt("view_selector_system"),
        user_prompt=render_prompt(
            "view_selector_user", count=k, last=k - 1,
            object=", ".join(profile.object_keywords),
            roi="; ".join(roi.keywords) if roi.keywords else "(none)",
            anchor_hint=min(cfg.anchor_hint, k)),
        images=images, temperature=cfg.temperature, schema_id="view_selection"))

    fallback_used = False
    if is_failed(reply.parsed):
        ranked = list(range(k))
        anchors = _strided_anchors(k, cfg.fallback_anchor_count)
        avoid: list[int] = []
        fallback_used = True
        log.fallback("selector_failed")
    else:
        def clean(lst: list[int]) -> list[int]:
            seen: set[int] = set()
            out = []
            for i in lst:
                if 0 <= i < k and i not in seen:
                    seen.add(i)
                    out.append(i)
            return out

        ranked = clean(reply.parsed["ranked"])
        anchors = clean(reply.parsed["anchors"])
        avoid = clean(reply.parsed["avoid"])
        repaired = (len(ranked) != len(reply.parsed["ranked"])
                    or len(anchors) != len(reply.parsed["anchors"])
                    or len(avoid) != len(reply.parsed["avoid"]))
        in_avoid = set(avoid)
        kept = [a for a in anchors if a not in in_avoid]
        repaired = repaired or len(kept) != len(anchors)
        anchors = kept
        if repaired:
            fallback_used = True
            log.fallback("selection_repaired")
        if len(anchors) < 2:
            anchors = _strided_anchors(k, cfg.fallback_anchor_count)
            anchors = [a for a in anchors if a not in in_avoid]
            if len(anchors) < 2:
                anchors = _strided_anchors(k, cfg.fallback_anchor_count)
                avoid = [i for i in avoid if i not in set(anchors)]
            fallback_used = True
            log.fallback("anchors_fallback")
    selection = ViewSelection(ranked=ranked, anchors=anchors, avoid=avoid,
                              fallback_used=fallback_used)
    trajectory = catmull_rom_path([lattice[a] for a in anchors],
                                  cfg.samples_per_segment, center, radius,
                                  closed=cfg.closed_trajectory)
    return selection, trajectory


# -- full run ---------------------------------------------------------------

@dataclass
class RunArtifacts:
    """Outcome of one pipeline run over an artifact directory."""

    out_dir: str
    status: str  # "done" | "degraded" | "failed"
    error: str | None = None
    paths: dict = field(default_factory=dict)
    census: dict = field(default_factory=dict)
    degradations: list = field(default_factory=list)


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def prepare_volume(input_path, meta_path, cfg: RunConfig) -> Volume:
    """Shared load step: raw + sidecar, downsample, normalize.

    Label volumes skip normalization so their discrete ids survive.
    """
    meta = load_meta(meta_path)
    v = load_raw(input_path, meta)
    v = downsample(v, cfg.downsample_target)
    if v.meta.value_kind != "label":
        v = normalize(v)
    return v


def run(input_path, meta_path, cfg: RunConfig, out_dir,
        provider: Provider | None = None, resume: bool = False,
        responder=None) -> RunArtifacts:
    """Execute the full workflow and persist the artifact directory.

    Unrecoverable failures (unreadable input, every evaluation failed)
    write a machine-readable failure run.json and report status
    "failed"; recoverable fallbacks downgrade status to "degraded".
    """
    os.makedirs(out_dir, exist_ok=True)
    log = RunLog(os.path.join(out_dir, "run_log.jsonl"))
    if provider is None:
        provider = make_provider(cfg.provider, responder=responder)
    paths = {name: os.path.join(out_dir, name) for name in (
        "profile.json", "keywords.json", "records.json", "tf.json", "tf.ct",
        "views.json", "trajectory.json", "final.png", "run.json")}

    def stage(name, artifact, compute, save, load):
        """Persist-before-next-stage wrapper with optional resume."""
        path = paths.get(artifact, os.path.join(out_dir, artifact))
        if resume and os.path.exists(path):
            log.emit("stage_resumed", stage=name, artifact=artifact)
            return load(path)
        log.emit("stage_start", stage=name)
        value = compute()
        save(path, value)
        log.emit("stage_done", stage=name, artifact=artifact)
        return value

    try:
        log.emit("run_start", input=str(input_path))
        v = prepare_volume(input_path, meta_path, cfg)
        log.emit("volume_ready", dims=list(v.meta.dims),
                 value_range=[float(v.v_min), float(v.v_max)])

        profile = stage(
            "profile", "profile.json",
            lambda: profile_and_recognize(v, provider, cfg, log),
            lambda p, prof: _write_json(
                p, {"schema_version": SCHEMA_VERSION, **prof.to_dict()}),
            lambda p: DataProfile.from_dict(_read_json(p)))

        kb = KnowledgeIndex.load(cfg.kb_path) if cfg.kb_path else None
        adapter = make_web_adapter(cfg.web_adapter)
        roi = stage(
            "forage", "keywords.json",
            lambda: forage(profile.object_keywords, kb, provider,
                           adapter=adapter, k=cfg.kb_top_k,
                           temperature=cfg.temperature),
            lambda p, r: _write_json(
                p, {"schema_version": SCHEMA_VERSION,
                    "object_keywords": list(profile.object_keywords),
                    "regions_of_interest": r.to_dict()}),
            lambda p: RegionsOfInterest.from_dict(
                _read_json(p)["regions_of_interest"]))

        def compute_tf():
            return suggest_tf(v, profile, roi, provider, cfg, log)

        def save_tf(_path, value):
            records, tf = value
            _write_json(paths["records.json"],
                        {"schema_version": SCHEMA_VERSION,
                         "records": [r.to_dict() for r in records]})
            with open(paths["tf.json"], "wb") as fh:
                fh.write(export_tf(tf, "structured"))
            with open(paths["tf.ct"], "wb") as fh:
                fh.write(export_tf(tf, "ct"))

        def load_tf(_path):
            records = [IsovalueRecord.from_dict(d)
                       for d in _read_json(paths["records.json"])["records"]]
            return records, tf_from_dict(_read_json(paths["tf.json"]))

        records, tf = stage("suggest_tf", "tf.json", compute_tf, save_tf,
                            load_tf)

        center, radius = view_sphere(v)
        lattice = fibonacci_lattice(cfg.k_viewpoints, center, radius)

        def compute_views():
            return select_views(v, tf, profile, roi, provider, cfg, log)

        def save_views(_path, value):
            selection, trajectory = value
            _write_json(paths["views.json"], {
                "schema_version": SCHEMA_VERSION,
                "sphere": {"center": [float(c) for c in center],
                           "radius": float(radius)},
                "intermediate_resolution": cfg.intermediate_resolution,
                "lattice": [vp.to_dict() for vp in lattice],
                "selection": selection.to_dict(),
            })
            _write_json(paths["trajectory.json"],
                        {"schema_version": SCHEMA_VERSION,
                         **trajectory.to_dict()})

        def load_views(_path):
            sel = ViewSelection.from_dict(_read_json(paths["views.json"])
                                          ["selection"])
            traj = Trajectory.from_dict(_read_json(paths["trajectory.json"]))
            return sel, traj

        selection, trajectory = stage("select_views", "views.json",
                                      compute_views, save_views, load_views)

        render_one = make_final_renderer(v, tf)
        if selection.ranked:
            final_index = selection.ranked[0]
        elif selection.anchors:
            final_index = selection.anchors[0]
        else:
            final_index = 0
        final_cam = camera_for(lattice[final_index], center)

        def save_final(path, image):
            image.save(path)

        def load_final(path):
            with open(path, "rb") as fh:
                return Image.from_png_bytes(fh.read())

        stage("final_render", "final.png",
              lambda: render_one(final_cam, cfg.output_resolution,
                                 cfg.output_resolution,
                                 workers=cfg.render_workers),
              save_final, load_final)

        if cfg.animate:
            frames_dir = os.path.join(out_dir, "frames")
            os.makedirs(frames_dir, exist_ok=True)
            log.emit("stage_start", stage="frames")
            poses = trajectory.dense_path[::cfg.frame_stride]
            for n, cam in enumerate(poses):
                frame = render_one(cam, cfg.intermediate_resolution,
                                   cfg.intermediate_resolution,
                                   workers=cfg.render_workers)
                frame.save(os.path.join(frames_dir, f"frame_{n:04d}.png"))
            log.emit("stage_done", stage="frames", count=len(poses))
            paths["frames"] = frames_dir

        census = {
            "total": provider.total_usage(),
            "by_role": {tag: dict(row)
                        for tag, row in sorted(provider.usage.items())},
            "chats": sum(row["calls"] for tag, row in provider.usage.items()
                         if tag != "embedding"),
        }
        status = "degraded" if log.degraded else "done"
        _write_json(paths["run.json"], {
            "schema_version": SCHEMA_VERSION,
            "status": status,
            "input": str(input_path),
            "meta": str(meta_path),
            "final_view_index": final_index,
            "config": cfg.to_dict(),
            "census": census,
            "degradations": list(log.degradations),
        })
        log.emit("run_done", status=status)
        return RunArtifacts(out_dir=str(out_dir), status=status, paths=paths,
                            census=census, degradations=list(log.degradations))
    except (AutovisError, OSError) as exc:
        error = f"{type(exc).__name__}: {exc}"
        _write_json(paths["run.json"], {
            "schema_version": SCHEMA_VERSION, "status": "failed",
            "input": str(input_path), "meta": str(meta_path), "error": error,
            "config": cfg.to_dict(),
        })
        log.emit("run_failed", error=error)
        return RunArtifacts(out_dir=str(out_dir), status="failed", error=error,
                            degradations=list(log.degradations))
