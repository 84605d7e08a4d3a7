"""Command-line entry point.

Commands: run, kb build, render, serve, export-tf.  Exit codes: 0
success, 2 recoverable degradation (fallbacks used), 1 abort, 64 usage
error, 66 unreadable artifact directory.  Configuration precedence is
env < file < flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .config import RunConfig, load_run_config
from .errors import AutovisError, ConfigError
from .knowledge import build_index, chunk_document
from .mllm import ProviderConfig, make_provider
from .pipeline import make_final_renderer, prepare_volume, run
from .render import Camera
from .transfer import export_tf, import_tf, tf_from_dict
from .viewsphere import Viewpoint, camera_for

EXIT_OK = 0
EXIT_ABORT = 1
EXIT_DEGRADED = 2
EXIT_USAGE = 64
EXIT_BAD_ARTIFACTS = 66


class _Parser(argparse.ArgumentParser):
    """argparse with the usage-error exit code this tool promises."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    p = _Parser(prog="autovis",
                description="Autonomous visualization agent for raw volumes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    runp = sub.add_parser("run", help="execute the full pipeline")
    runp.add_argument("--input", required=True, help="raw volume file")
    runp.add_argument("--meta", required=True, help="sidecar meta JSON")
    runp.add_argument("--out", required=True, help="artifact directory")
    runp.add_argument("--config", help="JSON config file")
    runp.add_argument("--resume", action="store_true",
                      help="reuse stage artifacts already in --out")
    for name in ("n-rsv", "m-isovalues", "k-viewpoints",
                 "intermediate-resolution", "output-resolution",
                 "downsample-target", "samples-per-segment",
                 "confidence-threshold", "render-workers"):
        runp.add_argument(f"--{name}", type=int)
    runp.add_argument("--temperature", type=float)
    runp.add_argument("--kb-path", help="knowledge index directory")
    runp.add_argument("--web-adapter",
                      help="canned-results JSON, or 'unavailable'")
    runp.add_argument("--animate", action="store_true", default=None)
    runp.add_argument("--provider-kind",
                      choices=("scripted_mock", "remote_http"))
    runp.add_argument("--endpoint", help="remote provider base URL")
    runp.add_argument("--model", help="remote model name")
    runp.add_argument("--fixtures", help="mock fixture directory")

    kbp = sub.add_parser("kb", help="knowledge-base maintenance")
    kbsub = kbp.add_subparsers(dest="kb_command", required=True,
                               parser_class=_Parser)
    kbb = kbsub.add_parser("build", help="chunk and embed a docs directory")
    kbb.add_argument("--docs", required=True, help="directory of .md files")
    kbb.add_argument("--out", required=True, help="index output directory")
    kbb.add_argument("--config", help="JSON config file (provider settings)")
    kbb.add_argument("--chunk-size", type=int, default=1000)
    kbb.add_argument("--overlap", type=int, default=200)

    rnd = sub.add_parser("render", help="re-render from saved artifacts")
    rnd.add_argument("--artifacts", required=True, help="artifact directory")
    rnd.add_argument("--out", help="output PNG (default render.png inside)")
    rnd.add_argument("--camera-index", type=int,
                     help="lattice viewpoint index override")
    rnd.add_argument("--camera-json", help="camera pose JSON file override")
    rnd.add_argument("--resolution", type=int, help="square output resolution")
    rnd.add_argument("--tf", help="transfer function JSON file override")
    rnd.add_argument("--workers", type=int, default=1)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--artifacts-root", required=True,
                     help="directory holding one subdirectory per run")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--config", help="JSON config file for new runs")

    exp = sub.add_parser("export-tf", help="convert a saved transfer function")
    exp.add_argument("--tf", required=True, help="tf.json or tf.ct input")
    exp.add_argument("--format", required=True, choices=("json", "ct"))
    exp.add_argument("--out", required=True, help="output file")
    return p


def _run_flag_overrides(args) -> dict:
    names = ("n_rsv", "m_isovalues", "k_viewpoints", "intermediate_resolution",
             "output_resolution", "downsample_target", "samples_per_segment",
             "confidence_threshold", "render_workers", "temperature",
             "kb_path", "web_adapter", "animate")
    return {n: getattr(args, n) for n in names if getattr(args, n) is not None}


def cmd_run(args) -> int:
    try:
        cfg = load_run_config(args.config, _run_flag_overrides(args))
        provider_overrides = {k: v for k, v in (
            ("kind", args.provider_kind), ("endpoint", args.endpoint),
            ("model_name", args.model), ("fixtures_dir", args.fixtures),
        ) if v is not None}
        if provider_overrides:
            merged = dict(cfg.provider.to_dict())
            merged.update(provider_overrides)
            cfg = replace(cfg, provider=ProviderConfig.from_dict(merged))
    except ConfigError as exc:
        print(f"autovis run: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for path, what in ((args.input, "input"), (args.meta, "meta")):
        if not os.path.exists(path):
            print(f"autovis run: {what} file not found: {path}",
                  file=sys.stderr)
            return EXIT_USAGE
    artifacts = run(args.input, args.meta, cfg, args.out, resume=args.resume)
    print(artifacts.out_dir)
    if artifacts.status == "failed":
        print(f"run failed: {artifacts.error}", file=sys.stderr)
        return EXIT_ABORT
    if artifacts.status == "degraded":
        print("run degraded: " + ", ".join(artifacts.degradations),
              file=sys.stderr)
        return EXIT_DEGRADED
    return EXIT_OK


def cmd_kb_build(args) -> int:
    try:
        cfg = load_run_config(args.config, {})
    except ConfigError as exc:
        print(f"autovis kb build: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not os.path.isdir(args.docs):
        print(f"autovis kb build: not a directory: {args.docs}",
              file=sys.stderr)
        return EXIT_USAGE
    provider = make_provider(cfg.provider)
    chunks = []
    for name in sorted(os.listdir(args.docs)):
        if not name.endswith(".md"):
            continue
        with open(os.path.join(args.docs, name), encoding="utf-8") as fh:
            chunks.extend(chunk_document(fh.read(), doc_id=name,
                                         chunk_size=args.chunk_size,
                                         overlap=args.overlap))
    index = build_index(chunks, provider)
    index.save(args.out)
    print(f"{args.out}: {len(index)} chunks, dim {index.dim}")
    return EXIT_OK


def _load_artifact_json(artifacts_dir: str, name: str) -> dict:
    path = os.path.join(artifacts_dir, name)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_render(args) -> int:
    try:
        run_doc = _load_artifact_json(args.artifacts, "run.json")
        tf_doc = _load_artifact_json(args.artifacts, "tf.json")
        views_doc = _load_artifact_json(args.artifacts, "views.json")
        cfg = RunConfig.from_dict(run_doc["config"])
    except (OSError, KeyError, ValueError, AutovisError) as exc:
        print(f"autovis render: bad artifact directory {args.artifacts}: "
              f"{exc}", file=sys.stderr)
        return EXIT_BAD_ARTIFACTS
    try:
        if args.tf:
            with open(args.tf, encoding="utf-8") as fh:
                tf_doc = json.load(fh)
        tf = tf_from_dict(tf_doc)
        lattice = [Viewpoint.from_dict(d) for d in views_doc["lattice"]]
        center = tuple(views_doc["sphere"]["center"])
        if args.camera_json:
            with open(args.camera_json, encoding="utf-8") as fh:
                cam = Camera.from_dict(json.load(fh))
        elif args.camera_index is not None:
            if not 0 <= args.camera_index < len(lattice):
                print(f"autovis render: camera index {args.camera_index} "
                      f"outside lattice of {len(lattice)}", file=sys.stderr)
                return EXIT_USAGE
            cam = camera_for(lattice[args.camera_index], center)
        else:
            cam = camera_for(lattice[int(run_doc["final_view_index"])], center)
        resolution = args.resolution or cfg.output_resolution
        v = prepare_volume(run_doc["input"], run_doc["meta"], cfg)
        image = make_final_renderer(v, tf)(cam, resolution, resolution,
                                           workers=args.workers)
    except (OSError, AutovisError) as exc:
        print(f"autovis render: {exc}", file=sys.stderr)
        return EXIT_ABORT
    out = args.out or os.path.join(args.artifacts, "render.png")
    image.save(out)
    print(out)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    try:
        cfg = load_run_config(args.config, {})
    except ConfigError as exc:
        print(f"autovis serve: {exc}", file=sys.stderr)
        return EXIT_USAGE
    app = create_app(args.artifacts_root, run_defaults=cfg)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def cmd_export_tf(args) -> int:
    try:
        with open(args.tf, "rb") as fh:
            data = fh.read()
        source = "ct" if args.tf.endswith(".ct") else "structured"
        tf = import_tf(data, source)
    except (OSError, AutovisError, ValueError) as exc:
        print(f"autovis export-tf: cannot read {args.tf}: {exc}",
              file=sys.stderr)
        return EXIT_USAGE
    target = "ct" if args.format == "ct" else "structured"
    with open(args.out, "wb") as fh:
        fh.write(export_tf(tf, target))
    print(args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "kb":
        return cmd_kb_build(args)
    if args.command == "render":
        return cmd_render(args)
    if args.command == "serve":
        return cmd_serve(args)
    if args.command == "export-tf":
        return cmd_export_tf(args)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
