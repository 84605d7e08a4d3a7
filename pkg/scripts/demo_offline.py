#!/usr/bin/env python3
"""Offline end-to-end demo: record a scripted agent run, then replay it.

No network and no real model. A deterministic responder stands in for
the multimodal model; the record pass saves every exchange under
<out>/fixtures, and the replay pass answers purely from those files.
The two artifact directories must match byte for byte (timestamps in
run_log.jsonl excluded), which is the same reproducibility contract the
test suite enforces.
"""

import argparse
import hashlib
import json
import os
import re
import sys

from autovis.config import RunConfig
from autovis.mllm import ProviderConfig
from autovis.pipeline import run
from autovis.volume import nested_shells, save_meta, save_raw

PALETTE = [
    [0.84, 0.19, 0.15], [0.99, 0.68, 0.38], [1.00, 1.00, 0.75],
    [0.67, 0.85, 0.91], [0.27, 0.46, 0.71], [0.46, 0.20, 0.58],
]


def _h(text: str) -> int:
    return int(hashlib.sha256(text.encode()).hexdigest(), 16)


def scripted_responder(req) -> str:
    """Schema-valid reply for every agent role, pure in the request."""
    tag = req.role_tag
    h = _h(req.user_prompt)
    if tag == "evaluator":
        if "initial viewpoint" in req.user_prompt:
            return json.dumps({"overall_score": 7,
                               "view_scores": [3, 6, 8, 5, 4, 2]})
        return json.dumps({"overall_score": 1 + (h % 10),
                           "view_scores": [1 + ((h >> (8 * i)) % 10)
                                           for i in range(6)]})
    if tag == "recognizer":
        return json.dumps({"keywords": ["concentric shells", "layered density"],
                           "object_type": "simulated"})
    if tag == "forager_summary":
        return json.dumps({"keywords": [
            {"keyword": "shell boundary", "source": "model"},
            {"keyword": "nested interfaces", "source": "model"},
        ]})
    if tag == "semantic_analyzer":
        idx = int(re.search(r"isovalue (\d+) of", req.user_prompt).group(1)) - 1
        return json.dumps({
            "geometric_role": ["outer shell", "mid shell", "inner core"][idx % 3],
            "scientific_salience": 5 + (idx % 5),
            "occlusion_risk": 1 + (idx % 8),
            "confidence": 5 + (idx % 5),
            "shape_summary": f"closed surface {idx}",
            "explanation": "scripted demo analysis",
        })
    if tag == "tf_designer":
        count = req.user_prompt.count('"isovalue_index"')
        return json.dumps({"assignments": [
            {"isovalue_index": i, "color": PALETTE[i % len(PALETTE)],
             "opacity": round(0.1 + 0.1 * i, 4), "accepted": True}
            for i in range(count)]})
    if tag == "ift_judge":
        return json.dumps({"better": "prior"})
    if tag == "view_selector":
        k = int(re.search(r"viewpoints 0 to (\d+)", req.user_prompt).group(1)) + 1
        stride = max(1, k // 5)
        return json.dumps({
            "ranked": sorted(range(k), key=lambda i: ((i * 5) % k, i)),
            "anchors": list(range(0, k, stride))[:5],
            "avoid": [],
        })
    raise RuntimeError(f"unexpected role {tag}")


def demo_config(fixtures_dir: str) -> RunConfig:
    return RunConfig(
        n_rsv=3, m_isovalues=5, k_viewpoints=12,
        intermediate_resolution=48, output_resolution=160,
        downsample_target=48, samples_per_segment=12, render_workers=2,
        provider=ProviderConfig(kind="scripted_mock",
                                fixtures_dir=fixtures_dir))


def _tree(root: str) -> dict:
    out = {}
    for base, _dirs, names in os.walk(root):
        for name in names:
            path = os.path.join(base, name)
            with open(path, "rb") as fh:
                out[os.path.relpath(path, root)] = fh.read()
    return out


def _comparable(rel: str, payload: bytes) -> bytes:
    if not rel.endswith("run_log.jsonl"):
        return payload
    lines = []
    for line in payload.decode("utf-8").splitlines():
        doc = json.loads(line)
        doc.pop("ts", None)
        lines.append(json.dumps(doc, sort_keys=True))
    return "\n".join(lines).encode("utf-8")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_out", help="working directory")
    ap.add_argument("--size", type=int, default=48, help="volume edge length")
    args = ap.parse_args()
    root = os.path.abspath(args.out)
    if os.path.exists(root):
        print(f"demo_offline: {root} already exists, remove it first",
              file=sys.stderr)
        return 2
    os.makedirs(root)

    v = nested_shells(args.size)
    raw = os.path.join(root, "shells.raw")
    meta = os.path.join(root, "shells.json")
    save_raw(v, raw)
    save_meta(v.meta, meta)
    print(f"volume   {raw}")

    cfg = demo_config(os.path.join(root, "fixtures"))
    record_dir = os.path.join(root, "runs", "record")
    replay_dir = os.path.join(root, "runs", "replay")

    rec = run(raw, meta, cfg, record_dir, responder=scripted_responder)
    print(f"record   {record_dir}  status={rec.status} "
          f"chats={rec.census['chats']}")
    rep = run(raw, meta, cfg, replay_dir)
    print(f"replay   {replay_dir}  status={rep.status} "
          f"chats={rep.census['chats']}")

    a, b = _tree(record_dir), _tree(replay_dir)
    if set(a) != set(b):
        print("FAIL: artifact inventories differ", file=sys.stderr)
        return 1
    diffs = [rel for rel in sorted(a)
             if _comparable(rel, a[rel]) != _comparable(rel, b[rel])]
    if diffs:
        print(f"FAIL: artifacts differ: {diffs}", file=sys.stderr)
        return 1
    print(f"identical  {len(a)} files match byte for byte (ts excluded)")
    for tag, row in sorted(rec.census["by_role"].items()):
        print(f"  {tag:18s} calls={row['calls']}")
    print("serve the results with:")
    print(f"  autovis serve --artifacts-root {os.path.join(root, 'runs')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
