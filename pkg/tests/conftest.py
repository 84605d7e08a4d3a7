"""Shared fixtures: bundled volumes, fast configs, scripted responders.

The scripted responder is a pure function of the request, so recording
it into a fixture directory and replaying from those files must agree.
"""

import hashlib
import json
import os
import re

import pytest

from autovis.config import RunConfig
from autovis.mllm import ProviderConfig
from autovis.render import render_dvr, render_mesh, extract_isosurface, orthogonal_cameras
from autovis.transfer import RampOpacity
from autovis.render import grayscale_xray_tf
from autovis.volume import gaussian_blob, nested_shells, save_meta, save_raw

ROLE_COLORS = [
    [0.89, 0.10, 0.11], [0.22, 0.49, 0.72], [0.30, 0.69, 0.29],
    [0.60, 0.31, 0.64], [1.00, 0.50, 0.00], [0.65, 0.34, 0.16],
    [0.97, 0.51, 0.75], [0.40, 0.40, 0.40], [0.12, 0.47, 0.71],
]

ROLES = ["outer shell", "intermediate layer", "inner core",
         "hotspot", "filament", "fragmented/noisy structure"]


def _h(text: str) -> int:
    return int(hashlib.sha256(text.encode()).hexdigest(), 16)


def standard_responder(object_type="simulated"):
    """Deterministic replies for every role, valid against the schemas."""

    def respond(req):
        tag = req.role_tag
        h = _h(req.user_prompt)
        if tag == "evaluator":
            if "initial viewpoint" in req.user_prompt:
                return json.dumps({"overall_score": 8,
                                   "view_scores": [4, 5, 9, 6, 3, 2]})
            scores = [1 + ((h >> (8 * i)) % 10) for i in range(6)]
            return json.dumps({"overall_score": 1 + (h % 10),
                               "view_scores": scores})
        if tag == "recognizer":
            kws = (["scanned specimen", "layered solid"]
                   if object_type == "empirical"
                   else ["smooth density field", "blob"])
            return json.dumps({"keywords": kws, "object_type": object_type})
        if tag == "forager_summary":
            return json.dumps({"keywords": [
                {"keyword": "outer boundary", "source": "model"},
                {"keyword": "core region", "source": "model"},
                {"keyword": "internal interfaces", "source": "model"},
            ]})
        if tag == "semantic_analyzer":
            m = re.search(r"isovalue (\d+) of (\d+)", req.user_prompt)
            idx = int(m.group(1)) - 1
            return json.dumps({
                "geometric_role": ROLES[idx % len(ROLES)],
                "scientific_salience": 4 + (idx % 6),
                "occlusion_risk": 1 + (idx % 9),
                "confidence": 5 + (idx % 5),
                "shape_summary": f"band {idx} surface",
                "explanation": "scripted analysis",
            })
        if tag == "tf_designer":
            count = req.user_prompt.count('"isovalue_index"')
            rows = [{"isovalue_index": i,
                     "color": ROLE_COLORS[i % len(ROLE_COLORS)],
                     "opacity": round(0.15 + 0.08 * i, 4),
                     "accepted": True} for i in range(count)]
            return json.dumps({"assignments": rows})
        if tag == "ift_judge":
            return json.dumps({"better": "prior"})
        if tag == "view_selector":
            m = re.search(r"viewpoints 0 to (\d+)", req.user_prompt)
            last = int(m.group(1))
            k = last + 1
            stride = max(1, k // 6)
            anchors = list(range(0, k, stride))[:6]
            ranked = sorted(range(k), key=lambda i: ((i * 7) % k, i))
            return json.dumps({"ranked": ranked, "anchors": anchors,
                               "avoid": []})
        raise AssertionError(f"unexpected role {tag}")

    return respond


def mock_provider_config(fixtures_dir=None, **kw) -> ProviderConfig:
    return ProviderConfig(kind="scripted_mock", fixtures_dir=fixtures_dir, **kw)


def fast_config(**kw) -> RunConfig:
    base = dict(n_rsv=3, m_isovalues=4, k_viewpoints=8,
                intermediate_resolution=48, output_resolution=96,
                downsample_target=32, samples_per_segment=8,
                render_workers=2, provider=mock_provider_config())
    base.update(kw)
    return RunConfig(**base)


@pytest.fixture(scope="session")
def volume_files(tmp_path_factory):
    """Bundled 64-cube fixtures: nested shells and a Gaussian blob."""
    root = tmp_path_factory.mktemp("volumes")
    out = {}
    for name, maker in (("shells", nested_shells), ("blob", gaussian_blob)):
        v = maker(64)
        raw = str(root / f"{name}.raw")
        meta = str(root / f"{name}.json")
        save_raw(v, raw)
        save_meta(v.meta, meta)
        out[name] = (raw, meta)
    return out


@pytest.fixture(scope="session")
def small_volume_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("volumes_small")
    v = nested_shells(24)
    raw = str(root / "small.raw")
    meta = str(root / "small.json")
    save_raw(v, raw)
    save_meta(v.meta, meta)
    return raw, meta


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the jit render kernels once so timed tests measure steady state."""
    v = nested_shells(8)
    tf = grayscale_xray_tf(RampOpacity(rsv=0.2, v_min=v.v_min, v_max=v.v_max))
    render_dvr(v, tf, orthogonal_cameras(v)[0], 8, 8)
    mesh = extract_isosurface(v, 1.0)
    render_mesh(mesh, (1.0, 1.0, 1.0), orthogonal_cameras(v)[0], 8, 8)
    return True


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = {}
    for key in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if nodeid not in rows or getattr(rep, "when", "call") == "call":
                rows[nodeid] = key.upper()
    if not rows:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for nodeid, outcome in rows.items():
        terminalreporter.write_line(f"{outcome:>7}  {nodeid.split('::')[-1]}")
