"""Run configuration: defaults, environment, file, and flag layering.

Precedence is env < file < flag: the environment seeds overrides, a
JSON config file replaces them, and explicit flags win.  Unknown keys
anywhere are errors.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .knowledge import CannedSearchAdapter, SearchResult, UnavailableSearchAdapter
from .mllm import ProviderConfig

ENV_PREFIX = "SASAV_"


@dataclass(frozen=True)
class RunConfig:
    n_rsv: int = 5
    m_isovalues: int = 9
    k_viewpoints: int = 32
    intermediate_resolution: int = 256
    output_resolution: int = 2048
    downsample_target: int = 256
    samples_per_segment: int = 120
    confidence_threshold: int = 4
    temperature: float = 0.1
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    kb_path: str | None = None
    web_adapter: str | None = None
    animate: bool = False
    render_workers: int = 4
    anchor_hint: int = 9
    fallback_anchor_count: int = 8
    ift_max_judgments: int = 6
    ift_step_divisor: int = 8
    ift_stop_divisor: int = 64
    kb_top_k: int = 5
    web_result_cap: int = 3
    closed_trajectory: bool = False
    frame_stride: int = 1

    def __post_init__(self):
        for name in ("n_rsv", "m_isovalues", "k_viewpoints",
                     "intermediate_resolution", "output_resolution",
                     "downsample_target", "samples_per_segment",
                     "confidence_threshold", "render_workers", "anchor_hint",
                     "fallback_anchor_count", "ift_max_judgments",
                     "ift_step_divisor", "ift_stop_divisor", "frame_stride"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError(f"temperature {self.temperature} outside [0, 2]")
        if self.ift_stop_divisor < self.ift_step_divisor:
            raise ConfigError("ift_stop_divisor must be >= ift_step_divisor")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.to_dict() if f.name == "provider" else v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "provider" in d and not isinstance(d["provider"], ProviderConfig):
            d["provider"] = ProviderConfig.from_dict(d["provider"])
        return cls(**d)


_BOOL_FIELDS = {"animate", "closed_trajectory"}
_FLOAT_FIELDS = {"temperature"}
_STR_FIELDS = {"kb_path", "web_adapter"}


def _parse_env_value(name: str, raw: str):
    if name in _BOOL_FIELDS:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if name in _FLOAT_FIELDS:
        return float(raw)
    if name in _STR_FIELDS:
        return raw
    return int(raw)


def env_overrides(env=None) -> dict:
    """Scalar RunConfig overrides drawn from SASAV_<FIELD> variables."""
    env = os.environ if env is None else env
    out = {}
    for f in fields(RunConfig):
        if f.name == "provider":
            continue
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is None:
            continue
        try:
            out[f.name] = _parse_env_value(f.name, raw)
        except ValueError as exc:
            raise ConfigError(
                f"bad value for {ENV_PREFIX + f.name.upper()}: {raw!r}") from exc
    return out


def load_run_config(config_file=None, flag_overrides: dict | None = None,
                    env=None) -> RunConfig:
    """Layer defaults, environment, config file, then flags (strongest)."""
    merged: dict = {}
    merged.update(env_overrides(env))
    if config_file:
        try:
            with open(config_file, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {config_file}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {config_file} is not valid JSON: "
                              f"{exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(doc)
    for key, value in (flag_overrides or {}).items():
        if value is not None:
            merged[key] = value
    return RunConfig.from_dict(merged)


def make_web_adapter(spec: str | None):
    """Build the web-search adapter named by config.

    None disables search; "unavailable" yields an adapter whose backend
    always fails (degradation paths); any other value is a path to a
    canned-results JSON file of the form
    {"default": [[title, snippet, url], ...], "queries": {query: [...]}}.
    """
    if spec is None or spec == "":
        return None
    if spec == "unavailable":
        return UnavailableSearchAdapter()
    try:
        with open(spec, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load web adapter fixture {spec}: {exc}") from exc

    def rows(items):
        return [SearchResult(title=t, snippet=s, url=u) for t, s, u in items]

    return CannedSearchAdapter(
        results_by_query={q: rows(v) for q, v in doc.get("queries", {}).items()},
        default=rows(doc.get("default", [])))
