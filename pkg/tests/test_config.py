"""Configuration layering: defaults, environment, file, flags."""

import json

import pytest

from autovis.config import (RunConfig, env_overrides, load_run_config,
                            make_web_adapter)
from autovis.errors import ConfigError
from autovis.errors import AdapterUnavailable
from autovis.knowledge import CannedSearchAdapter, UnavailableSearchAdapter
from autovis.mllm import ProviderConfig


# ---------------------------------------------------------------- RunConfig

def test_defaults():
    cfg = RunConfig()
    assert cfg.n_rsv == 5
    assert cfg.m_isovalues == 9
    assert cfg.k_viewpoints == 32
    assert cfg.samples_per_segment == 120
    assert cfg.confidence_threshold == 4
    assert cfg.temperature == 0.1
    assert cfg.provider.kind == "scripted_mock"


def test_roundtrip_dict():
    cfg = RunConfig(n_rsv=3, temperature=0.7, kb_path="/tmp/kb")
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown config keys"):
        RunConfig.from_dict({"n_rsv": 3, "bogus": 1})


@pytest.mark.parametrize("field,value", [
    ("n_rsv", 0), ("m_isovalues", 0), ("k_viewpoints", 0),
    ("render_workers", 0), ("frame_stride", 0),
])
def test_positive_int_validation(field, value):
    with pytest.raises(ConfigError, match="must be >= 1"):
        RunConfig(**{field: value})


def test_temperature_range():
    with pytest.raises(ConfigError, match="temperature"):
        RunConfig(temperature=2.5)
    RunConfig(temperature=0.0)
    RunConfig(temperature=2.0)


def test_ift_divisor_ordering():
    with pytest.raises(ConfigError, match="ift_stop_divisor"):
        RunConfig(ift_step_divisor=16, ift_stop_divisor=8)


def test_provider_from_nested_dict():
    cfg = RunConfig.from_dict({
        "provider": {"kind": "remote_http", "endpoint": "http://x/v1",
                     "model_name": "m"}})
    assert isinstance(cfg.provider, ProviderConfig)
    assert cfg.provider.kind == "remote_http"


# --------------------------------------------------------------- env layer

def test_env_overrides_parse_types():
    env = {
        "SASAV_N_RSV": "7",
        "SASAV_TEMPERATURE": "0.35",
        "SASAV_ANIMATE": "true",
        "SASAV_CLOSED_TRAJECTORY": "0",
        "SASAV_KB_PATH": "/data/kb",
        "UNRELATED": "ignored",
    }
    out = env_overrides(env)
    assert out == {"n_rsv": 7, "temperature": 0.35, "animate": True,
                   "closed_trajectory": False, "kb_path": "/data/kb"}


@pytest.mark.parametrize("raw,expect", [
    ("1", True), ("true", True), ("YES", True), ("on", True),
    ("0", False), ("false", False), ("off", False), ("nope", False),
])
def test_env_bool_forms(raw, expect):
    assert env_overrides({"SASAV_ANIMATE": raw}) == {"animate": expect}


def test_env_bad_int_is_config_error():
    with pytest.raises(ConfigError, match="SASAV_N_RSV"):
        env_overrides({"SASAV_N_RSV": "three"})


def test_env_ignores_provider():
    assert env_overrides({"SASAV_PROVIDER": "x"}) == {}


# ------------------------------------------------------------- precedence

def test_precedence_env_file_flag(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"n_rsv": 4, "m_isovalues": 6}))
    env = {"SASAV_N_RSV": "2", "SASAV_K_VIEWPOINTS": "16"}
    cfg = load_run_config(config_file=str(path),
                          flag_overrides={"m_isovalues": 8},
                          env=env)
    assert cfg.n_rsv == 4          # file beats env
    assert cfg.m_isovalues == 8    # flag beats file
    assert cfg.k_viewpoints == 16  # env survives when nothing above sets it


def test_flag_none_does_not_override(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"n_rsv": 4}))
    cfg = load_run_config(config_file=str(path),
                          flag_overrides={"n_rsv": None}, env={})
    assert cfg.n_rsv == 4


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"niter": 3}))
    with pytest.raises(ConfigError, match="unknown config keys"):
        load_run_config(config_file=str(path), env={})


def test_config_file_bad_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{nope")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_run_config(config_file=str(path), env={})


def test_config_file_missing(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_run_config(config_file=str(tmp_path / "nope.json"), env={})


def test_config_file_non_object(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="JSON object"):
        load_run_config(config_file=str(path), env={})


def test_no_sources_gives_defaults():
    assert load_run_config(env={}) == RunConfig()


# ------------------------------------------------------------ web adapter

def test_make_web_adapter_none():
    assert make_web_adapter(None) is None
    assert make_web_adapter("") is None


def test_make_web_adapter_unavailable():
    adapter = make_web_adapter("unavailable")
    assert isinstance(adapter, UnavailableSearchAdapter)
    with pytest.raises(AdapterUnavailable):
        adapter.search("anything")


def test_make_web_adapter_canned(tmp_path):
    path = tmp_path / "web.json"
    path.write_text(json.dumps({
        "default": [["t0", "s0", "u0"]],
        "queries": {"bonsai": [["t1", "s1", "u1"], ["t2", "s2", "u2"]]},
    }))
    adapter = make_web_adapter(str(path))
    assert isinstance(adapter, CannedSearchAdapter)
    hits = adapter.search("bonsai")
    assert [h.title for h in hits] == ["t1", "t2"]
    assert [h.title for h in adapter.search("other")] == ["t0"]


def test_make_web_adapter_bad_file(tmp_path):
    with pytest.raises(ConfigError, match="web adapter fixture"):
        make_web_adapter(str(tmp_path / "missing.json"))
