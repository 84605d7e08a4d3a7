"""Provider boundary: parsing, fingerprints, fixtures, concurrency, usage."""

import json
import threading
import time

import numpy as np
import pytest

from autovis.errors import ConfigError, FixtureMiss, ParseFailure
from autovis.mllm import (FAILED, ChatRequest, MockProvider, ProviderConfig,
                          fingerprint_request, is_failed, make_provider,
                          mock_embedding, parse_structured)
from autovis.render import Image


def img(fill, w=32, h=32):
    px = np.full((h, w, 4), fill, dtype=np.uint8)
    px[..., 3] = 255
    return Image.from_pixels(px)


def req(role="evaluator", user="rate this", images=(), schema="evaluation"):
    return ChatRequest(role_tag=role, system_prompt="sys", user_prompt=user,
                       images=tuple(images), schema_id=schema)


# -- structured parsing ----------------------------------------------------

def test_parse_evaluation_valid():
    doc = {"overall_score": 7, "view_scores": [1, 2, 3, 4, 5, 6]}
    out = parse_structured(json.dumps(doc), "evaluation")
    assert out == doc


def test_parse_tolerates_prose_wrapper():
    text = 'Sure! Here is my rating: {"overall_score": 3, '\
           '"view_scores": [1,1,1,1,1,1]} Hope that helps.'
    assert parse_structured(text, "evaluation")["overall_score"] == 3


@pytest.mark.parametrize("bad", [
    '{"overall_score": 11, "view_scores": [1,1,1,1,1,1]}',
    '{"overall_score": 0, "view_scores": [1,1,1,1,1,1]}',
    '{"overall_score": 5, "view_scores": [1,1,1,1,1]}',
    '{"overall_score": 5, "view_scores": [1,1,1,1,1,11]}',
    '{"overall_score": 5.5, "view_scores": [1,1,1,1,1,1]}',
    '{"overall_score": true, "view_scores": [1,1,1,1,1,1]}',
    '{"view_scores": [1,1,1,1,1,1]}',
    'no json here',
])
def test_parse_evaluation_rejects(bad):
    with pytest.raises(ParseFailure):
        parse_structured(bad, "evaluation")


@pytest.mark.parametrize("text", ["failed", "Failed", "FAILED.", '"failed"',
                                  "  failed  "])
def test_literal_failed_marker(text):
    out = parse_structured(text, "evaluation")
    assert is_failed(out)
    assert out is FAILED
    assert not out


def test_parse_recognition():
    out = parse_structured(
        '{"keywords": [" skull ", "bone"], "object_type": "Empirical"}',
        "recognition")
    assert out == {"keywords": ["skull", "bone"], "object_type": "empirical"}
    with pytest.raises(ParseFailure):
        parse_structured('{"keywords": [], "object_type": "empirical"}',
                         "recognition")
    with pytest.raises(ParseFailure):
        parse_structured('{"keywords": ["a"], "object_type": "guess"}',
                         "recognition")


def test_parse_forage_summary_mixed_forms():
    out = parse_structured(
        '{"keywords": ["plain", {"keyword": "tagged", "source": "web"}]}',
        "forage_summary")
    assert out["keywords"] == [{"keyword": "plain", "source": "model"},
                               {"keyword": "tagged", "source": "web"}]
    with pytest.raises(ParseFailure):
        parse_structured('{"keywords": [{"keyword": "x", "source": "tv"}]}',
                         "forage_summary")


def test_parse_semantic_analysis_bounds():
    good = {"geometric_role": "outer shell", "scientific_salience": 10,
            "occlusion_risk": 1, "confidence": 5,
            "shape_summary": "s", "explanation": "e"}
    assert parse_structured(json.dumps(good), "semantic_analysis") == good
    bad = dict(good, confidence=0)
    with pytest.raises(ParseFailure):
        parse_structured(json.dumps(bad), "semantic_analysis")


def test_parse_tf_design():
    doc = {"assignments": [
        {"isovalue_index": 0, "color": [0, 0.5, 1], "opacity": 0.25},
        {"isovalue_index": 2, "color": [1, 0, 0], "opacity": 0.0,
         "accepted": False}]}
    out = parse_structured(json.dumps(doc), "tf_design")
    assert out["assignments"][0]["accepted"] is True
    assert out["assignments"][1]["accepted"] is False
    with pytest.raises(ParseFailure):
        parse_structured('{"assignments": [{"isovalue_index": -1, '
                         '"color": [0,0,0], "opacity": 0.5}]}', "tf_design")
    with pytest.raises(ParseFailure):
        parse_structured('{"assignments": [{"isovalue_index": 0, '
                         '"color": [0,0,2], "opacity": 0.5}]}', "tf_design")


def test_parse_ift_judgment():
    assert parse_structured('{"better": "NEW"}', "ift_judgment") == \
        {"better": "new"}
    with pytest.raises(ParseFailure):
        parse_structured('{"better": "both"}', "ift_judgment")


def test_parse_view_selection():
    doc = {"ranked": [2, 0, 1], "anchors": [0, 1], "avoid": []}
    assert parse_structured(json.dumps(doc), "view_selection") == doc
    with pytest.raises(ParseFailure):
        parse_structured('{"ranked": [0.5], "anchors": [], "avoid": []}',
                         "view_selection")


# -- fingerprints ----------------------------------------------------------

def test_fingerprint_stable_and_sensitive():
    a = fingerprint_request(req(images=[img(10)]))
    assert a == fingerprint_request(req(images=[img(10)]))
    assert a != fingerprint_request(req(images=[img(11)]))
    assert a != fingerprint_request(req(user="rate that", images=[img(10)]))
    assert a != fingerprint_request(req(role="recognizer", images=[img(10)],
                                        schema="recognition"))
    assert len(a) == 24


def test_fingerprint_resolution_stable():
    # same content at different raster sizes maps to the same key
    small = img(42, w=32, h=32)
    big = img(42, w=128, h=128)
    assert fingerprint_request(req(images=[small])) == \
        fingerprint_request(req(images=[big]))


def test_fingerprint_counts_images():
    one = fingerprint_request(req(images=[img(5)]))
    two = fingerprint_request(req(images=[img(5), img(5)]))
    assert one != two


# -- mock provider ---------------------------------------------------------

def good_eval_reply(_req):
    return json.dumps({"overall_score": 6, "view_scores": [1, 2, 3, 4, 5, 6]})


def test_responder_records_fixtures(tmp_path):
    cfg = ProviderConfig(kind="scripted_mock", fixtures_dir=str(tmp_path))
    p1 = MockProvider(cfg, responder=good_eval_reply)
    r = req(images=[img(1)])
    reply = p1.chat(r)
    assert reply.parsed["overall_score"] == 6
    path = tmp_path / "evaluator" / (fingerprint_request(r) + ".json")
    assert path.exists()
    doc = json.loads(path.read_text())
    assert doc["input_tokens"] == 100 and doc["output_tokens"] == 50

    # replay with no responder comes from the file
    p2 = MockProvider(cfg)
    reply2 = p2.chat(r)
    assert reply2.text == reply.text
    assert reply2.usage == (100, 50)


def test_fixture_miss_raises(tmp_path):
    cfg = ProviderConfig(kind="scripted_mock", fixtures_dir=str(tmp_path))
    with pytest.raises(FixtureMiss):
        MockProvider(cfg).chat(req())


def test_reask_once_then_failed():
    calls = []

    def flaky(r):
        calls.append(r.user_prompt)
        return '{"overall_score": 99, "view_scores": [1,1,1,1,1,1]}'

    p = MockProvider(ProviderConfig(kind="scripted_mock"), responder=flaky)
    reply = p.chat(req())
    assert reply.parsed is FAILED
    assert len(calls) == 2
    assert "previous reply was invalid" in calls[1]
    assert reply.usage == (200, 100)  # both attempts accounted
    assert p.usage["evaluator"]["calls"] == 2


def test_reask_recovers_on_second_try():
    state = {"n": 0}

    def flaky(r):
        state["n"] += 1
        if state["n"] == 1:
            return "not json at all"
        return good_eval_reply(r)

    p = MockProvider(ProviderConfig(kind="scripted_mock"), responder=flaky)
    reply = p.chat(req())
    assert reply.parsed["overall_score"] == 6
    assert state["n"] == 2


def test_image_limit_enforced():
    cfg = ProviderConfig(kind="scripted_mock", image_limit=2)
    p = MockProvider(cfg, responder=good_eval_reply)
    with pytest.raises(ConfigError):
        p.chat(req(images=[img(1), img(2), img(3)]))


def test_concurrency_bound_respected():
    cfg = ProviderConfig(kind="scripted_mock", max_concurrency=3)
    gate = threading.Barrier(8, timeout=10)

    def slow(r):
        time.sleep(0.02)
        return good_eval_reply(r)

    p = MockProvider(cfg, responder=slow)

    def worker(i):
        gate.wait()
        p.chat(req(user=f"request {i}"))

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert p.max_in_flight <= 3
    assert p.usage["evaluator"]["calls"] == 8
    assert len(p.census) == 8


def test_total_usage_sums_roles():
    p = MockProvider(ProviderConfig(kind="scripted_mock"),
                     responder=good_eval_reply)
    p.chat(req(user="a"))
    p.chat(req(user="b"))
    p.embed(["x", "y", "z"])
    total = p.total_usage()
    assert total["calls"] == 3
    assert "embedding" in p.usage


def test_mock_embedding_deterministic_unit():
    a = mock_embedding("hello", 64)
    b = mock_embedding("hello", 64)
    c = mock_embedding("world", 64)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-6)
    assert a.dtype == np.float32


def test_make_provider_kinds():
    assert isinstance(make_provider(ProviderConfig(kind="scripted_mock")),
                      MockProvider)
    with pytest.raises(ConfigError):
        ProviderConfig(kind="oracle")


def test_chat_request_validation():
    with pytest.raises(ConfigError):
        ChatRequest(role_tag="wizard", system_prompt="s", user_prompt="u",
                    schema_id="evaluation")
    with pytest.raises(ConfigError):
        ChatRequest(role_tag="evaluator", system_prompt="s", user_prompt="u",
                    schema_id="evaluation", temperature=3.0)
