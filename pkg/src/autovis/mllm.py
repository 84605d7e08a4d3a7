"""Provider-agnostic multimodal chat and embedding boundary.

Two providers share one contract: a remote OpenAI-compatible HTTP
endpoint and a deterministic scripted mock that replays fixture files
keyed by (role_tag, request fingerprint).  Replies are parsed against
small named schemas; a single automatic re-ask with the validation
error appended is attempted before a reply degrades to FAILED.

Concurrency is bounded by a semaphore shared across chat and embed;
token usage is accumulated per role tag.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, FixtureMiss, ParseFailure, ProviderUnavailable
from .render import Image

ROLE_TAGS = ("evaluator", "recognizer", "forager_summary", "semantic_analyzer",
             "tf_designer", "ift_judge", "view_selector")

_THUMB = 16  # fingerprint thumbnail edge, pixels


class _Failed:
    """Sentinel for replies that answered 'failed' or never parsed."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FAILED"

    def __bool__(self):
        return False


FAILED = _Failed()


def is_failed(value) -> bool:
    return value is FAILED


@dataclass(frozen=True)
class ChatRequest:
    role_tag: str
    system_prompt: str
    user_prompt: str
    images: tuple[Image, ...] = ()
    temperature: float = 0.1
    schema_id: str = ""

    def __post_init__(self):
        if self.role_tag not in ROLE_TAGS:
            raise ConfigError(f"unknown role_tag {self.role_tag!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError(f"temperature {self.temperature} outside [0, 2]")
        object.__setattr__(self, "images", tuple(self.images))


@dataclass(frozen=True)
class ChatReply:
    text: str
    parsed: object
    usage: tuple[int, int]  # (input_tokens, output_tokens), summed over re-asks


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "scripted_mock"
    endpoint: str = ""
    api_key_env: str = "SASAV_API_KEY"
    model_name: str = "gpt-4o"
    embed_model_name: str = "text-embedding-3-small"
    max_concurrency: int = 4
    retry_max_attempts: int = 3
    retry_base_backoff: float = 0.5
    image_limit: int = 40
    fixtures_dir: str | None = None
    embed_dim: int = 64

    def __post_init__(self):
        if self.kind not in ("scripted_mock", "remote_http"):
            raise ConfigError(f"unknown provider kind {self.kind!r}")
        if self.max_concurrency < 1:
            raise ConfigError("max_concurrency must be >= 1")
        if self.retry_max_attempts < 1:
            raise ConfigError("retry_max_attempts must be >= 1")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "ProviderConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown provider config keys: {sorted(unknown)}")
        return cls(**d)


def _image_fingerprint(img: Image) -> str:
    """Content hash over a fixed-size nearest-neighbor thumbnail.

    Hashing a thumbnail keeps mock fixture keys sensitive to what was
    rendered but stable across intermediate render resolutions.
    """
    ys = (np.arange(_THUMB) * img.height // _THUMB).astype(np.int64)
    xs = (np.arange(_THUMB) * img.width // _THUMB).astype(np.int64)
    thumb = img.pixels[np.ix_(ys, xs)]
    return hashlib.sha256(thumb.tobytes()).hexdigest()


def fingerprint_request(req: ChatRequest) -> str:
    """Stable fixture key over prompts, image count, and image content."""
    h = hashlib.sha256()
    for part in (req.role_tag, req.system_prompt, req.user_prompt,
                 str(len(req.images))):
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    for img in req.images:
        h.update(_image_fingerprint(img).encode("ascii"))
    return h.hexdigest()[:24]


# -- structured-output schemas -------------------------------------------

def _require(obj: dict, key: str):
    if key not in obj:
        raise ParseFailure(f"missing required field {key!r}")
    return obj[key]


def _score(obj: dict, key: str) -> int:
    v = _require(obj, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
        raise ParseFailure(f"field {key!r} must be an integer score")
    v = int(v)
    if not 1 <= v <= 10:
        raise ParseFailure(f"field {key!r} = {v} outside [1, 10]")
    return v


def _text(obj: dict, key: str) -> str:
    v = _require(obj, key)
    if not isinstance(v, str) or not v.strip():
        raise ParseFailure(f"field {key!r} must be non-empty text")
    return v.strip()


def _unit(obj: dict, key: str) -> float:
    v = _require(obj, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseFailure(f"field {key!r} must be a number")
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ParseFailure(f"field {key!r} = {v} outside [0, 1]")
    return v


def _int_list(obj: dict, key: str) -> list[int]:
    v = _require(obj, key)
    if not isinstance(v, list):
        raise ParseFailure(f"field {key!r} must be a list")
    out = []
    for x in v:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or x != int(x):
            raise ParseFailure(f"field {key!r} must hold integers")
        out.append(int(x))
    return out


def _parse_evaluation(obj: dict) -> dict:
    scores = _int_list(obj, "view_scores")
    if len(scores) != 6:
        raise ParseFailure(f"view_scores must hold 6 entries, got {len(scores)}")
    for s in scores:
        if not 1 <= s <= 10:
            raise ParseFailure(f"view score {s} outside [1, 10]")
    return {"overall_score": _score(obj, "overall_score"), "view_scores": scores}


def _parse_recognition(obj: dict) -> dict:
    kws = _require(obj, "keywords")
    if not isinstance(kws, list) or not kws or \
            not all(isinstance(k, str) and k.strip() for k in kws):
        raise ParseFailure("keywords must be a non-empty list of text")
    otype = _text(obj, "object_type").lower()
    if otype not in ("empirical", "simulated"):
        raise ParseFailure(f"object_type {otype!r} not in {{empirical, simulated}}")
    return {"keywords": [k.strip() for k in kws], "object_type": otype}


def _parse_forage_summary(obj: dict) -> dict:
    items = _require(obj, "keywords")
    if not isinstance(items, list):
        raise ParseFailure("keywords must be a list")
    out = []
    for item in items:
        if isinstance(item, str) and item.strip():
            out.append({"keyword": item.strip(), "source": "model"})
            continue
        if not isinstance(item, dict):
            raise ParseFailure("keyword entries must be text or objects")
        kw = _text(item, "keyword")
        src = item.get("source", "model")
        if src not in ("web", "kb", "model"):
            raise ParseFailure(f"keyword source {src!r} not in {{web, kb, model}}")
        out.append({"keyword": kw, "source": src})
    return {"keywords": out}


def _parse_semantic_analysis(obj: dict) -> dict:
    return {
        "geometric_role": _text(obj, "geometric_role"),
        "scientific_salience": _score(obj, "scientific_salience"),
        "occlusion_risk": _score(obj, "occlusion_risk"),
        "confidence": _score(obj, "confidence"),
        "shape_summary": _text(obj, "shape_summary"),
        "explanation": _text(obj, "explanation"),
    }


def _parse_tf_design(obj: dict) -> dict:
    rows = _require(obj, "assignments")
    if not isinstance(rows, list) or not rows:
        raise ParseFailure("assignments must be a non-empty list")
    out = []
    for row in rows:
        if not isinstance(row, dict):
            raise ParseFailure("assignments entries must be objects")
        idx = row.get("isovalue_index")
        if isinstance(idx, bool) or not isinstance(idx, (int, float)) \
                or idx != int(idx) or int(idx) < 0:
            raise ParseFailure("isovalue_index must be a non-negative integer")
        color = row.get("color")
        if not isinstance(color, list) or len(color) != 3:
            raise ParseFailure("color must be an [r, g, b] triple")
        for c in color:
            if isinstance(c, bool) or not isinstance(c, (int, float)) \
                    or not 0.0 <= float(c) <= 1.0:
                raise ParseFailure("color channels must lie in [0, 1]")
        accepted = row.get("accepted", True)
        if not isinstance(accepted, bool):
            raise ParseFailure("accepted must be a boolean")
        out.append({"isovalue_index": int(idx),
                    "color": [float(c) for c in color],
                    "opacity": _unit(row, "opacity"),
                    "accepted": accepted})
    return {"assignments": out}


def _parse_ift_judgment(obj: dict) -> dict:
    better = _text(obj, "better").lower()
    if better not in ("prior", "new"):
        raise ParseFailure(f"better = {better!r} not in {{prior, new}}")
    return {"better": better}


def _parse_view_selection(obj: dict) -> dict:
    return {"ranked": _int_list(obj, "ranked"),
            "anchors": _int_list(obj, "anchors"),
            "avoid": _int_list(obj, "avoid")}


SCHEMAS = {
    "evaluation": _parse_evaluation,
    "recognition": _parse_recognition,
    "forage_summary": _parse_forage_summary,
    "semantic_analysis": _parse_semantic_analysis,
    "tf_design": _parse_tf_design,
    "ift_judgment": _parse_ift_judgment,
    "view_selection": _parse_view_selection,
}


def _extract_json(text: str) -> dict:
    """First JSON object embedded anywhere in the reply, prose ignored."""
    decoder = json.JSONDecoder()
    start = text.find("{")
    while start != -1:
        try:
            obj, _ = decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            start = text.find("{", start + 1)
            continue
        if isinstance(obj, dict):
            return obj
        start = text.find("{", start + 1)
    raise ParseFailure("no structured document found in reply")


def parse_structured(text: str, schema_id: str):
    """Validate a reply against a named schema.

    The literal reply 'failed' yields the FAILED marker without error;
    schema violations raise ParseFailure.  Extra fields are ignored.
    """
    if text.strip().strip(".'\"").lower() == "failed":
        return FAILED
    if schema_id not in SCHEMAS:
        raise ParseFailure(f"unknown schema_id {schema_id!r}")
    return SCHEMAS[schema_id](_extract_json(text))


# -- providers ------------------------------------------------------------

class Provider:
    """Shared concurrency bound, usage ledger, and re-ask flow."""

    def __init__(self, cfg: ProviderConfig):
        self.cfg = cfg
        self._sem = threading.Semaphore(cfg.max_concurrency)
        self._lock = threading.Lock()
        self._in_flight = 0
        self.max_in_flight = 0
        self.usage: dict[str, dict[str, int]] = {}
        self.census: list[tuple[str, str]] = []

    # subclasses implement one raw round trip
    def _chat_raw(self, req: ChatRequest) -> tuple[str, int, int]:
        raise NotImplementedError

    def _embed_raw(self, texts: list[str]) -> tuple[list[np.ndarray], int]:
        raise NotImplementedError

    def _enter(self):
        self._sem.acquire()
        with self._lock:
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)

    def _exit(self):
        with self._lock:
            self._in_flight -= 1
        self._sem.release()

    def _account(self, tag: str, in_tok: int, out_tok: int) -> None:
        with self._lock:
            row = self.usage.setdefault(
                tag, {"calls": 0, "input_tokens": 0, "output_tokens": 0})
            row["calls"] += 1
            row["input_tokens"] += int(in_tok)
            row["output_tokens"] += int(out_tok)

    def total_usage(self) -> dict[str, int]:
        with self._lock:
            out = {"calls": 0, "input_tokens": 0, "output_tokens": 0}
            for row in self.usage.values():
                for k in out:
                    out[k] += row[k]
            return out

    def _invoke(self, req: ChatRequest) -> tuple[str, int, int]:
        if len(req.images) > self.cfg.image_limit:
            raise ConfigError(
                f"{len(req.images)} images exceed provider limit "
                f"{self.cfg.image_limit}")
        self._enter()
        try:
            text, in_tok, out_tok = self._chat_raw(req)
        finally:
            self._exit()
        with self._lock:
            self.census.append((req.role_tag, fingerprint_request(req)))
        self._account(req.role_tag, in_tok, out_tok)
        return text, in_tok, out_tok

    def chat(self, req: ChatRequest) -> ChatReply:
        """One logical chat: raw call, parse, single re-ask on violation."""
        text, in_tok, out_tok = self._invoke(req)
        try:
            parsed = parse_structured(text, req.schema_id)
            return ChatReply(text=text, parsed=parsed, usage=(in_tok, out_tok))
        except ParseFailure as exc:
            repair = replace(req, user_prompt=(
                f"{req.user_prompt}\n\nYour previous reply was invalid: {exc}. "
                f"Reply again with only the required document."))
            text2, in2, out2 = self._invoke(repair)
            usage = (in_tok + in2, out_tok + out2)
            try:
                parsed = parse_structured(text2, req.schema_id)
            except ParseFailure:
                return ChatReply(text=text2, parsed=FAILED, usage=usage)
            return ChatReply(text=text2, parsed=parsed, usage=usage)

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            return []
        self._enter()
        try:
            vecs, tokens = self._embed_raw(list(texts))
        finally:
            self._exit()
        self._account("embedding", tokens, 0)
        return vecs


def mock_embedding(text: str, dim: int) -> np.ndarray:
    """Deterministic pseudo-embedding: hash-seeded unit vector."""
    seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8],
                          "little")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    return (v / np.linalg.norm(v)).astype(np.float32)


class MockProvider(Provider):
    """Deterministic scripted provider.

    Replies come from fixture files ``<fixtures_dir>/<role_tag>/<fp>.json``
    holding {reply, input_tokens, output_tokens}.  An optional responder
    callable fills (and, when a fixtures directory is set, persists)
    missing fixtures, which is how fixture corpora are recorded.
    """

    def __init__(self, cfg: ProviderConfig, responder=None):
        super().__init__(cfg)
        self.responder = responder

    def _fixture_path(self, req: ChatRequest) -> str | None:
        if not self.cfg.fixtures_dir:
            return None
        return os.path.join(self.cfg.fixtures_dir, req.role_tag,
                            fingerprint_request(req) + ".json")

    def _chat_raw(self, req: ChatRequest) -> tuple[str, int, int]:
        path = self._fixture_path(req)
        if path and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
            return (doc["reply"], int(doc.get("input_tokens", 0)),
                    int(doc.get("output_tokens", 0)))
        if self.responder is None:
            raise FixtureMiss(
                f"no fixture for ({req.role_tag}, {fingerprint_request(req)})")
        out = self.responder(req)
        if isinstance(out, str):
            reply, in_tok, out_tok = out, 100, 50
        else:
            reply, in_tok, out_tok = out
        if path:
            os.makedirs(os.path.dirname(path), exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                json.dump({"reply": reply, "input_tokens": in_tok,
                           "output_tokens": out_tok}, fh, indent=2)
        return reply, in_tok, out_tok

    def _embed_raw(self, texts: list[str]) -> tuple[list[np.ndarray], int]:
        vecs = [mock_embedding(t, self.cfg.embed_dim) for t in texts]
        return vecs, sum(len(t) // 4 for t in texts)


class HttpProvider(Provider):
    """OpenAI-compatible chat-completions and embeddings client."""

    def __init__(self, cfg: ProviderConfig):
        super().__init__(cfg)
        if not cfg.endpoint:
            raise ConfigError("remote_http provider requires an endpoint")

    def _headers(self) -> dict:
        key = os.environ.get(self.cfg.api_key_env, "")
        return {"Authorization": f"Bearer {key}",
                "Content-Type": "application/json"}

    def _post(self, path: str, payload: dict) -> dict:
        import httpx

        url = self.cfg.endpoint.rstrip("/") + path
        last = None
        for attempt in range(self.cfg.retry_max_attempts):
            if attempt:
                time.sleep(self.cfg.retry_base_backoff * 2 ** (attempt - 1))
            try:
                resp = httpx.post(url, json=payload, headers=self._headers(),
                                  timeout=120.0)
                if resp.status_code >= 500:
                    last = f"server error {resp.status_code}"
                    continue
                if resp.status_code >= 400:
                    raise ProviderUnavailable(
                        f"{url} rejected request: {resp.status_code} {resp.text[:200]}")
                return resp.json()
            except httpx.HTTPError as exc:
                last = str(exc)
        raise ProviderUnavailable(
            f"{url} unreachable after {self.cfg.retry_max_attempts} attempts: {last}")

    def _chat_raw(self, req: ChatRequest) -> tuple[str, int, int]:
        content: list[dict] = [{"type": "text", "text": req.user_prompt}]
        for img in req.images:
            uri = "data:image/png;base64," + \
                base64.b64encode(img.to_png_bytes()).decode("ascii")
            content.append({"type": "image_url", "image_url": {"url": uri}})
        payload = {
            "model": self.cfg.model_name,
            "temperature": req.temperature,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": content},
            ],
        }
        doc = self._post("/chat/completions", payload)
        try:
            text = doc["choices"][0]["message"]["content"]
            usage = doc.get("usage", {})
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed chat response: {exc}") from exc
        return (text, int(usage.get("prompt_tokens", 0)),
                int(usage.get("completion_tokens", 0)))

    def _embed_raw(self, texts: list[str]) -> tuple[list[np.ndarray], int]:
        doc = self._post("/embeddings",
                         {"model": self.cfg.embed_model_name, "input": texts})
        try:
            rows = sorted(doc["data"], key=lambda r: r["index"])
            vecs = [np.asarray(r["embedding"], dtype=np.float32) for r in rows]
        except (KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed embed response: {exc}") from exc
        usage = doc.get("usage", {})
        return vecs, int(usage.get("prompt_tokens", 0))


def make_provider(cfg: ProviderConfig, responder=None) -> Provider:
    if cfg.kind == "scripted_mock":
        return MockProvider(cfg, responder=responder)
    return HttpProvider(cfg)
