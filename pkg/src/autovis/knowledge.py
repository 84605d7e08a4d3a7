"""Forager knowledge retrieval: local RAG index plus web-search adapter.

Chunking is character based and the similarity scan is brute-force
cosine over dense normalized vectors; corpora here are research-paper
scale, so exactness beats index structures.  The forager consolidates
gathered evidence into ranked region-of-interest keywords through a
single summarizer chat and degrades to the input keywords when that
chat fails.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AdapterUnavailable, ConfigError, InvalidOverlap
from .mllm import ChatRequest, Provider, is_failed
from .prompts_loader import render_prompt

SCHEMA_VERSION = 1
DEFAULT_CHUNK_SIZE = 1000
DEFAULT_OVERLAP = 200
DEFAULT_TOP_K = 5
MAX_KEYWORDS = 10


@dataclass
class Chunk:
    doc_id: str
    ordinal: int
    text: str
    embedding: np.ndarray | None = None


def chunk_document(text: str, doc_id: str = "doc",
                   chunk_size: int = DEFAULT_CHUNK_SIZE,
                   overlap: int = DEFAULT_OVERLAP) -> list[Chunk]:
    """Sliding-window chunks with stride chunk_size - overlap.

    The window stops advancing once a chunk reaches the end of the
    document, so the final (possibly partial) chunk is kept and nothing
    past it is emitted.
    """
    if chunk_size < 1:
        raise InvalidOverlap(f"chunk_size {chunk_size} < 1")
    if not 0 <= overlap < chunk_size:
        raise InvalidOverlap(
            f"overlap {overlap} outside [0, chunk_size {chunk_size})")
    if not text:
        return []
    stride = chunk_size - overlap
    chunks = []
    start = 0
    while True:
        piece = text[start:start + chunk_size]
        chunks.append(Chunk(doc_id=doc_id, ordinal=len(chunks), text=piece))
        if start + chunk_size >= len(text):
            break
        start += stride
    return chunks


@dataclass
class KnowledgeIndex:
    """Immutable-after-build dense cosine index over chunks."""

    chunks: list[Chunk] = field(default_factory=list)
    dim: int = 0

    def __len__(self) -> int:
        return len(self.chunks)

    def matrix(self) -> np.ndarray:
        if not self.chunks:
            return np.zeros((0, self.dim), dtype=np.float32)
        return np.stack([c.embedding for c in self.chunks])

    def save(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "chunks.jsonl"), "w",
                  encoding="utf-8") as fh:
            for c in self.chunks:
                fh.write(json.dumps({"doc_id": c.doc_id, "ordinal": c.ordinal,
                                     "text": c.text}) + "\n")
        mat = self.matrix().astype("<f4")
        with open(os.path.join(out_dir, "embeddings.bin"), "wb") as fh:
            fh.write(mat.tobytes())
        manifest = {"schema_version": SCHEMA_VERSION, "dim": self.dim,
                    "count": len(self.chunks)}
        with open(os.path.join(out_dir, "manifest.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, in_dir) -> "KnowledgeIndex":
        with open(os.path.join(in_dir, "manifest.json"), encoding="utf-8") as fh:
            manifest = json.load(fh)
        dim = int(manifest["dim"])
        count = int(manifest["count"])
        chunks = []
        with open(os.path.join(in_dir, "chunks.jsonl"), encoding="utf-8") as fh:
            for line in fh:
                d = json.loads(line)
                chunks.append(Chunk(doc_id=d["doc_id"], ordinal=int(d["ordinal"]),
                                    text=d["text"]))
        if len(chunks) != count:
            raise ConfigError(
                f"index manifest says {count} chunks, found {len(chunks)}")
        with open(os.path.join(in_dir, "embeddings.bin"), "rb") as fh:
            flat = np.frombuffer(fh.read(), dtype="<f4")
        if count:
            mat = flat.reshape(count, dim)
            for c, row in zip(chunks, mat):
                c.embedding = row.copy()
        return cls(chunks=chunks, dim=dim)


def build_index(chunks: list[Chunk], provider: Provider,
                batch_size: int = 64) -> KnowledgeIndex:
    """Embed all chunks batched through the provider and normalize."""
    if not chunks:
        return KnowledgeIndex(chunks=[], dim=0)
    vecs: list[np.ndarray] = []
    for i in range(0, len(chunks), batch_size):
        batch = [c.text for c in chunks[i:i + batch_size]]
        vecs.extend(provider.embed(batch))
    dim = len(vecs[0])
    out = []
    for c, v in zip(chunks, vecs):
        v = np.asarray(v, dtype=np.float32)
        if len(v) != dim:
            raise ConfigError("provider returned mixed embedding dimensions")
        norm = float(np.linalg.norm(v))
        out.append(Chunk(doc_id=c.doc_id, ordinal=c.ordinal, text=c.text,
                         embedding=v / norm if norm > 0 else v))
    return KnowledgeIndex(chunks=out, dim=dim)


def retrieve(index: KnowledgeIndex, query: str, k: int,
             provider: Provider) -> list[tuple[Chunk, float]]:
    """Exact top-k by cosine similarity, ties broken by (doc_id, ordinal)."""
    if k <= 0 or not index.chunks:
        return []
    q = np.asarray(provider.embed([query])[0], dtype=np.float64)
    norm = float(np.linalg.norm(q))
    if norm > 0:
        q = q / norm
    # row-uniform reduction: BLAS gemv rounds rows differently by position,
    # which would turn equal-text ties into arbitrary order
    scores = (index.matrix().astype(np.float64) * q).sum(axis=1)
    order = sorted(range(len(index.chunks)),
                   key=lambda i: (-scores[i], index.chunks[i].doc_id,
                                  index.chunks[i].ordinal))
    return [(index.chunks[i], float(scores[i])) for i in order[:k]]


# -- web search -----------------------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    title: str
    snippet: str
    url: str


class CannedSearchAdapter:
    """Fixture-backed search adapter for tests and offline runs."""

    def __init__(self, results_by_query: dict[str, list[SearchResult]] | None = None,
                 default: list[SearchResult] | None = None):
        self.results_by_query = results_by_query or {}
        self.default = default if default is not None else []

    def search(self, query: str) -> list[SearchResult]:
        return list(self.results_by_query.get(query, self.default))


class UnavailableSearchAdapter:
    """Adapter that is configured but cannot reach its backend."""

    def search(self, query: str) -> list[SearchResult]:
        raise AdapterUnavailable("search backend unreachable")


def web_search(query: str, adapter, cap: int = 3) -> list[SearchResult]:
    """Delegate to the adapter, degrading to no results when it fails."""
    if adapter is None:
        return []
    try:
        results = adapter.search(query)
    except AdapterUnavailable as exc:
        warnings.warn(f"web search unavailable for {query!r}: {exc}",
                      stacklevel=2)
        return []
    return list(results)[:max(0, cap)]


# -- forager --------------------------------------------------------------

@dataclass(frozen=True)
class RegionsOfInterest:
    """Ranked keywords (most important first) with per-keyword source tags."""

    keywords: tuple[str, ...]
    provenance: tuple[str, ...]

    def __post_init__(self):
        if len(self.keywords) != len(self.provenance):
            raise ConfigError("keywords and provenance must align")
        if len(self.keywords) > MAX_KEYWORDS:
            raise ConfigError(f"more than {MAX_KEYWORDS} keywords")
        seen = set()
        for k in self.keywords:
            low = k.lower()
            if low in seen:
                raise ConfigError(f"duplicate keyword {k!r}")
            seen.add(low)

    def to_dict(self) -> dict:
        return {"keywords": list(self.keywords),
                "provenance": list(self.provenance)}

    @classmethod
    def from_dict(cls, d: dict) -> "RegionsOfInterest":
        return cls(keywords=tuple(d["keywords"]),
                   provenance=tuple(d["provenance"]))


def _dedupe_cap(pairs: list[tuple[str, str]]) -> RegionsOfInterest:
    """Drop case-insensitive duplicates, keep order, cap at the limit."""
    kws, srcs, seen = [], [], set()
    for kw, src in pairs:
        low = kw.lower()
        if low in seen or not kw:
            continue
        seen.add(low)
        kws.append(kw)
        srcs.append(src)
        if len(kws) == MAX_KEYWORDS:
            break
    return RegionsOfInterest(keywords=tuple(kws), provenance=tuple(srcs))


def forage(object_keywords: list[str], index: KnowledgeIndex | None,
           provider: Provider, adapter=None, k: int = DEFAULT_TOP_K,
           temperature: float = 0.1) -> RegionsOfInterest:
    """Gather evidence per keyword and consolidate into ranked regions.

    Works with any combination of sources present; with no adapter, no
    index, and a failed summarizer it falls back to the object keywords
    themselves.
    """
    if not object_keywords:
        raise ConfigError("forage requires at least one object keyword")
    evidence_lines = []
    for kw in object_keywords:
        for res in web_search(kw, adapter):
            evidence_lines.append(
                f"- [web] {res.title}: {res.snippet} ({res.url})")
        if index is not None and len(index):
            for chunk, _score in retrieve(index, kw, k, provider):
                snippet = " ".join(chunk.text.split())[:300]
                evidence_lines.append(
                    f"- [kb] {chunk.doc_id}#{chunk.ordinal}: {snippet}")
    evidence = "\n".join(evidence_lines) if evidence_lines else "(none)"
    req = ChatRequest(
        role_tag="forager_summary",
        system_prompt=render_prompt("forager_summary_system"),
        user_prompt=render_prompt("forager_summary_user",
                                  object_keywords=", ".join(object_keywords),
                                  evidence=evidence,
                                  max_keywords=MAX_KEYWORDS),
        temperature=temperature,
        schema_id="forage_summary",
    )
    reply = provider.chat(req)
    if is_failed(reply.parsed):
        return _dedupe_cap([(kw, "model") for kw in object_keywords])
    pairs = [(row["keyword"], row["source"])
             for row in reply.parsed["keywords"]]
    if not pairs:
        return _dedupe_cap([(kw, "model") for kw in object_keywords])
    return _dedupe_cap(pairs)
