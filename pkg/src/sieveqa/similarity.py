"""Sentence-pair similarity: embedding cosine plus string metrics.

A similarity model is a set of weighted members (cosine over some embedding
provider, Levenshtein, q-gram).  Each member scores every candidate
sentence against the query, its scores are normalized to sum to one over
the sentence axis, and the members are combined by weighted mean.
"""

from __future__ import annotations

import hashlib
import logging
import os
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import Sentence, tokenize
from .errors import (
    DimensionMismatchError,
    ProviderUnavailableError,
    ZeroVectorError,
)
from .kernels import levenshtein_distance, qgram_profile_distance
from .selector import ScoredSentence

logger = logging.getLogger(__name__)

EMBED_URL_ENV = "SIEVEQA_EMBED_URL"
DEFAULT_PROVIDER = "hashed_tfidf"


@dataclass
class EmbeddingVector:
    values: np.ndarray
    provider_id: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("embedding must be a non-empty 1-d vector")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding contains non-finite values")

    @property
    def dimension(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SimilarityScore:
    value: float
    metric_id: str


@dataclass(frozen=True)
class SimilarityMember:
    metric: str  # cosine | levenshtein | qgram
    provider: str | None = None  # cosine only; defaults to hashed_tfidf
    weight: float = 1.0
    q: int = 2  # qgram only

    def __post_init__(self):
        if self.metric not in ("cosine", "levenshtein", "qgram"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.weight <= 0:
            raise ValueError("member weight must be positive")
        if self.q < 1:
            raise ValueError("q must be >= 1")


@dataclass(frozen=True)
class SimilarityModelConfig:
    members: tuple[SimilarityMember, ...]
    normalization: str = "sum_to_one"
    combination: str = "weighted_mean"

    def __post_init__(self):
        if not self.members:
            raise ValueError("similarity config needs at least one member")
        if self.normalization != "sum_to_one":
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.combination != "weighted_mean":
            raise ValueError(f"unknown combination {self.combination!r}")

    @classmethod
    def default(cls) -> "SimilarityModelConfig":
        return cls(
            members=(
                SimilarityMember(metric="cosine", provider=DEFAULT_PROVIDER),
                SimilarityMember(metric="qgram"),
                SimilarityMember(metric="levenshtein"),
            )
        )


# ---------------------------------------------------------------------------
# Metrics


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> SimilarityScore:
    """Dot product over the norm product; symmetric, in [-1, 1]."""
    if a.dimension != b.dimension:
        raise DimensionMismatchError(
            f"dimension mismatch: {a.dimension} vs {b.dimension}"
        )
    na = np.linalg.norm(a.values)
    nb = np.linalg.norm(b.values)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity of an all-zero vector is undefined")
    value = float(np.dot(a.values, b.values) / (na * nb))
    return SimilarityScore(value=min(1.0, max(-1.0, value)), metric_id="cosine")


def levenshtein_similarity(s1: str, s2: str) -> SimilarityScore:
    """1 - editdistance / max length; two empty strings are identical (1.0)."""
    longest = max(len(s1), len(s2))
    if longest == 0:
        return SimilarityScore(value=1.0, metric_id="levenshtein")
    value = 1.0 - levenshtein_distance(s1, s2) / longest
    return SimilarityScore(value=value, metric_id="levenshtein")


def qgram_similarity(s1: str, s2: str, q: int) -> SimilarityScore:
    """1 - profile distance / total gram count; empty profiles match (1.0)."""
    dist, n1, n2 = qgram_profile_distance(s1, s2, q)
    if n1 + n2 == 0:
        return SimilarityScore(value=1.0, metric_id="qgram")
    return SimilarityScore(value=1.0 - dist / (n1 + n2), metric_id="qgram")


def normalize_scores(scores: Sequence[float]) -> list[float]:
    """Shift into the non-negative range if needed, then scale to sum to one.

    All-equal inputs with zero mass after shifting have no ordering signal;
    a uniform distribution is returned and the case is logged as degenerate.
    """
    if len(scores) == 0:
        raise ValueError("scores is empty")
    arr = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("scores contain non-finite values")
    if arr.min() < 0:
        arr = arr - arr.min()
    total = arr.sum()
    if total == 0.0:
        logger.warning("degenerate normalization: all scores equal, using uniform")
        return [1.0 / arr.size] * arr.size
    return list(arr / total)


# ---------------------------------------------------------------------------
# Embedding providers


class EmbeddingProvider:
    """Deterministic text -> fixed-dimension vector contract.

    The same text must always produce the same vector for a given provider
    instance; implementations must tolerate concurrent embed() calls.
    """

    provider_id: str
    dimension: int

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        raise NotImplementedError

    def embed_one(self, text: str) -> EmbeddingVector:
        return EmbeddingVector(self.embed([text])[0], provider_id=self.provider_id)


class HashedTfidfProvider(EmbeddingProvider):
    """TF-IDF over a fitted sentence collection, feature-hashed to a fixed
    dimension.  Pure-lexical stand-in for a neural sentence encoder."""

    provider_id = DEFAULT_PROVIDER

    def __init__(self, corpus_texts: Sequence[str], dimension: int = 256):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self._num_docs = len(corpus_texts)
        df: Counter[str] = Counter()
        for text in corpus_texts:
            df.update({t.surface for t in tokenize(text)})
        self._df = dict(df)

    def _idf(self, surface: str) -> float:
        df = self._df.get(surface, 0)
        return float(np.log((1 + self._num_docs) / (1 + df)) + 1.0)

    @staticmethod
    def _bucket(surface: str, dimension: int) -> int:
        digest = hashlib.blake2b(surface.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % dimension

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for row, text in enumerate(texts):
            counts = Counter(t.surface for t in tokenize(text))
            for surface, tf in sorted(counts.items()):
                out[row, self._bucket(surface, self.dimension)] += tf * self._idf(
                    surface
                )
        return out


class RemoteEmbeddingProvider(EmbeddingProvider):
    """Client for the HTTP embedding protocol (POST /embed, GET /health)."""

    MAX_BATCH = 256

    def __init__(self, base_url: str | None = None, timeout: float = 30.0):
        import requests

        self._requests = requests
        # The env var overrides any configured URL so a deployment can be
        # repointed without editing config files.
        base_url = os.environ.get(EMBED_URL_ENV) or base_url
        if not base_url:
            raise ProviderUnavailableError(
                f"no embedding endpoint configured (set {EMBED_URL_ENV} or pass a URL)"
            )
        self._base = base_url.rstrip("/")
        self._timeout = timeout
        try:
            resp = requests.get(f"{self._base}/health", timeout=timeout)
        except requests.RequestException as exc:
            raise ProviderUnavailableError(
                f"embedding endpoint {self._base} unreachable: {exc}"
            ) from exc
        if resp.status_code != 200:
            raise ProviderUnavailableError(
                f"embedding endpoint {self._base} not ready (HTTP {resp.status_code})"
            )
        health = resp.json()
        self.provider_id = str(health["model_id"])
        self.dimension = int(health["dimension"])

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        rows = []
        for start in range(0, len(texts), self.MAX_BATCH):
            batch = list(texts[start : start + self.MAX_BATCH])
            try:
                resp = self._requests.post(
                    f"{self._base}/embed", json={"texts": batch}, timeout=self._timeout
                )
            except self._requests.RequestException as exc:
                raise ProviderUnavailableError(
                    f"embed request to {self._base} failed: {exc}"
                ) from exc
            if resp.status_code != 200:
                raise ProviderUnavailableError(
                    f"embed request rejected (HTTP {resp.status_code}): {resp.text}"
                )
            payload = resp.json()
            vectors = np.asarray(payload["embeddings"], dtype=np.float64)
            if vectors.ndim != 2 or vectors.shape != (len(batch), self.dimension):
                raise DimensionMismatchError(
                    f"server returned shape {vectors.shape}, expected "
                    f"({len(batch)}, {self.dimension})"
                )
            rows.append(vectors)
        if not rows:
            return np.zeros((0, self.dimension), dtype=np.float64)
        return np.vstack(rows)


# ---------------------------------------------------------------------------
# Sentence scoring


def _joined_tokens(text: str) -> str:
    return " ".join(t.surface for t in tokenize(text))


def _cosine_scores(
    provider: EmbeddingProvider, query: str, texts: Sequence[str]
) -> list[float]:
    matrix = provider.embed([query, *texts])
    qv, svs = matrix[0], matrix[1:]
    qnorm = float(np.linalg.norm(qv))
    if qnorm == 0.0:
        raise ZeroVectorError(
            f"provider {provider.provider_id!r} embedded the query to a zero vector"
        )
    norms = np.linalg.norm(svs, axis=1)
    scores = np.zeros(len(texts), dtype=np.float64)
    nonzero = norms > 0
    scores[nonzero] = (svs[nonzero] @ qv) / (norms[nonzero] * qnorm)
    # zero-vector sentences (no shared vocabulary at all) score 0, the
    # non-negative floor for tf-idf style embeddings
    return [float(min(1.0, max(-1.0, s))) for s in scores]


def score_sentences(
    config: SimilarityModelConfig,
    query: str,
    sentences: Sequence[Sentence],
    providers: Mapping[str, EmbeddingProvider] | None = None,
) -> list[ScoredSentence]:
    """Score every sentence against the query with the configured members.

    Embedding members see raw text; string members compare lowercased
    token-joined text.  Per-member scores are normalized over the sentence
    axis and combined by weighted mean, so output scores are non-negative
    and ordered like the evidence strength.  When no provider mapping is
    given, cosine members fall back to a hashed TF-IDF provider fitted on
    the given sentences.
    """
    if not sentences:
        raise ValueError("sentences is empty")
    texts = [s.text for s in sentences]
    query_joined = _joined_tokens(query)
    joined = [_joined_tokens(t) for t in texts]

    default_provider: HashedTfidfProvider | None = None
    combined = np.zeros(len(sentences), dtype=np.float64)
    total_weight = 0.0
    for member in config.members:
        if member.metric == "cosine":
            name = member.provider or DEFAULT_PROVIDER
            if providers is not None and name in providers:
                provider = providers[name]
            elif name == DEFAULT_PROVIDER:
                if default_provider is None:
                    default_provider = HashedTfidfProvider(texts)
                provider = default_provider
            else:
                raise ProviderUnavailableError(
                    f"no embedding provider registered under {name!r}"
                )
            raw = _cosine_scores(provider, query, texts)
        elif member.metric == "levenshtein":
            raw = [levenshtein_similarity(query_joined, s).value for s in joined]
        else:
            raw = [qgram_similarity(query_joined, s, member.q).value for s in joined]
        combined += member.weight * np.asarray(normalize_scores(raw))
        total_weight += member.weight
    combined /= total_weight
    return [
        ScoredSentence(sentence_index=s.index, score=float(c))
        for s, c in zip(sentences, combined)
    ]
