"""Readers: map (budgeted context, question, choices) to choice probabilities.

The reader contract is pluggable: the built-in lexical reader scores each
choice by IDF-weighted token overlap with the context and question; an HTTP
reader forwards the same inputs to a remote scorer.  Any reader must be
deterministic and support an arbitrary number of choices >= 2.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Document, tokenize
from .errors import ReaderUnavailableError
from .selector import SelectedContext


@dataclass
class ChoiceDistribution:
    qid: str
    probabilities: list[float]
    reader_id: str

    def __post_init__(self):
        total = math.fsum(self.probabilities)
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise ValueError(f"probabilities sum to {total}, expected 1")
        if any(p < 0 or p > 1 for p in self.probabilities):
            raise ValueError("probabilities must lie in [0, 1]")


def softmax(logits: Sequence[float], temperature: float = 1.0) -> np.ndarray:
    """Numerically stable softmax (max-subtraction before exponentiation)."""
    if len(logits) == 0:
        raise ValueError("logits is empty")
    z = np.asarray(logits, dtype=np.float64) / temperature
    if not np.all(np.isfinite(z)):
        raise ValueError("logits contain non-finite values")
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def predict(dist: ChoiceDistribution) -> int:
    """Argmax choice index; ties resolve to the lowest index."""
    return int(np.argmax(dist.probabilities))


class Reader:
    reader_id: str

    def score_choices(
        self,
        context: SelectedContext,
        question: str,
        choices: Sequence[str],
        doc: Document,
    ) -> list[float]:
        """Return one finite logit per choice."""
        raise NotImplementedError

    def distribution(
        self,
        context: SelectedContext,
        question: str,
        choices: Sequence[str],
        doc: Document,
        temperature: float = 1.0,
    ) -> ChoiceDistribution:
        if len(choices) < 2:
            raise ValueError("need at least 2 choices")
        logits = self.score_choices(context, question, choices, doc)
        probs = softmax(logits, temperature=temperature)
        return ChoiceDistribution(
            qid=context.qid, probabilities=[float(p) for p in probs],
            reader_id=self.reader_id,
        )


class LexicalReader(Reader):
    """Deterministic baseline: a choice scores the summed IDF of its token
    types that also appear in the kept context or the question.  IDF is
    computed over the document's sentences, so rare plot words dominate."""

    reader_id = "lexical"

    @staticmethod
    def _idf_table(doc: Document) -> dict[str, float]:
        df: Counter[str] = Counter()
        for sentence in doc.sentences:
            df.update(set(sentence.token_surfaces))
        n = len(doc.sentences)
        return {s: math.log((1 + n) / (1 + d)) + 1.0 for s, d in df.items()}

    def score_choices(self, context, question, choices, doc) -> list[float]:
        idf = self._idf_table(doc)
        unseen = math.log(1 + len(doc.sentences)) + 1.0
        pool = set(context.context_tokens)
        pool.update(t.surface for t in tokenize(question))
        logits = []
        for choice in choices:
            total = 0.0
            for surface in sorted({t.surface for t in tokenize(choice)}):
                if surface in pool:
                    total += idf.get(surface, unseen)
            logits.append(total)
        return logits


class HttpReader(Reader):
    """Remote scorer speaking JSON: request {context_tokens, question,
    choices}, response {logits: [...]}."""

    def __init__(self, base_url: str, reader_id: str = "http", timeout: float = 30.0):
        import requests

        self._requests = requests
        self._base = base_url.rstrip("/")
        self._timeout = timeout
        self.reader_id = reader_id

    def score_choices(self, context, question, choices, doc) -> list[float]:
        payload = {
            "context_tokens": list(context.context_tokens),
            "question": question,
            "choices": list(choices),
        }
        try:
            resp = self._requests.post(
                f"{self._base}/score", json=payload, timeout=self._timeout
            )
        except self._requests.RequestException as exc:
            raise ReaderUnavailableError(
                f"reader endpoint {self._base} unreachable: {exc}"
            ) from exc
        if resp.status_code != 200:
            raise ReaderUnavailableError(
                f"reader request rejected (HTTP {resp.status_code}): {resp.text}"
            )
        logits = [float(x) for x in resp.json()["logits"]]
        if len(logits) != len(choices):
            raise ReaderUnavailableError(
                f"reader returned {len(logits)} logits for {len(choices)} choices"
            )
        return logits
