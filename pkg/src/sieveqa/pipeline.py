"""Per-question pipeline: query -> sentence scores -> budgeted context ->
reader distributions -> prediction."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import Dataset, Document, QAItem
from .ensemble import EnsembleConfig, aggregate_probabilities, majority_vote
from .errors import ReaderUnavailableError
from .reader import ChoiceDistribution, LexicalReader, Reader, predict, softmax
from .selector import (
    BudgetConfig,
    ScoredSentence,
    SelectedContext,
    Vocabulary,
    build_query,
    enforce_token_budget,
    select_top_k,
)
from .similarity import (
    DEFAULT_PROVIDER,
    EmbeddingProvider,
    HashedTfidfProvider,
    SimilarityModelConfig,
    score_sentences,
)

QUERY_MODES = ("concat_all", "per_answer")


@dataclass
class ItemResult:
    qid: str
    scored: list[ScoredSentence]  # every sentence of the document, input order
    context: SelectedContext
    member_logits: dict[str, list[float]]
    member_dists: list[ChoiceDistribution]
    predicted: int


class Pipeline:
    """Wires the stages together for one dataset.

    Stateless per question apart from caches (vocabulary, per-document
    default providers), so answer() may run concurrently across items.
    """

    def __init__(
        self,
        dataset: Dataset,
        budget: BudgetConfig | None = None,
        similarity: SimilarityModelConfig | None = None,
        readers: Sequence[Reader] | None = None,
        ensemble: EnsembleConfig | None = None,
        query_mode: str = "concat_all",
        providers: Mapping[str, EmbeddingProvider] | None = None,
        temperature: float = 1.0,
    ):
        if query_mode not in QUERY_MODES:
            raise ValueError(f"unknown query mode {query_mode!r}")
        self.dataset = dataset
        self.budget = budget or BudgetConfig()
        self.similarity = similarity or SimilarityModelConfig.default()
        self.readers = list(readers) if readers else [LexicalReader()]
        by_id = {r.reader_id: r for r in self.readers}
        if len(by_id) != len(self.readers):
            raise ValueError("reader ids must be unique")
        self.ensemble = ensemble or EnsembleConfig(
            members=tuple(r.reader_id for r in self.readers),
            weights=tuple(1.0 for _ in self.readers),
        )
        missing = [m for m in self.ensemble.members if m not in by_id]
        if missing:
            raise ReaderUnavailableError(f"ensemble references unknown readers {missing}")
        self._ensemble_readers = [by_id[m] for m in self.ensemble.members]
        self.query_mode = query_mode
        self.temperature = temperature
        self.vocabulary = Vocabulary.from_documents(dataset.documents.values())
        self._external_providers = dict(providers or {})
        self._doc_providers: dict[str, HashedTfidfProvider] = {}
        self._provider_lock = threading.Lock()

    def providers_for(self, doc: Document) -> dict[str, EmbeddingProvider]:
        providers: dict[str, EmbeddingProvider] = dict(self._external_providers)
        if DEFAULT_PROVIDER not in providers:
            with self._provider_lock:
                cached = self._doc_providers.get(doc.doc_id)
                if cached is None:
                    cached = HashedTfidfProvider([s.text for s in doc.sentences])
                    self._doc_providers[doc.doc_id] = cached
            providers[DEFAULT_PROVIDER] = cached
        return providers

    def score_item(self, item: QAItem) -> list[ScoredSentence]:
        """Combined similarity score for every sentence of the item's document.

        per_answer mode scores each answer-specific query separately and
        keeps the elementwise maximum, so a sentence close to any single
        candidate answer survives.
        """
        doc = self.dataset.document_for(item)
        providers = self.providers_for(doc)
        queries = build_query(item, self.query_mode)
        per_query = [
            score_sentences(self.similarity, q.text, doc.sentences, providers)
            for q in queries
        ]
        if len(per_query) == 1:
            return per_query[0]
        best = np.max(
            np.asarray([[s.score for s in row] for row in per_query]), axis=0
        )
        return [
            ScoredSentence(sentence_index=s.index, score=float(v))
            for s, v in zip(doc.sentences, best)
        ]

    def select_for(self, item: QAItem) -> tuple[list[ScoredSentence], SelectedContext]:
        doc = self.dataset.document_for(item)
        scored = self.score_item(item)
        top = select_top_k(scored, self.budget.k)
        context = enforce_token_budget(
            top, doc, self.budget, self.vocabulary, qid=item.qid
        )
        return scored, context

    def answer(self, item: QAItem) -> ItemResult:
        doc = self.dataset.document_for(item)
        scored, context = self.select_for(item)
        member_logits: dict[str, list[float]] = {}
        dists: list[ChoiceDistribution] = []
        for rdr in self._ensemble_readers:
            logits = [
                float(x)
                for x in rdr.score_choices(context, item.question, item.choices, doc)
            ]
            member_logits[rdr.reader_id] = logits
            probs = softmax(logits, temperature=self.temperature)
            dists.append(
                ChoiceDistribution(
                    qid=item.qid,
                    probabilities=[float(p) for p in probs],
                    reader_id=rdr.reader_id,
                )
            )
        if len(dists) == 1:
            predicted = predict(dists[0])
        elif self.ensemble.rule == "majority":
            predicted = majority_vote(dists)
        else:
            predicted = predict(aggregate_probabilities(dists, self.ensemble.weights))
        return ItemResult(
            qid=item.qid,
            scored=scored,
            context=context,
            member_logits=member_logits,
            member_dists=dists,
            predicted=predicted,
        )
