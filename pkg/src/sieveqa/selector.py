"""Query construction, top-k sentence selection, and token budgeting.

Selected sentences are kept in document order (narrative order helps the
reader); the token budget is enforced by trimming the tail of the
least-similar sentence first, never emptying a sentence while a
lower-scored one still has trimmable tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import Document, QAItem

PAD_ID = 0
UNK_ID = 1


@dataclass(frozen=True)
class QueryText:
    text: str
    qid: str
    mode: str  # "concat_all" or "per_answer"


@dataclass(frozen=True)
class ScoredSentence:
    sentence_index: int
    score: float


@dataclass(frozen=True)
class TruncationAction:
    sentence_index: int
    removed: int


@dataclass(frozen=True)
class BudgetConfig:
    k: int = 5
    max_tokens: int = 130

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_tokens < self.k:
            raise ValueError(
                f"max_tokens ({self.max_tokens}) must be >= k ({self.k}) so every "
                "selected sentence keeps at least one token"
            )


@dataclass
class SelectedContext:
    qid: str
    selected: list[ScoredSentence]  # ascending by sentence_index
    token_ids: list[int]  # length == max_tokens, PAD_ID beyond real content
    real_token_count: int
    context_tokens: list[str]  # kept token surfaces, length == real_token_count
    truncations: list[TruncationAction] = field(default_factory=list)


class Vocabulary:
    """Corpus token -> integer id map; 0 is padding, 1 is unknown."""

    def __init__(self, surfaces: Iterable[str]):
        self._ids = {s: i for i, s in enumerate(sorted(set(surfaces)), start=2)}

    @classmethod
    def from_documents(cls, documents: Iterable[Document]) -> "Vocabulary":
        return cls(
            t.surface for doc in documents for s in doc.sentences for t in s.tokens
        )

    def __len__(self) -> int:
        return len(self._ids) + 2

    def id_of(self, surface: str) -> int:
        return self._ids.get(surface, UNK_ID)

    def encode(self, surfaces: Iterable[str]) -> list[int]:
        return [self.id_of(s) for s in surfaces]


def build_query(item: QAItem, mode: str = "concat_all") -> list[QueryText]:
    """Build retrieval queries for one item.

    concat_all returns a single query (question followed by every choice);
    per_answer returns one query per choice.
    """
    if not item.question or not item.choices:
        raise ValueError(f"item {item.qid!r} needs a question and choices")
    if mode == "concat_all":
        text = " ".join([item.question, *item.choices])
        return [QueryText(text=text, qid=item.qid, mode=mode)]
    if mode == "per_answer":
        return [
            QueryText(text=f"{item.question} {choice}", qid=item.qid, mode=mode)
            for choice in item.choices
        ]
    raise ValueError(f"unknown query mode {mode!r}")


def select_top_k(scored: Sequence[ScoredSentence], k: int) -> list[ScoredSentence]:
    """The k highest-scoring sentences, returned in document order.

    Score ties prefer the smaller sentence index.
    """
    if not scored:
        raise ValueError("scored is empty")
    ranked = sorted(scored, key=lambda s: (-s.score, s.sentence_index))
    return sorted(ranked[:k], key=lambda s: s.sentence_index)


def _truncation_order(selected: Sequence[ScoredSentence]) -> list[ScoredSentence]:
    # least similar first; among equal scores the later sentence is trimmed first
    return sorted(selected, key=lambda s: (s.score, -s.sentence_index))


def enforce_token_budget(
    selected: Sequence[ScoredSentence],
    doc: Document,
    cfg: BudgetConfig,
    vocabulary: Vocabulary | None = None,
    qid: str = "",
) -> SelectedContext:
    """Concatenate the selected sentences' tokens, trim to the budget, pad.

    Trimming removes tokens from the tail of the lowest-scored sentence
    first, then the next lowest, leaving at least one token per sentence
    until no alternative remains.  token_ids is always exactly
    cfg.max_tokens long with PAD_ID in every position past the real content.
    """
    selected = sorted(selected, key=lambda s: s.sentence_index)
    if vocabulary is None:
        vocabulary = Vocabulary.from_documents([doc])

    kept = {
        s.sentence_index: len(doc.sentences[s.sentence_index].tokens)
        for s in selected
    }
    overflow = sum(kept.values()) - cfg.max_tokens
    truncations = []
    if overflow > 0:
        for entry in _truncation_order(selected):
            if overflow <= 0:
                break
            trimmable = kept[entry.sentence_index] - 1
            if trimmable <= 0:
                continue
            removed = min(trimmable, overflow)
            kept[entry.sentence_index] -= removed
            overflow -= removed
            truncations.append(
                TruncationAction(sentence_index=entry.sentence_index, removed=removed)
            )
        # max_tokens >= k guarantees one token per sentence always fits
        assert overflow <= 0, "token budget unreachable despite max_tokens >= k"

    context_tokens: list[str] = []
    for entry in selected:
        surfaces = doc.sentences[entry.sentence_index].token_surfaces
        context_tokens.extend(surfaces[: kept[entry.sentence_index]])

    ids = vocabulary.encode(context_tokens)
    real = len(ids)
    ids = ids + [PAD_ID] * (cfg.max_tokens - real)
    return SelectedContext(
        qid=qid,
        selected=list(selected),
        token_ids=ids,
        real_token_count=real,
        context_tokens=context_tokens,
        truncations=truncations,
    )


def token_ids_of(tokens: Sequence[str], vocabulary: Vocabulary) -> list[int]:
    """Deterministic token -> id mapping; unknown tokens map to UNK_ID."""
    return vocabulary.encode(tokens)
