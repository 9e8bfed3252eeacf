"""Dataset model and ingestion.

Documents are sentence-segmented movie plots (or any long text); items are
multiple-choice questions over one document.  Everything is immutable after
load so the pipeline can share a dataset across worker threads.
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from statistics import mean
from typing import Iterator

from .errors import ParseError, SchemaError

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")
FORMATS = ("movieqa_official", "normalized_jsonl")


@dataclass(frozen=True)
class Token:
    """A lowercased word with its 0-based position in the sentence."""

    surface: str
    position: int


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str

    @cached_property
    def tokens(self) -> tuple[Token, ...]:
        return tuple(tokenize(self.text))

    @cached_property
    def token_surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class QAItem:
    qid: str
    doc_id: str
    question: str
    choices: tuple[str, ...]
    correct_index: int | None = None
    gold_alignment: tuple[int, ...] | None = None


@dataclass
class Dataset:
    split: str
    documents: dict[str, Document]
    items: list[QAItem]

    def document_for(self, item: QAItem) -> Document:
        return self.documents[item.doc_id]

    def item_by_qid(self, qid: str) -> QAItem | None:
        for item in self.items:
            if item.qid == qid:
                return item
        return None


@dataclass
class StatsReport:
    """Corpus statistics; averages are None when their denominator is empty
    (e.g. answer-word averages on an unlabeled split)."""

    num_movies: int
    num_questions: int
    avg_question_words: float | None
    avg_correct_answer_words: float | None
    avg_wrong_answer_words: float | None
    avg_sentences_per_plot: float | None
    avg_words_per_sentence: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _strip_edge_punct(piece: str) -> str:
    start, end = 0, len(piece)
    while start < end and unicodedata.category(piece[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(piece[end - 1]).startswith("P"):
        end -= 1
    return piece[start:end]


def tokenize(text: str) -> list[Token]:
    """Lowercase, split on whitespace, strip punctuation off each edge.

    Pieces that are pure punctuation are dropped; positions are reassigned
    consecutively.  Deterministic, no external state.
    """
    out = []
    for piece in text.lower().split():
        surface = _strip_edge_punct(piece)
        if surface:
            out.append(Token(surface=surface, position=len(out)))
    return out


def word_count(text: str) -> int:
    return len(tokenize(text))


# Words that end with a period without ending a sentence.  Deliberately
# short: single capital letters (initials) must still split, per the
# segmentation rule.
_ABBREVIATIONS = frozenset(
    "mr mrs ms dr prof rev gen col lt sgt capt st jr sr vs etc e.g i.e mt fig al".split()
)

_TERMINATOR_RE = re.compile(r"[.!?]+(?=\s)")


def _last_word(prefix: str) -> str:
    parts = prefix.rsplit(None, 1)
    return parts[-1] if parts else prefix


def segment_sentences(text: str) -> list[Sentence]:
    """Split raw text into sentences.

    A boundary is sentence-final punctuation (. ! ?) followed by whitespace
    and an uppercase letter, unless the preceding word is a known
    abbreviation.  Unknown abbreviations will over-split; plots distributed
    pre-segmented never hit this path.
    """
    sentences: list[str] = []
    start = 0
    for m in _TERMINATOR_RE.finditer(text):
        end = m.end()
        rest = text[end:]
        lead = rest.lstrip()
        if not lead or not lead[0].isupper():
            continue
        before = _last_word(text[start : m.start() + 1])
        if before.rstrip(".!?").lower() in _ABBREVIATIONS:
            continue
        chunk = text[start:end].strip()
        if chunk:
            sentences.append(chunk)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return [Sentence(index=i, text=s) for i, s in enumerate(sentences)]


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing required field '{key}'")
    return obj[key]


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if not isinstance(obj, dict):
                raise ParseError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _item_from_fields(
    qid, doc_id, question, choices, correct_index, gold_alignment, where: str
) -> QAItem:
    choices = tuple(str(c) for c in choices)
    if len(choices) < 2:
        raise SchemaError(f"{where}: item {qid!r} needs at least 2 choices")
    if correct_index is not None:
        correct_index = int(correct_index)
        if not 0 <= correct_index < len(choices):
            raise SchemaError(
                f"{where}: item {qid!r} correct_index {correct_index} out of "
                f"range for {len(choices)} choices"
            )
    if gold_alignment is not None:
        gold_alignment = tuple(int(i) for i in gold_alignment)
    return QAItem(
        qid=str(qid),
        doc_id=str(doc_id),
        question=str(question),
        choices=choices,
        correct_index=correct_index,
        gold_alignment=gold_alignment,
    )


def _validate(ds: Dataset) -> Dataset:
    for item in ds.items:
        doc = ds.documents.get(item.doc_id)
        if doc is None:
            raise SchemaError(
                f"item {item.qid!r} references unknown document {item.doc_id!r}"
            )
        if not doc.sentences:
            raise SchemaError(
                f"document {doc.doc_id!r} referenced by {item.qid!r} has no sentences"
            )
        if item.gold_alignment is not None:
            n = len(doc.sentences)
            for idx in item.gold_alignment:
                if not 0 <= idx < n:
                    raise SchemaError(
                        f"item {item.qid!r} gold_alignment index {idx} out of "
                        f"range for document {doc.doc_id!r} ({n} sentences)"
                    )
            span = sorted(item.gold_alignment)
            consecutive = all(b - a == 1 for a, b in zip(span, span[1:]))
            if len(span) > 5 or not consecutive:
                logger.warning(
                    "item %s: gold_alignment %s is not a consecutive span of <= 5 "
                    "sentences",
                    item.qid,
                    item.gold_alignment,
                )
    return ds


def _split_of(qid: str) -> str | None:
    prefix = qid.split(":", 1)[0] if ":" in qid else ""
    return prefix if prefix in SPLITS else None


def _infer_split(items: list[QAItem], where: str) -> str:
    present = sorted({s for s in (_split_of(i.qid) for i in items) if s})
    if len(present) > 1:
        raise SchemaError(f"{where} mixes splits {present}; pass split= to pick one")
    return present[0] if present else "train"


def _load_normalized(items_path: Path, docs_path: Path, split: str | None) -> Dataset:
    documents: dict[str, Document] = {}
    for lineno, obj in _read_jsonl(docs_path):
        where = f"{docs_path}:{lineno}"
        doc_id = str(_require(obj, "doc_id", where))
        title = str(obj.get("title", doc_id))
        sentences = _require(obj, "sentences", where)
        if doc_id in documents:
            raise SchemaError(f"{where}: duplicate doc_id {doc_id!r}")
        documents[doc_id] = Document(
            doc_id=doc_id,
            title=title,
            sentences=tuple(
                Sentence(index=i, text=str(s)) for i, s in enumerate(sentences)
            ),
        )
    items = []
    for lineno, obj in _read_jsonl(items_path):
        where = f"{items_path}:{lineno}"
        items.append(
            _item_from_fields(
                _require(obj, "qid", where),
                _require(obj, "doc_id", where),
                _require(obj, "question", where),
                _require(obj, "choices", where),
                obj.get("correct_index"),
                obj.get("gold_alignment"),
                where,
            )
        )
    if split is None:
        split = _infer_split(items, str(items_path))
    if split not in SPLITS:
        raise SchemaError(f"unknown split {split!r} (expected one of {SPLITS})")
    return _validate(Dataset(split=split, documents=documents, items=items))


def _read_plot_file(docs_dir: Path, imdb_key: str) -> Document:
    for suffix in (".wiki", ".txt"):
        path = docs_dir / f"{imdb_key}{suffix}"
        if path.exists():
            lines = [
                ln.strip()
                for ln in path.read_text(encoding="utf-8").splitlines()
                if ln.strip()
            ]
            return Document(
                doc_id=imdb_key,
                title=imdb_key,
                sentences=tuple(Sentence(index=i, text=t) for i, t in enumerate(lines)),
            )
    raise SchemaError(f"no plot file for {imdb_key!r} under {docs_dir}")


def _load_movieqa(qa_path: Path, docs_path: Path, split: str | None) -> Dataset:
    try:
        records = json.loads(qa_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{qa_path}: invalid JSON ({exc})") from exc
    if not isinstance(records, list):
        raise ParseError(f"{qa_path}: expected a JSON array of question records")

    present = sorted(
        {s for s in (_split_of(str(r.get("qid", ""))) for r in records) if s}
    )
    if split is None:
        if len(present) != 1:
            raise SchemaError(
                f"{qa_path} mixes splits {present}; pass split= to pick one"
            )
        split = present[0]
    if split not in SPLITS:
        raise SchemaError(f"unknown split {split!r} (expected one of {SPLITS})")

    items = []
    for pos, rec in enumerate(records):
        where = f"{qa_path}[{pos}]"
        qid = str(_require(rec, "qid", where))
        if (_split_of(qid) or "train") != split:
            continue
        items.append(
            _item_from_fields(
                qid,
                _require(rec, "imdb_key", where),
                _require(rec, "question", where),
                _require(rec, "answers", where),
                rec.get("correct_index"),
                rec.get("plot_alignment"),
                where,
            )
        )
    docs_dir = Path(docs_path)
    documents = {
        key: _read_plot_file(docs_dir, key) for key in sorted({i.doc_id for i in items})
    }
    return _validate(Dataset(split=split, documents=documents, items=items))


def load_dataset(
    qa_path: str | Path,
    docs_path: str | Path,
    format: str = "normalized_jsonl",
    split: str | None = None,
) -> Dataset:
    """Load and validate a dataset.

    normalized_jsonl: qa_path is items.jsonl, docs_path is documents.jsonl.
    movieqa_official: qa_path is the challenge qa JSON, docs_path a directory
    of per-movie plot files (one sentence per line, named <imdb_key>.wiki);
    only documents referenced by the selected split are loaded.
    """
    qa_path, docs_path = Path(qa_path), Path(docs_path)
    for p in (qa_path, docs_path):
        if not p.exists():
            raise FileNotFoundError(f"no such path: {p}")
    if format == "normalized_jsonl":
        return _load_normalized(qa_path, docs_path, split)
    if format == "movieqa_official":
        return _load_movieqa(qa_path, docs_path, split)
    raise SchemaError(f"unknown dataset format {format!r} (expected one of {FORMATS})")


def save_dataset(ds: Dataset, docs_path: str | Path, items_path: str | Path) -> None:
    """Write the normalized JSONL interchange files (UTF-8, one object per line)."""
    with open(docs_path, "w", encoding="utf-8") as fh:
        for doc_id in sorted(ds.documents):
            doc = ds.documents[doc_id]
            fh.write(
                json.dumps(
                    {
                        "doc_id": doc.doc_id,
                        "title": doc.title,
                        "sentences": [s.text for s in doc.sentences],
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    with open(items_path, "w", encoding="utf-8") as fh:
        for item in ds.items:
            rec: dict = {
                "qid": item.qid,
                "doc_id": item.doc_id,
                "question": item.question,
                "choices": list(item.choices),
            }
            if item.correct_index is not None:
                rec["correct_index"] = item.correct_index
            if item.gold_alignment is not None:
                rec["gold_alignment"] = list(item.gold_alignment)
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def dataset_stats(ds: Dataset) -> StatsReport:
    """Compute corpus statistics with the package tokenizer as the word counter."""
    q_words = [word_count(i.question) for i in ds.items]
    labeled = [i for i in ds.items if i.correct_index is not None]
    ca_words = [word_count(i.choices[i.correct_index]) for i in labeled]
    wa_words = [
        word_count(c)
        for i in labeled
        for j, c in enumerate(i.choices)
        if j != i.correct_index
    ]
    sent_counts = [len(d.sentences) for d in ds.documents.values()]
    sent_words = [
        len(s.tokens) for d in ds.documents.values() for s in d.sentences
    ]
    return StatsReport(
        num_movies=len(ds.documents),
        num_questions=len(ds.items),
        avg_question_words=mean(q_words) if q_words else None,
        avg_correct_answer_words=mean(ca_words) if ca_words else None,
        avg_wrong_answer_words=mean(wa_words) if wa_words else None,
        avg_sentences_per_plot=mean(sent_counts) if sent_counts else None,
        avg_words_per_sentence=mean(sent_words) if sent_words else None,
    )
