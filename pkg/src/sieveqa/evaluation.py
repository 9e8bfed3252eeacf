"""Dataset-level evaluation: accuracy, selection recall, traces, reports."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import Dataset
from .errors import SieveqaError, UnknownQidError
from .pipeline import ItemResult, Pipeline
from .reader import predict
from .selector import build_query

REPORT_FORMATS = ("json", "csv", "markdown_table")


@dataclass
class EvalReport:
    """Accuracy report over one dataset split.

    num_items counts the labeled items entering the accuracy denominator;
    unlabeled items are listed in per_item with predictions only and
    tallied in num_unlabeled.
    """

    split: str
    num_items: int
    num_correct: int
    accuracy: float | None
    selection_recall: float | None
    per_item: list[dict]
    num_unlabeled: int = 0
    member_accuracies: dict[str, float] | None = None
    config: dict | None = None

    def to_dict(self) -> dict:
        return {
            "split": self.split,
            "num_items": self.num_items,
            "num_correct": self.num_correct,
            "accuracy": self.accuracy,
            "selection_recall": self.selection_recall,
            "num_unlabeled": self.num_unlabeled,
            "member_accuracies": self.member_accuracies,
            "config": self.config,
            "per_item": self.per_item,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            split=data["split"],
            num_items=data["num_items"],
            num_correct=data["num_correct"],
            accuracy=data["accuracy"],
            selection_recall=data["selection_recall"],
            per_item=data["per_item"],
            num_unlabeled=data.get("num_unlabeled", 0),
            member_accuracies=data.get("member_accuracies"),
            config=data.get("config"),
        )


@dataclass
class TraceReport:
    """Full evidence chain for one question: every sentence score, the
    selected/gold flags, truncation actions, and per-choice scoring."""

    qid: str
    queries: list[str]
    sentences: list[dict]  # {index, text, score, selected, gold}
    truncations: list[dict]  # {sentence_index, removed}
    real_token_count: int
    choices: list[dict]  # {index, text, logits per reader, probabilities ...}
    predicted_index: int
    correct_index: int | None
    predicted_is_correct: bool | None
    missed_gold_indices: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _run_items(ds: Dataset, pipeline: Pipeline, jobs: int | None) -> list[ItemResult]:
    if jobs is not None and jobs < 1:
        raise ValueError("jobs must be >= 1")
    if jobs == 1 or len(ds.items) <= 1:
        return [pipeline.answer(item) for item in ds.items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(pipeline.answer, ds.items))


def _covers_gold(result: ItemResult, gold: Sequence[int]) -> bool:
    selected = {s.sentence_index for s in result.context.selected}
    return set(gold).issubset(selected)


def evaluate(
    ds: Dataset,
    pipeline: Pipeline,
    jobs: int | None = None,
    config_echo: dict | None = None,
) -> EvalReport:
    """Run the pipeline over every item; deterministic for a fixed config
    and dataset regardless of the jobs setting."""
    results = _run_items(ds, pipeline, jobs)
    by_qid = sorted(zip(ds.items, results), key=lambda pair: pair[0].qid)

    per_item = []
    num_labeled = 0
    num_correct = 0
    member_right: dict[str, int] = {}
    recall_hits = 0
    recall_total = 0
    for item, result in by_qid:
        correct = None
        if item.correct_index is not None:
            correct = result.predicted == item.correct_index
            num_labeled += 1
            num_correct += int(correct)
            for dist in result.member_dists:
                member_right.setdefault(dist.reader_id, 0)
                member_right[dist.reader_id] += int(
                    predict(dist) == item.correct_index
                )
        if item.gold_alignment is not None:
            recall_total += 1
            recall_hits += int(_covers_gold(result, item.gold_alignment))
        per_item.append(
            {
                "qid": item.qid,
                "predicted": result.predicted,
                "correct": correct,
                "selected_indices": [
                    s.sentence_index for s in result.context.selected
                ],
            }
        )

    member_acc = (
        {rid: right / num_labeled for rid, right in sorted(member_right.items())}
        if num_labeled
        else None
    )
    return EvalReport(
        split=ds.split,
        num_items=num_labeled,
        num_correct=num_correct,
        accuracy=(num_correct / num_labeled) if num_labeled else None,
        selection_recall=(recall_hits / recall_total) if recall_total else None,
        per_item=per_item,
        num_unlabeled=len(ds.items) - num_labeled,
        member_accuracies=member_acc,
        config=config_echo,
    )


def selection_recall(ds: Dataset, pipeline: Pipeline, jobs: int | None = None) -> float:
    """Fraction of gold-aligned items whose selected sentences cover the
    entire gold span."""
    aligned = [item for item in ds.items if item.gold_alignment is not None]
    if not aligned:
        raise SieveqaError("no items carry a gold_alignment")
    hits = 0
    for item in aligned:
        _, context = pipeline.select_for(item)
        covered = {s.sentence_index for s in context.selected}
        hits += int(set(item.gold_alignment).issubset(covered))
    return hits / len(aligned)


def trace(qid: str, ds: Dataset, pipeline: Pipeline) -> TraceReport:
    """Reconstruct the full evidence chain for one question."""
    item = ds.item_by_qid(qid)
    if item is None:
        raise UnknownQidError(f"unknown qid {qid!r}")
    doc = ds.document_for(item)
    result = pipeline.answer(item)
    selected = {s.sentence_index for s in result.context.selected}
    gold = set(item.gold_alignment or ())
    sentences = [
        {
            "index": s.index,
            "text": s.text,
            "score": score.score,
            "selected": s.index in selected,
            "gold": s.index in gold,
        }
        for s, score in zip(doc.sentences, result.scored)
    ]
    choices = []
    for idx, text in enumerate(item.choices):
        row: dict = {"index": idx, "text": text}
        for dist in result.member_dists:
            row[f"logit_{dist.reader_id}"] = result.member_logits[dist.reader_id][idx]
            row[f"prob_{dist.reader_id}"] = dist.probabilities[idx]
        choices.append(row)
    correct = item.correct_index
    return TraceReport(
        qid=qid,
        queries=[q.text for q in build_query(item, pipeline.query_mode)],
        sentences=sentences,
        truncations=[
            {"sentence_index": t.sentence_index, "removed": t.removed}
            for t in result.context.truncations
        ],
        real_token_count=result.context.real_token_count,
        choices=choices,
        predicted_index=result.predicted,
        correct_index=correct,
        predicted_is_correct=(result.predicted == correct) if correct is not None else None,
        missed_gold_indices=sorted(gold - selected),
    )


def emit_report(report, format: str, path: str | Path) -> Path:
    """Write a report to disk; json is lossless, csv covers per_item, and
    markdown_table lays out model vs. accuracy columns."""
    path = Path(path)
    if format == "json":
        payload = report.to_dict()
        path.write_text(
            json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
    elif format == "csv":
        if not isinstance(report, EvalReport):
            raise ValueError("csv output is defined for EvalReport only")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["qid", "predicted", "correct", "selected_indices"])
            for row in report.per_item:
                writer.writerow(
                    [
                        row["qid"],
                        row["predicted"],
                        "" if row["correct"] is None else row["correct"],
                        ";".join(str(i) for i in row["selected_indices"]),
                    ]
                )
    elif format == "markdown_table":
        if not isinstance(report, EvalReport):
            raise ValueError("markdown output is defined for EvalReport only")
        lines = ["| Model | " + f"{report.split} Acc.% |", "| --- | --- |"]
        for rid, acc in (report.member_accuracies or {}).items():
            lines.append(f"| {rid} | {100 * acc:.2f} |")
        if report.accuracy is not None:
            lines.append(f"| pipeline | {100 * report.accuracy:.2f} |")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {format!r} (one of {REPORT_FORMATS})")
    return path


def write_predictions(report: EvalReport, path: str | Path) -> Path:
    """One {qid, predicted_index} JSON object per line, the submission shape."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for row in report.per_item:
            fh.write(
                json.dumps({"qid": row["qid"], "predicted_index": row["predicted"]})
                + "\n"
            )
    return path
