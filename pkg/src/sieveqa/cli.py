"""Command line interface.

Subcommands: ingest, stats, select, answer, eval, trace.  Every config
field has a flag; flags beat the --config file, which beats defaults.
Exit codes: 0 success, 1 user error, 2 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import RunConfig
from .corpus import dataset_stats, save_dataset
from .errors import SieveqaError
from .evaluation import emit_report, evaluate, trace, write_predictions

_STAT_ROWS = (
    ("documents", "num_movies", "d"),
    ("questions", "num_questions", "d"),
    ("avg words per question", "avg_question_words", ".2f"),
    ("avg words per correct answer", "avg_correct_answer_words", ".2f"),
    ("avg words per wrong answer", "avg_wrong_answer_words", ".2f"),
    ("avg sentences per document", "avg_sentences_per_plot", ".2f"),
    ("avg words per sentence", "avg_words_per_sentence", ".2f"),
)


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--data", help="dataset directory (items.jsonl + documents.jsonl, "
                                  "or qa.json + plot/ for the official format)")
    p.add_argument("--items", help="questions file (overrides --data)")
    p.add_argument("--documents", help="documents file or plot directory (overrides --data)")
    p.add_argument("--format", choices=["normalized_jsonl", "movieqa_official"])
    p.add_argument("--split", help="split name; inferred from qids when omitted")


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, help="sentences to keep (default 5)")
    p.add_argument("--max-tokens", type=int, help="context token budget (default 130)")
    p.add_argument("--metrics", help="comma list of similarity members, each "
                                     "metric[N][@provider][:weight], e.g. "
                                     "'cosine@remote:2,qgram3,levenshtein'")
    p.add_argument("--query-mode", choices=["concat_all", "per_answer"])
    p.add_argument("--reader", action="append", dest="readers", metavar="READER",
                   help="'lexical' or a scoring-service URL; repeat for an ensemble")
    p.add_argument("--ensemble-rule", choices=["majority", "mean_probability"])
    p.add_argument("--ensemble-weights", help="comma list of per-reader weights")
    p.add_argument("--temperature", type=float)
    p.add_argument("--embed-url", help="remote embedding endpoint "
                                       "(SIEVEQA_EMBED_URL overrides)")
    p.add_argument("--seed", type=int)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.data is not None:
        cfg.data_dir = args.data
    if args.items is not None:
        cfg.items_path = args.items
    if args.documents is not None:
        cfg.documents_path = args.documents
    if args.format is not None:
        cfg.format = args.format
    if args.split is not None:
        cfg.split = args.split
    for flag, attr in (
        ("k", "k"),
        ("max_tokens", "max_tokens"),
        ("query_mode", "query_mode"),
        ("readers", "readers"),
        ("ensemble_rule", "ensemble_rule"),
        ("temperature", "temperature"),
        ("embed_url", "embed_url"),
        ("seed", "seed"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, attr, value)
    metrics = getattr(args, "metrics", None)
    if metrics is not None:
        cfg.metrics = [spec for spec in metrics.split(",") if spec.strip()]
    weights = getattr(args, "ensemble_weights", None)
    if weights is not None:
        cfg.ensemble_weights = [float(w) for w in weights.split(",")]
    return cfg


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        print(text, end="" if text.endswith("\n") else "\n")


# -- subcommands -------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    ds = cfg.load()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, out / "documents.jsonl", out / "items.jsonl")
    print(f"wrote {len(ds.documents)} documents and {len(ds.items)} items to {out}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    report = dataset_stats(cfg.load())
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    width = max(len(label) for label, _, _ in _STAT_ROWS)
    for label, attr, fmt in _STAT_ROWS:
        value = getattr(report, attr)
        rendered = "n/a" if value is None else format(value, fmt)
        print(f"{label:<{width}}  {rendered}")
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    ds = cfg.load()
    pipeline = cfg.build_pipeline(ds)
    lines = []
    for item in sorted(ds.items, key=lambda i: i.qid):
        _, context = pipeline.select_for(item)
        lines.append(json.dumps({
            "qid": item.qid,
            "sentence_indices": [s.sentence_index for s in context.selected],
            "scores": [s.score for s in context.selected],
            "real_token_count": context.real_token_count,
        }, sort_keys=True))
    _write_or_print("\n".join(lines) + "\n", args.out)
    return 0


def cmd_answer(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    ds = cfg.load()
    pipeline = cfg.build_pipeline(ds)
    item = ds.item_by_qid(args.qid)
    if item is None:
        print(f"error: unknown qid {args.qid!r}", file=sys.stderr)
        return 1
    result = pipeline.answer(item)
    print(f"qid: {item.qid}")
    print(f"predicted: {result.predicted}  {item.choices[result.predicted]!r}")
    for dist in result.member_dists:
        probs = " ".join(f"{p:.4f}" for p in dist.probabilities)
        print(f"  {dist.reader_id}: {probs}")
    if item.correct_index is not None:
        verdict = "correct" if result.predicted == item.correct_index else "wrong"
        print(f"label: {item.correct_index}  ({verdict})")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    ds = cfg.load()
    pipeline = cfg.build_pipeline(ds)
    report = evaluate(ds, pipeline, jobs=args.jobs, config_echo=cfg.echo_dict())
    if args.out:
        emit_report(report, args.report_format, args.out)
    if args.predictions:
        write_predictions(report, args.predictions)
    print(f"split: {report.split}")
    print(f"items: {report.num_items} labeled, {report.num_unlabeled} unlabeled")
    if report.accuracy is not None:
        print(f"accuracy: {report.accuracy:.4f} ({report.num_correct}/{report.num_items})")
    if report.selection_recall is not None:
        print(f"selection recall: {report.selection_recall:.4f}")
    if report.member_accuracies:
        for rid, acc in report.member_accuracies.items():
            print(f"  {rid}: {acc:.4f}")
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    ds = cfg.load()
    pipeline = cfg.build_pipeline(ds)
    tr = trace(args.qid, ds, pipeline)
    if args.out:
        Path(args.out).write_text(
            json.dumps(dataclasses.asdict(tr), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    print(f"qid: {tr.qid}")
    for q in tr.queries:
        print(f"query: {q}")
    print("sentences (index, score, flags; S=selected, G=gold):")
    for row in tr.sentences:
        flags = ("S" if row["selected"] else " ") + ("G" if row["gold"] else " ")
        missed = "  MISSED" if row["gold"] and not row["selected"] else ""
        print(f"  [{row['index']:>3}] {row['score']:.6f} {flags}{missed}  {row['text']}")
    for t in tr.truncations:
        print(f"truncated sentence {t['sentence_index']}: removed {t['removed']} tokens")
    print(f"context tokens: {tr.real_token_count}")
    print("choices:")
    for row in tr.choices:
        marker = ">" if row["index"] == tr.predicted_index else " "
        probs = " ".join(
            f"{key.removeprefix('prob_')}={row[key]:.4f}"
            for key in sorted(row)
            if key.startswith("prob_")
        )
        print(f" {marker} {row['index']}. {row['text']}  {probs}")
    if tr.correct_index is not None:
        verdict = "correct" if tr.predicted_is_correct else "wrong"
        print(f"label: {tr.correct_index}  ({verdict})")
    if tr.missed_gold_indices:
        print(f"gold sentences not selected: {tr.missed_gold_indices}")
    return 0


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sieveqa",
        description="Answer multiple-choice questions over long documents by "
                    "selecting a small question-similar sentence subset first.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a dataset to the normalized JSONL layout")
    _add_data_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="print corpus statistics")
    _add_data_flags(p)
    p.add_argument("--out", help="also write the stats as JSON")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("select", help="export the selected sentences per question")
    _add_data_flags(p)
    _add_pipeline_flags(p)
    p.add_argument("--out", help="output JSONL path (default stdout)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("answer", help="answer a single question")
    _add_data_flags(p)
    _add_pipeline_flags(p)
    p.add_argument("--qid", required=True)
    p.set_defaults(func=cmd_answer)

    p = sub.add_parser("eval", help="run the full pipeline and score it")
    _add_data_flags(p)
    _add_pipeline_flags(p)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker threads (default: all cores; results are "
                        "identical at any value)")
    p.add_argument("--out", help="report path")
    p.add_argument("--report-format", default="json",
                   choices=["json", "csv", "markdown_table"])
    p.add_argument("--predictions", help="write {qid, predicted_index} JSONL")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("trace", help="show the full evidence chain for one question")
    _add_data_flags(p)
    _add_pipeline_flags(p)
    p.add_argument("--qid", required=True)
    p.add_argument("--out", help="also write the trace as JSON")
    p.set_defaults(func=cmd_trace)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; that is a user error in our scheme
        return 0 if not exc.code else 1
    try:
        return args.func(args)
    except (SieveqaError, FileNotFoundError, NotADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
