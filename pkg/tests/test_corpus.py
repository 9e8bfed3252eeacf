import json
import math

import pytest

from sieveqa.corpus import (
    Dataset,
    Document,
    QAItem,
    Sentence,
    dataset_stats,
    load_dataset,
    save_dataset,
    segment_sentences,
    tokenize,
    word_count,
)
from sieveqa.errors import ParseError, SchemaError


# -- tokenize -----------------------------------------------------------------


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_strips_edge_punctuation():
    tokens = tokenize("Forrest Gump.")
    assert [(t.surface, t.position) for t in tokens] == [("forrest", 0), ("gump", 1)]


def test_tokenize_keeps_internal_apostrophe_drops_stray_punct():
    tokens = tokenize("I'm  Tom ,")
    assert [(t.surface, t.position) for t in tokens] == [("i'm", 0), ("tom", 1)]


def test_tokenize_idempotent_on_joined_output():
    text = "Mr. O'Brien -- watched; the “quiet” harbor!  Étoile 12."
    once = [t.surface for t in tokenize(text)]
    twice = [t.surface for t in tokenize(" ".join(once))]
    assert once == twice


def test_word_count_matches_tokenize():
    text = "Who sailed the barge?"
    assert word_count(text) == len(tokenize(text)) == 4


# -- segment_sentences --------------------------------------------------------


def test_segment_two_simple_sentences():
    sents = segment_sentences("A. B.")
    assert [(s.index, s.text) for s in sents] == [(0, "A."), (1, "B.")]


def test_segment_no_terminator_yields_one_sentence():
    sents = segment_sentences("One sentence")
    assert [(s.index, s.text) for s in sents] == [(0, "One sentence")]


def test_segment_respects_abbreviations():
    sents = segment_sentences("Mr. X ran. He fell.")
    assert [s.text for s in sents] == ["Mr. X ran.", "He fell."]


def test_segment_preserves_non_whitespace_characters():
    text = "The storm came! Waves broke the pier... Nobody drowned? Good."
    sents = segment_sentences(text)
    original = sorted(ch for ch in text if not ch.isspace())
    rebuilt = sorted(ch for s in sents for ch in s.text if not ch.isspace())
    assert original == rebuilt


def test_segment_lowercase_continuation_does_not_split():
    sents = segment_sentences("He arrived at 5 p.m. and left at once.")
    assert len(sents) == 1


# -- load/save ----------------------------------------------------------------


def _write_fixture(tmp_path, docs, items):
    dp = tmp_path / "documents.jsonl"
    ip = tmp_path / "items.jsonl"
    dp.write_text("\n".join(json.dumps(d) for d in docs) + "\n", encoding="utf-8")
    ip.write_text("\n".join(json.dumps(i) for i in items) + "\n", encoding="utf-8")
    return ip, dp


def test_load_bundled_fixture(bundled_dataset):
    assert len(bundled_dataset.items) == 6
    assert len(bundled_dataset.documents) == 2
    assert all(len(item.choices) == 5 for item in bundled_dataset.items)
    assert bundled_dataset.split == "val"


def test_load_infers_split_from_qids(tmp_path):
    ip, dp = _write_fixture(
        tmp_path,
        [{"doc_id": "d", "title": "t", "sentences": ["One.", "Two."]}],
        [{"qid": "test:1", "doc_id": "d", "question": "q", "choices": ["a", "b"]}],
    )
    assert load_dataset(ip, dp).split == "test"


def test_load_mixed_splits_requires_explicit_choice(tmp_path):
    ip, dp = _write_fixture(
        tmp_path,
        [{"doc_id": "d", "title": "t", "sentences": ["One."]}],
        [
            {"qid": "train:1", "doc_id": "d", "question": "q", "choices": ["a", "b"]},
            {"qid": "val:1", "doc_id": "d", "question": "q", "choices": ["a", "b"]},
        ],
    )
    with pytest.raises(SchemaError, match="mixes splits"):
        load_dataset(ip, dp)
    assert load_dataset(ip, dp, split="val").split == "val"


def test_load_rejects_out_of_range_correct_index(tmp_path):
    ip, dp = _write_fixture(
        tmp_path,
        [{"doc_id": "d", "title": "t", "sentences": ["One."]}],
        [{"qid": "val:1", "doc_id": "d", "question": "q",
          "choices": ["a", "b", "c", "d", "e"], "correct_index": 7}],
    )
    with pytest.raises(SchemaError, match="correct_index"):
        load_dataset(ip, dp)


def test_load_rejects_dangling_doc_reference(tmp_path):
    ip, dp = _write_fixture(
        tmp_path,
        [{"doc_id": "d", "title": "t", "sentences": ["One."]}],
        [{"qid": "val:1", "doc_id": "ghost", "question": "q", "choices": ["a", "b"]}],
    )
    with pytest.raises(SchemaError, match="unknown document"):
        load_dataset(ip, dp)


def test_load_rejects_duplicate_doc_id(tmp_path):
    ip, dp = _write_fixture(
        tmp_path,
        [
            {"doc_id": "d", "title": "t", "sentences": ["One."]},
            {"doc_id": "d", "title": "t2", "sentences": ["Two."]},
        ],
        [{"qid": "val:1", "doc_id": "d", "question": "q", "choices": ["a", "b"]}],
    )
    with pytest.raises(SchemaError, match="duplicate"):
        load_dataset(ip, dp)


def test_load_rejects_gold_alignment_out_of_range(tmp_path):
    ip, dp = _write_fixture(
        tmp_path,
        [{"doc_id": "d", "title": "t", "sentences": ["One.", "Two."]}],
        [{"qid": "val:1", "doc_id": "d", "question": "q", "choices": ["a", "b"],
          "gold_alignment": [5]}],
    )
    with pytest.raises(SchemaError, match="gold_alignment"):
        load_dataset(ip, dp)


def test_load_warns_on_non_consecutive_alignment(tmp_path, caplog):
    ip, dp = _write_fixture(
        tmp_path,
        [{"doc_id": "d", "title": "t", "sentences": ["One.", "Two.", "Three."]}],
        [{"qid": "val:1", "doc_id": "d", "question": "q", "choices": ["a", "b"],
          "gold_alignment": [0, 2]}],
    )
    with caplog.at_level("WARNING"):
        ds = load_dataset(ip, dp)
    assert ds.items[0].gold_alignment == (0, 2)
    assert any("consecutive" in rec.message for rec in caplog.records)


def test_load_rejects_malformed_jsonl(tmp_path):
    dp = tmp_path / "documents.jsonl"
    ip = tmp_path / "items.jsonl"
    dp.write_text('{"doc_id": "d", "title": "t", "sentences": ["One."]}\n')
    ip.write_text("{not json\n")
    with pytest.raises(ParseError):
        load_dataset(ip, dp)


def test_round_trip_equals_original(bundled_dataset, tmp_path):
    save_dataset(bundled_dataset, tmp_path / "documents.jsonl", tmp_path / "items.jsonl")
    again = load_dataset(tmp_path / "items.jsonl", tmp_path / "documents.jsonl")
    assert again == bundled_dataset


# -- movieqa official adapter -------------------------------------------------


def _write_official(tmp_path):
    plots = tmp_path / "plot"
    plots.mkdir()
    (plots / "tt0000001.wiki").write_text(
        "The hero leaves the village.\nA dragon burns the harvest.\n"
        "The hero slays the dragon.\n",
        encoding="utf-8",
    )
    qa = [
        {
            "qid": "val:900",
            "imdb_key": "tt0000001",
            "question": "Who slays the dragon?",
            "answers": ["The hero", "The king", "A farmer", "The dragon", "Nobody"],
            "correct_index": 0,
            "plot_alignment": [2],
        },
        {
            "qid": "test:901",
            "imdb_key": "tt0000001",
            "question": "What burns the harvest?",
            "answers": ["A dragon", "A fire", "The sun", "The hero", "Rain"],
            "correct_index": None,
            "plot_alignment": None,
        },
    ]
    qa_path = tmp_path / "qa.json"
    qa_path.write_text(json.dumps(qa), encoding="utf-8")
    return qa_path, plots


def test_movieqa_adapter_maps_fields(tmp_path):
    qa_path, plots = _write_official(tmp_path)
    ds = load_dataset(qa_path, plots, format="movieqa_official", split="val")
    assert ds.split == "val"
    assert [i.qid for i in ds.items] == ["val:900"]
    item = ds.items[0]
    assert item.doc_id == "tt0000001"
    assert item.choices[0] == "The hero"
    assert item.correct_index == 0
    assert item.gold_alignment == (2,)
    assert len(ds.documents["tt0000001"].sentences) == 3


def test_movieqa_adapter_filters_by_split(tmp_path):
    qa_path, plots = _write_official(tmp_path)
    ds = load_dataset(qa_path, plots, format="movieqa_official", split="test")
    assert [i.qid for i in ds.items] == ["test:901"]
    assert ds.items[0].correct_index is None


def test_movieqa_adapter_rejects_mixed_without_split(tmp_path):
    qa_path, plots = _write_official(tmp_path)
    with pytest.raises(SchemaError, match="mixes splits"):
        load_dataset(qa_path, plots, format="movieqa_official")


def test_movieqa_missing_plot_file(tmp_path):
    qa_path, plots = _write_official(tmp_path)
    (plots / "tt0000001.wiki").unlink()
    with pytest.raises(SchemaError, match="no plot file"):
        load_dataset(qa_path, plots, format="movieqa_official", split="val")


def test_unknown_format_rejected(tmp_path):
    qa_path, plots = _write_official(tmp_path)
    with pytest.raises(SchemaError, match="format"):
        load_dataset(qa_path, plots, format="csv")


# -- dataset_stats ------------------------------------------------------------


def test_stats_bundled_fixture(bundled_dataset):
    stats = dataset_stats(bundled_dataset)
    assert stats.num_movies == 2
    assert stats.num_questions == 6
    # question lengths alternate 4 and 6 words by construction
    assert stats.avg_question_words == 5.0


def test_stats_match_brute_force_recount(bundled_dir):
    docs = [json.loads(ln) for ln in
            (bundled_dir / "documents.jsonl").read_text().splitlines() if ln]
    items = [json.loads(ln) for ln in
             (bundled_dir / "items.jsonl").read_text().splitlines() if ln]
    ds = load_dataset(bundled_dir / "items.jsonl", bundled_dir / "documents.jsonl")
    stats = dataset_stats(ds)

    q_words = [word_count(i["question"]) for i in items]
    ca_words = [word_count(i["choices"][i["correct_index"]]) for i in items
                if i.get("correct_index") is not None]
    wa_words = [word_count(c) for i in items if i.get("correct_index") is not None
                for k, c in enumerate(i["choices"]) if k != i["correct_index"]]
    sent_counts = [len(d["sentences"]) for d in docs]
    sent_words = [word_count(s) for d in docs for s in d["sentences"]]

    assert stats.num_movies == len(docs)
    assert stats.num_questions == len(items)
    assert math.isclose(stats.avg_question_words, sum(q_words) / len(q_words))
    assert math.isclose(stats.avg_correct_answer_words, sum(ca_words) / len(ca_words))
    assert math.isclose(stats.avg_wrong_answer_words, sum(wa_words) / len(wa_words))
    assert math.isclose(stats.avg_sentences_per_plot, sum(sent_counts) / len(docs))
    assert math.isclose(stats.avg_words_per_sentence, sum(sent_words) / len(sent_words))


def test_stats_empty_dataset():
    ds = Dataset(split="val", documents={}, items=[])
    stats = dataset_stats(ds)
    assert stats.num_movies == 0
    assert stats.num_questions == 0
    assert stats.avg_question_words is None
    assert stats.avg_correct_answer_words is None
    assert stats.avg_sentences_per_plot is None


def test_stats_unlabeled_split_omits_answer_averages():
    doc = Document(doc_id="d", title="t",
                   sentences=(Sentence(index=0, text="One two three."),))
    items = [QAItem(qid="test:1", doc_id="d", question="why so", choices=("a b", "c"))]
    stats = dataset_stats(Dataset(split="test", documents={"d": doc}, items=items))
    assert stats.avg_question_words == 2.0
    assert stats.avg_correct_answer_words is None
    assert stats.avg_wrong_answer_words is None
