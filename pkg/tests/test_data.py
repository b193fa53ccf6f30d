import json
from collections import Counter

import numpy as np
import pytest

from src.data.corpus import binarize_score, load_corpus, load_cue_corpus, normalize_text, save_corpus
from src.data.schemas import HATE, HATE_THRESHOLD, NON_HATE, CsvColumnMap, Record, SplitSpec
from src.data.splits import class_weights, stratified_split
from src.data.synthetic import (
    generate_cue_corpus, generate_hate_corpus, generate_shift_suite, generate_target_corpus,
    planted_sentence, spurious_pool
)
from src.encoder.vocab import split_tokens
from src.utils.errors import SchemaError, ValidationError
from tests.utils import make_corpus

def _write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")
    return path

def test_normalize_and_binarize():
    assert normalize_text("  a \t b\n\nc ") == "a b c"
    assert binarize_score(0.5) == 1
    assert binarize_score(0.4999) == 0
    assert binarize_score(-2.0) == 0
    with pytest.raises(ValidationError):
        binarize_score(float("nan"))

def test_record_score_agrees_with_threshold():
    assert Record(text="a", label=HATE, platform="GAB", raw_score=HATE_THRESHOLD).label == HATE
    assert Record(text="a", label=NON_HATE, platform="GAB", raw_score=HATE_THRESHOLD - 1e-4).label == NON_HATE
    with pytest.raises(ValueError):
        Record(text="a", label=NON_HATE, platform="GAB", raw_score=HATE_THRESHOLD)
    for score in (0.0, 0.25, 0.5, 0.75, 1.0):
        assert Record(text="a", label=binarize_score(score), platform="GAB", raw_score=score).raw_score == score

def test_load_jsonl_with_scores_and_annotations(tmp_path):
    path = _write_jsonl(tmp_path / "gab.jsonl", [
        {"text": "first  post", "label": 1, "hate_target": "Migrants"},
        {"text": "second post", "raw_score": 0.2},
        {"text": "third post", "raw_score": 0.9, "hate_type": "violence"},
    ])
    corpus = load_corpus(path, "jsonl", "GAB")
    assert corpus.platform == "GAB"
    assert corpus.labels == [1, 0, 1]
    assert corpus.texts[0] == "first post"
    assert corpus.records[0].hate_target == "Migrants"
    assert corpus.records[2].hate_type == "violence"
    assert corpus.records[1].raw_score == pytest.approx(0.2)

def test_load_jsonl_reports_line_numbers(tmp_path):
    path = _write_jsonl(tmp_path / "bad.jsonl", [{"text": "fine", "label": 0}, {"text": "   ", "label": 1}])
    with pytest.raises(SchemaError) as excinfo:
        load_corpus(path, "jsonl", "GAB")
    assert excinfo.value.line_number == 2

    path = _write_jsonl(tmp_path / "nolabel.jsonl", [{"text": "no label here"}])
    with pytest.raises(SchemaError) as excinfo:
        load_corpus(path, "jsonl", "GAB")
    assert excinfo.value.line_number == 1

    path = _write_jsonl(tmp_path / "range.jsonl", [{"text": "label out of range", "label": 3}])
    with pytest.raises(SchemaError):
        load_corpus(path, "jsonl", "GAB")

def test_load_csv_with_column_map(tmp_path):
    path = tmp_path / "wiki.csv"
    path.write_text("comment,is_toxic\nhello there,0\nyou are vile,1\n", encoding="utf-8")
    corpus = load_corpus(path, "csv", "Wikipedia", CsvColumnMap(text="comment", label="is_toxic"))
    assert corpus.texts == ["hello there", "you are vile"]
    assert corpus.labels == [0, 1]

    with pytest.raises(SchemaError):
        load_corpus(path, "csv", "Wikipedia")

def test_fractional_labels_are_rejected(tmp_path):
    for bad in (0.7, -0.5, 1.9, "0.3"):
        path = _write_jsonl(tmp_path / "fraction.jsonl", [{"text": "fine", "label": 1}, {"text": "a", "label": bad}])
        with pytest.raises(SchemaError) as excinfo:
            load_corpus(path, "jsonl", "GAB")
        assert excinfo.value.line_number == 2

    path = _write_jsonl(tmp_path / "whole.jsonl", [{"text": "a", "label": 1.0}, {"text": "b", "label": "0"}])
    assert load_corpus(path, "jsonl", "GAB").labels == [1, 0]

    path = _write_jsonl(tmp_path / "cue.jsonl", [{"text": "lovely day", "label": 1.5}])
    with pytest.raises(SchemaError) as excinfo:
        load_cue_corpus(path, "sentiment")
    assert excinfo.value.line_number == 1

def test_invalid_utf8_is_a_schema_error(tmp_path):
    path = tmp_path / "broken.jsonl"
    path.write_bytes(b'{"text": "fine", "label": 0}\n{"text": "\xff\xfe", "label": 1}\n')
    with pytest.raises(SchemaError) as excinfo:
        load_corpus(path, "jsonl", "GAB")
    assert excinfo.value.line_number == 2

    path = tmp_path / "broken.csv"
    path.write_bytes(b"text,label\nhello,0\n\xff\xfe,1\n")
    with pytest.raises(SchemaError) as excinfo:
        load_corpus(path, "csv", "Wikipedia")
    assert excinfo.value.line_number == 3

def test_malformed_csv_is_a_schema_error(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("text,label\nhello,0\nthere,1,extra\n", encoding="utf-8")
    with pytest.raises(SchemaError) as excinfo:
        load_corpus(path, "csv", "Wikipedia")
    assert excinfo.value.line_number == 3

def test_missing_and_empty_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "absent.jsonl", "jsonl", "GAB")
    empty = tmp_path / "empty.jsonl"
    empty.write_text("\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_corpus(empty, "jsonl", "GAB")

def test_save_corpus_round_trip(tmp_path):
    corpus = generate_target_corpus("targets", 40, seed=3)
    path = save_corpus(corpus, tmp_path / "targets.jsonl")
    loaded = load_corpus(path, "jsonl", "targets")
    assert loaded.texts == corpus.texts
    assert loaded.labels == corpus.labels
    assert [r.hate_target for r in loaded.records] == [r.hate_target for r in corpus.records]

def test_cue_corpus_accepts_label_names(tmp_path):
    path = _write_jsonl(tmp_path / "sentiment.jsonl", [
        {"text": "lovely day", "label": "positive"},
        {"text": "vile day", "label": 0},
    ])
    corpus = load_cue_corpus(path, "sentiment")
    assert corpus.labels == [2, 0]
    assert corpus.num_labels == 3

    path = _write_jsonl(tmp_path / "aggression.jsonl", [{"text": "crush them", "label": 2}])
    with pytest.raises(ValidationError):
        load_cue_corpus(path, "aggression")

def test_stratified_split_partitions_each_class():
    corpus = generate_hate_corpus("alpha", 500, seed=1)
    train, val, test = stratified_split(corpus, SplitSpec(seed=4))
    assert len(train) + len(val) + len(test) == len(corpus)
    pooled = Counter((r.text, r.label) for s in (train, val, test) for r in s.records)
    assert pooled == Counter((r.text, r.label) for r in corpus.records)
    for split in (train, val, test):
        assert abs(split.hateful_fraction - corpus.hateful_fraction) < 0.05
    assert len(train) == pytest.approx(0.8 * len(corpus), abs=2)

def test_stratified_split_is_deterministic():
    corpus = generate_hate_corpus("alpha", 200, seed=1)
    first = stratified_split(corpus, SplitSpec(seed=9))
    second = stratified_split(corpus, SplitSpec(seed=9))
    assert [s.texts for s in first] == [s.texts for s in second]
    other = stratified_split(corpus, SplitSpec(seed=10))
    assert first[0].texts != other[0].texts

def test_stratified_split_needs_ten_per_class():
    rows = [(f"text {i}", 0) for i in range(50)] + [(f"hate {i}", 1) for i in range(9)]
    with pytest.raises(ValidationError):
        stratified_split(make_corpus("tiny", rows), SplitSpec())

def test_split_spec_ratios_must_partition():
    with pytest.raises(ValueError):
        SplitSpec(ratios=(0.8, 0.1, 0.2))
    with pytest.raises(ValueError):
        SplitSpec(ratios=(1.0, 0.0, 0.0))

def test_class_weights_are_balanced():
    weights = class_weights([0] * 75 + [1] * 25)
    assert weights.non_hate == pytest.approx(100 / (2 * 75))
    assert weights.hate == pytest.approx(100 / (2 * 25))
    with pytest.raises(ValidationError):
        class_weights([1, 1, 1])

def test_synthetic_corpus_is_seeded():
    a = generate_hate_corpus("alpha", 100, seed=5, other_platforms=["beta"])
    b = generate_hate_corpus("alpha", 100, seed=5, other_platforms=["beta"])
    c = generate_hate_corpus("alpha", 100, seed=6, other_platforms=["beta"])
    assert a.texts == b.texts and a.labels == b.labels
    assert a.texts != c.texts

def test_shift_suite_plants_platform_shortcuts():
    suite = generate_shift_suite(["alpha", "beta"], 400, seed=0, spurious_alignment=1.0, cross_spurious_rate=1.0)
    alpha = suite["alpha"]
    own_hate = set(spurious_pool("alpha", 1))
    beta_hate = set(spurious_pool("beta", 1))
    for record in alpha.records:
        tokens = set(split_tokens(record.text))
        assert bool(tokens & own_hate) == (record.label == 1)
        # the other platform's shortcut points the opposite way
        assert bool(tokens & beta_hate) == (record.label == 0)

def test_shift_suite_score_platforms_carry_raw_scores():
    suite = generate_shift_suite(["alpha", "beta"], 60, seed=0, score_platforms=["beta"])
    assert all(r.raw_score is None for r in suite["alpha"].records)
    assert all(binarize_score(r.raw_score) == r.label for r in suite["beta"].records)
    with pytest.raises(ValidationError):
        generate_shift_suite(["alpha", "alpha"], 10, seed=0)

def test_hate_records_carry_type():
    corpus = generate_target_corpus("targets", 300, seed=2)
    for record in corpus.records:
        assert record.hate_target in ("Migrants", "LGBTQ")
        assert (record.hate_type is not None) == (record.label == 1)

def test_cue_corpus_generation():
    sentiment = generate_cue_corpus("sentiment", 300, seed=0)
    assert set(sentiment.labels) == {0, 1, 2}
    aggression = generate_cue_corpus("aggression", 300, seed=0)
    assert set(aggression.labels) == {0, 1}
    with pytest.raises(ValidationError):
        generate_cue_corpus("sarcasm", 10, seed=0)

def test_planted_sentence_position():
    for seed in range(20):
        text, position = planted_sentence("aggression", seed)
        tokens = ["[CLS]"] + text.split()
        assert tokens[position] in {"crush", "expel", "smash", "destroy", "drown", "banish"}
    assert np.isscalar(planted_sentence("polarity", 0)[1])
