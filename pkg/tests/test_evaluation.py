import itertools
import json

import numpy as np
import pandas as pd
import pytest

from src.data.schemas import SplitSpec
from src.data.splits import stratified_split
from src.data.synthetic import generate_shift_suite, generate_target_corpus
from src.detector.predict import predict
from src.detector.train import TrainSchedule
from src.evaluation import reference
from src.evaluation.error_analysis import error_breakdown, plot_breakdown
from src.evaluation.harness import ablation_run, cross_platform_eval, cross_target_eval, mean_matrix, split_by_target
from src.evaluation.heatmap import cell_color, export_heatmap, intensities, load_heatmap_json, render_html
from src.evaluation.metrics import error_rate, macro_f1
from src.evaluation.reports import write_ablation, write_breakdown, write_matrix
from src.evaluation.schemas import EvalMatrix, HeatmapDoc
from src.utils.errors import ValidationError
from tests.utils import (
    ConstantModel, KeywordModel, keyword_label, make_corpus, recording_factory, reference_macro_f1, tiny_model
)

SCHEDULE = TrainSchedule(seed=5)

@pytest.fixture(scope="module")
def platform_splits():
    suite = generate_shift_suite(["alpha", "beta", "gamma"], 200, seed=0)
    return {p: stratified_split(c, SplitSpec()) for p, c in suite.items()}

def test_macro_f1_matches_confusion_counts_exhaustively():
    for n in range(1, 6):
        for labels in itertools.product((0, 1), repeat=n):
            for preds in itertools.product((0, 1), repeat=n):
                assert abs(macro_f1(preds, labels) - reference_macro_f1(preds, labels)) < 1e-12

def test_macro_f1_covers_every_confusion_up_to_twelve():
    # order does not matter, so one sequence per (tp, fp, fn, tn) count covers all pairs
    for n in range(1, 13):
        for tp in range(n + 1):
            for fp in range(n + 1 - tp):
                for fn in range(n + 1 - tp - fp):
                    tn = n - tp - fp - fn
                    preds = [1] * tp + [1] * fp + [0] * fn + [0] * tn
                    labels = [1] * tp + [0] * fp + [1] * fn + [0] * tn
                    assert abs(macro_f1(preds, labels) - reference_macro_f1(preds, labels)) < 1e-12

def test_macro_f1_edge_cases():
    assert macro_f1([1, 1, 0, 0], [1, 1, 0, 0]) == 1.0
    assert macro_f1([0, 0, 0], [0, 0, 0]) == pytest.approx(0.5)
    assert macro_f1([1, 0, 1, 1], [1, 0, 0, 1]) == pytest.approx((2 * 2 / 5 + 2 * 1 / 3) / 2)
    with pytest.raises(ValidationError):
        macro_f1([0, 1], [0])
    with pytest.raises(ValidationError):
        macro_f1([], [])
    with pytest.raises(ValidationError):
        macro_f1([2], [1])
    assert error_rate([1, 0, 1], [1, 1, 1]) == pytest.approx(1 / 3)

def test_cross_platform_eval_with_oracle_model(platform_splits):
    calls = []
    matrix = cross_platform_eval(recording_factory(KeywordModel(), calls), platform_splits, SCHEDULE, "oracle")
    assert matrix.sources == matrix.targets == ["alpha", "beta", "gamma"]
    assert [c["platform"] for c in calls] == ["alpha", "beta", "gamma"]
    assert all(c["seed"] == 5 for c in calls)
    for source in matrix.sources:
        for target in matrix.targets:
            test = platform_splits[target][2]
            expected = reference_macro_f1([keyword_label(t) for t in test.texts], test.labels)
            assert matrix.score(source, target) == pytest.approx(expected, abs=1e-12)

def test_cross_platform_eval_parallel_matches_serial(platform_splits):
    serial = cross_platform_eval(recording_factory(KeywordModel(), []), platform_splits, SCHEDULE)
    parallel = cross_platform_eval(recording_factory(KeywordModel(), []), platform_splits, SCHEDULE, max_workers=3)
    assert serial.scores == parallel.scores

def test_cross_platform_eval_rejects_incomplete_input(platform_splits):
    factory = recording_factory(KeywordModel(), [])
    with pytest.raises(ValidationError):
        cross_platform_eval(factory, {"alpha": platform_splits["alpha"]}, SCHEDULE)
    broken = dict(platform_splits, beta=platform_splits["beta"][:2])
    with pytest.raises(ValidationError, match="beta"):
        cross_platform_eval(factory, broken, SCHEDULE)

def test_cross_target_eval_leaves_diagonal_empty():
    corpus = generate_target_corpus("targets", 400, seed=1)
    calls = []
    matrix = cross_target_eval(recording_factory(KeywordModel(), calls), corpus, ["Migrants", "LGBTQ"], SCHEDULE)
    assert matrix.score("Migrants", "Migrants") is None and matrix.score("LGBTQ", "LGBTQ") is None
    splits = split_by_target(corpus, ["Migrants", "LGBTQ"])
    lgbtq_test = splits["LGBTQ"][2]
    expected = reference_macro_f1([keyword_label(t) for t in lgbtq_test.texts], lgbtq_test.labels)
    assert matrix.score("Migrants", "LGBTQ") == pytest.approx(expected)
    assert all(r.hate_target == "Migrants" for r in splits["Migrants"][0].records)
    assert np.isfinite(matrix.off_diagonal_mean()) and np.isnan(matrix.in_platform_mean())

def test_split_by_target_validation():
    corpus = generate_target_corpus("targets", 400, seed=1)
    with pytest.raises(ValidationError):
        split_by_target(corpus, ["Migrants"])
    with pytest.raises(ValidationError):
        split_by_target(corpus, ["Migrants", "Jews"])

def test_ablation_reports_degradation(platform_splits):
    models = {"full": KeywordModel(), "base": ConstantModel(0), "sentiment_only": KeywordModel(invert=True)}
    reports = ablation_run(
        lambda variant: recording_factory(models[variant], []),
        platform_splits,
        SCHEDULE,
        seeds=[0, 1],
        variants=["full", "sentiment_only", "base"],
    )
    by_variant = {r.variant: r for r in reports}
    assert by_variant["full"].delta_from_full == 0.0
    assert by_variant["base"].delta_from_full > 0
    assert by_variant["base"].off_diagonal_std == 0.0
    assert by_variant["full"].seeds == [0, 1]
    assert by_variant["full"].off_diagonal_mean == pytest.approx(by_variant["full"].scores.off_diagonal_mean())

    with pytest.raises(ValidationError):
        ablation_run(lambda v: recording_factory(KeywordModel(), []), platform_splits, SCHEDULE, variants=["mystery"])
    with pytest.raises(ValidationError):
        ablation_run(lambda v: recording_factory(KeywordModel(), []), platform_splits, SCHEDULE, seeds=[])

def test_mean_matrix_keeps_missing_cells():
    a = EvalMatrix(sources=["x", "y"], targets=["x", "y"], scores=[[None, 0.4], [0.6, None]])
    b = EvalMatrix(sources=["x", "y"], targets=["x", "y"], scores=[[None, 0.6], [0.8, None]])
    mean = mean_matrix([a, b], "avg")
    assert mean.scores == [[None, pytest.approx(0.5)], [pytest.approx(0.7), None]]

def test_eval_matrix_validation_and_summaries():
    with pytest.raises(ValueError):
        EvalMatrix(sources=["x"], targets=["x"], scores=[[1.2]])
    with pytest.raises(ValueError):
        EvalMatrix(sources=["x", "y"], targets=["x"], scores=[[0.5]])
    matrix = EvalMatrix(sources=["x", "y"], targets=["x", "y"], scores=[[0.9, 0.5], [0.7, 0.8]])
    assert matrix.off_diagonal_mean() == pytest.approx(0.6)
    assert matrix.in_platform_mean() == pytest.approx(0.85)
    assert matrix.source_summary("x") == {"in_platform": 0.9, "cross_platform_mean": 0.5, "overall_mean": pytest.approx(0.7)}
    assert matrix.reorder(["y", "x"]).scores == [[0.8, 0.7], [0.5, 0.9]]

def test_error_breakdown_counts_hateful_misses():
    rows = [
        ("crush them", 1, "Migrants", "violence"),
        ("they are fine", 1, "Migrants", "offensive"),
        ("nice folks", 0, "Migrants"),
        ("vile people", 1, "LGBTQ", "offensive"),
        ("lovely people", 0, "LGBTQ"),
        ("crush it", 0, "LGBTQ"),
        ("no target here", 1),
    ]
    corpus = make_corpus("frenk", rows)
    breakdown = error_breakdown(KeywordModel(), corpus, "hate_target")
    assert list(breakdown.groups) == ["LGBTQ", "Migrants"]
    assert breakdown.excluded == 1
    migrants = breakdown.groups["Migrants"]
    assert (migrants.count, migrants.evaluated, migrants.errors) == (3, 2, 1)
    assert migrants.error_rate == pytest.approx(0.5)
    assert breakdown.groups["LGBTQ"].error_rate == 0.0

    everything = error_breakdown(KeywordModel(), corpus, "hate_target", hateful_only=False)
    assert everything.groups["LGBTQ"].errors == 1 and everything.groups["LGBTQ"].evaluated == 3

    by_type = error_breakdown(KeywordModel(), corpus, "hate_type")
    assert by_type.rates() == {"offensive": 0.5, "violence": 0.0}

    with pytest.raises(ValidationError):
        error_breakdown(KeywordModel(), make_corpus("plain", [("text", 0)]), "hate_target")

def test_breakdown_outputs(tmp_path):
    corpus = make_corpus("frenk", [("crush them", 1, "Migrants"), ("fine", 1, "LGBTQ")])
    breakdown = error_breakdown(KeywordModel(), corpus, "hate_target")
    png = plot_breakdown(breakdown, tmp_path / "errors.png")
    assert png.read_bytes()[:4] == b"\x89PNG"
    csv_path, json_path = write_breakdown(breakdown, tmp_path)
    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == ["group", "count", "evaluated", "errors", "error_rate"]
    assert json.loads(json_path.read_text())["groups"]["LGBTQ"]["errors"] == 1

def test_write_matrix_formats(tmp_path):
    matrix = EvalMatrix(name="m", sources=["a", "b"], targets=["a", "b"], scores=[[None, 0.25], [0.5, None]])
    csv_path, json_path = write_matrix(matrix, tmp_path)
    assert csv_path.read_text() == "source,a,b\na,,0.250000\nb,0.500000,\n"
    payload = json.loads(json_path.read_text())
    assert payload["off_diagonal_mean"] == pytest.approx(0.375)
    assert payload["in_platform_mean"] is None
    assert payload["scores"][0][0] is None

def test_write_ablation(tmp_path, platform_splits):
    reports = ablation_run(
        lambda variant: recording_factory(KeywordModel(), []), platform_splits, SCHEDULE, variants=["full", "base"]
    )
    paths = write_ablation(reports, tmp_path)
    assert {p.name for p in paths} >= {"matrix_full.csv", "matrix_base.json", "ablation.csv", "ablation.json"}
    summary = pd.read_csv(tmp_path / "ablation.csv")
    assert list(summary["variant"]) == ["full", "base"]

def test_heatmap_colors_and_export(tmp_path):
    assert intensities([0.1, 0.4, 0.2]) == pytest.approx([0.25, 1.0, 0.5])
    assert intensities([0.0, 0.0]) == [0.0, 0.0]
    assert cell_color(0.0, (10, 20, 30)) == "rgb(255,255,255)"
    assert cell_color(1.0, (10, 20, 30)) == "rgb(10,20,30)"

    model = tiny_model()
    text = "crush the <b>vile</b>"
    pred = predict(text, model)
    doc = export_heatmap(pred, pred.tokens, tmp_path / "h.html", text=text, label=1)
    page = (tmp_path / "h.html").read_text()
    assert "&lt;b&gt;" in page and "<b>vile" not in page
    assert page.count('class="tok"') == 4 * len(pred.tokens)
    assert load_heatmap_json(tmp_path / "h.json") == doc
    assert render_html(doc) == page

def test_heatmap_doc_requires_all_tracks():
    with pytest.raises(ValueError):
        HeatmapDoc(text="", tokens=["a"], tracks={"S": [1.0]}, prediction=0, probs=[1.0, 0.0])

def test_reference_tables():
    table = reference.dataset_table()
    assert int(table.loc[table["dataset"] == "Wikipedia", "records"].iloc[0]) == 113728
    peace = reference.CROSS_PLATFORM["PEACE"]
    assert peace.score("FRENK", "Wikipedia") == 0.81
    gains = reference.cross_platform_gains()
    assert all(g > 0 for g in gains.values())
    assert gains["FRENK"] == pytest.approx(0.1)
    assert reference.CROSS_TARGET["PEACE"].score("Migrants", "LGBTQ") == 0.78
    assert reference.CROSS_TARGET["HateBERT"].score("LGBTQ", "Migrants") == 0.66
