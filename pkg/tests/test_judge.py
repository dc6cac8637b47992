from __future__ import annotations

import csv
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sentinel.judge import (
    EmptyScoreSet,
    JudgeRubric,
    JudgeScore,
    MismatchedItemSets,
    OutOfRangeScore,
    RUBRIC_DIMENSIONS,
    UnparseableScore,
    build_judge_prompt,
    compare_models,
    judge_response,
    load_run_manifest,
    run_judge_evaluation,
    score_report,
    write_scores_csv,
)
from sentinel.risk import (
    DetectionSummary,
    RiskReport,
    ScriptedChatClient,
    Severity,
)

SUMMARY = DetectionSummary(
    image_w=416, image_h=416, smoke_coverage_pct=8.67, wildfire_coverage_pct=25.0
)


def _report(severity=Severity.HIGH, raw="Severity: high\nRecommendations:\n- act") -> RiskReport:
    return RiskReport(
        general_observations="obs",
        fire_behavior="fb",
        spread_potential="sp",
        severity=severity,
        critical_risks=["risk"],
        recommendations=["act"],
        raw_response=raw,
        source_model="model-x",
    )


# ---- prompt ----


def test_judge_prompt_contains_rubric_dimensions():
    prompt = build_judge_prompt(_report(), SUMMARY)
    for dim in RUBRIC_DIMENSIONS:
        assert dim in prompt
    assert "1" in prompt and "10" in prompt
    assert "SCORE:" in prompt


def test_judge_prompt_deterministic():
    assert build_judge_prompt(_report(), SUMMARY) == build_judge_prompt(_report(), SUMMARY)


def test_judge_prompt_embeds_severity_verbatim():
    report = _report(severity=Severity.EXTREME)
    assert "Severity: extreme" in build_judge_prompt(report, SUMMARY)


def test_rubric_scale_fixed():
    with pytest.raises(ValueError):
        JudgeRubric(scale=(0, 5))


# ---- score parsing ----


def test_judge_response_parses_final_score():
    score = judge_response("solid reasoning here\nSCORE: 7", report_id="item-1")
    assert score.overall == 7
    assert score.report_id == "item-1"
    assert "solid reasoning" in score.rationale


def test_judge_response_takes_last_occurrence():
    raw = "draft: SCORE: 4\nafter reflection\nSCORE: 8"
    assert judge_response(raw).overall == 8


def test_judge_response_out_of_range():
    with pytest.raises(OutOfRangeScore):
        judge_response("SCORE: 11")
    with pytest.raises(OutOfRangeScore):
        judge_response("SCORE: 0")


def test_judge_response_unparseable():
    with pytest.raises(UnparseableScore):
        judge_response("great report, nine out of ten")
    with pytest.raises(UnparseableScore):
        judge_response("   ")


@given(n=st.integers(1, 10))
def test_judge_response_round_trip_identity(n):
    assert judge_response(f"rationale\nSCORE: {n}").overall == n


# ---- comparison ----


def _scores(model_items: dict[str, int], judge="j") -> list[JudgeScore]:
    return [
        JudgeScore(report_id=k, overall=v, rationale="", judge_model=judge)
        for k, v in model_items.items()
    ]


def test_compare_example_means_and_winner():
    a = _scores({"i1": 7, "i2": 8, "i3": 6})
    b = _scores({"i1": 6, "i2": 6, "i3": 7})
    report = compare_models(a, b, model_a="gpt", model_b="claude")
    assert report.model_stats["gpt"] == (7.00, 3)
    assert report.model_stats["claude"] == (6.33, 3)
    assert report.winner == "gpt"
    assert report.per_item_deltas == {"i1": 1, "i2": 2, "i3": -1}


def test_compare_identical_lists_is_tie():
    a = _scores({"i1": 5, "i2": 9})
    b = _scores({"i1": 9, "i2": 5})
    report = compare_models(a, b)
    assert report.winner is None
    assert "tie" in report.summary_line()


def test_compare_mismatched_item_sets_rejected():
    with pytest.raises(MismatchedItemSets):
        compare_models(_scores({"i1": 5}), _scores({"i2": 5}))


def test_compare_empty_rejected():
    with pytest.raises(EmptyScoreSet):
        compare_models([], _scores({"i1": 5}))


def test_compare_summary_line_formats_two_decimals():
    # Means engineered to land on the published presentation: 7.03 vs 6.16.
    a = _scores({f"i{k}": 7 for k in range(97)} | {f"x{k}": 8 for k in range(3)})
    b_vals = {f"i{k}": 6 for k in range(97)} | {f"x{k}": 6 for k in range(3)}
    for k in range(16):
        b_vals[f"i{k}"] = 7
    b = _scores(b_vals)
    report = compare_models(a, b, model_a="gpt-4o", model_b="claude-3.5")
    line = report.summary_line()
    assert "model gpt-4o mean 7.03" in line
    assert "model claude-3.5 mean 6.16" in line
    assert report.winner == "gpt-4o"


@given(values=st.lists(st.integers(1, 10), min_size=1, max_size=30))
def test_mean_bounded_and_permutation_invariant(values):
    items = {f"i{k}": v for k, v in enumerate(values)}
    a = _scores(items)
    b = _scores(items)
    fwd = compare_models(a, b)
    rev = compare_models(list(reversed(a)), b)
    mean = fwd.model_stats["model_a"][0]
    assert min(values) <= mean <= max(values)
    assert fwd.model_stats == rev.model_stats
    assert fwd.winner is None


def test_judge_score_validation():
    with pytest.raises(OutOfRangeScore):
        JudgeScore(report_id="x", overall=0, rationale="", judge_model="j")


# ---- scripted end-to-end scoring ----


def test_score_report_with_scripted_judge():
    client = ScriptedChatClient(["thoughtful analysis\nSCORE: 9"])
    score = score_report(_report(), SUMMARY, client, report_id="item-7")
    assert score.overall == 9
    assert score.judge_model == "scripted"
    prompt = client.exchanges[0].user
    for dim in RUBRIC_DIMENSIONS:
        assert dim in prompt


def test_run_judge_evaluation_deterministic(tmp_path):
    for name, text in (
        ("a1.json", "Severity: high"),
        ("b1.json", "Severity: low"),
        ("a2.json", "Severity: extreme"),
        ("b2.json", "Severity: moderate"),
    ):
        severity = text.split(": ")[1]
        report = _report(severity=Severity(severity), raw=text)
        (tmp_path / name).write_text(json.dumps(report.to_dict()))
    manifest_path = tmp_path / "run.json"
    manifest_path.write_text(
        json.dumps(
            [
                {"item_id": "i1", "report_a": "a1.json", "report_b": "b1.json",
                 "summary": SUMMARY.to_dict()},
                {"item_id": "i2", "report_a": "a2.json", "report_b": "b2.json",
                 "summary": SUMMARY.to_dict()},
            ]
        )
    )
    manifest = load_run_manifest(manifest_path)
    client = ScriptedChatClient(["SCORE: 7", "SCORE: 8", "SCORE: 6", "SCORE: 6"])
    scores_a, scores_b, comparison = run_judge_evaluation(
        manifest, client, model_a="A", model_b="B", base_dir=tmp_path
    )
    assert [s.overall for s in scores_a] == [7, 8]
    assert [s.overall for s in scores_b] == [6, 6]
    assert comparison.model_stats == {"A": (7.5, 2), "B": (6.0, 2)}
    assert comparison.winner == "A"

    csv_path = tmp_path / "scores.csv"
    write_scores_csv(csv_path, {"A": scores_a, "B": scores_b})
    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["item_id", "model", "score"]
    assert rows[1:] == [
        ["i1", "A", "7"], ["i2", "A", "8"], ["i1", "B", "6"], ["i2", "B", "6"],
    ]


def test_load_run_manifest_validates_fields(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([{"item_id": "x", "report_a": "a.json"}]))
    with pytest.raises(ValueError):
        load_run_manifest(path)
