"""LLM-as-judge: rubric prompt, score parsing, and model comparison."""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .risk import (
    ChatClient,
    ChatRequest,
    DetectionSummary,
    GenerationParams,
    RiskReport,
)


class JudgeError(Exception):
    pass


class UnparseableScore(JudgeError):
    pass


class OutOfRangeScore(JudgeError):
    pass


class EmptyScoreSet(JudgeError):
    pass


class MismatchedItemSets(JudgeError):
    pass


RUBRIC_DIMENSIONS = ("semantic correctness", "risk reasoning", "actionable clarity")


@dataclass(frozen=True)
class JudgeRubric:
    dimensions: tuple[str, ...] = RUBRIC_DIMENSIONS
    scale: tuple[int, int] = (1, 10)
    instruction: str = (
        "Evaluate the candidate wildfire risk assessment against each"
        " dimension and assign one overall integer score."
    )

    def __post_init__(self) -> None:
        lo, hi = self.scale
        if (lo, hi) != (1, 10):
            raise ValueError("scale is fixed at 1..10")


@dataclass
class JudgeScore:
    report_id: str
    overall: int
    rationale: str
    judge_model: str
    per_dimension: dict[str, int] | None = None

    def __post_init__(self) -> None:
        if not (1 <= self.overall <= 10):
            raise OutOfRangeScore(f"overall score {self.overall} outside 1..10")

    def to_dict(self) -> dict:
        return {
            "report_id": self.report_id,
            "overall": self.overall,
            "rationale": self.rationale,
            "judge_model": self.judge_model,
            "per_dimension": self.per_dimension,
        }


@dataclass
class ComparisonReport:
    model_stats: dict[str, tuple[float, int]]  # model -> (mean to 2 dp, n)
    winner: str | None  # None means tie
    per_item_deltas: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model_stats": {
                m: {"mean": mean, "n": n} for m, (mean, n) in self.model_stats.items()
            },
            "winner": self.winner,
            "per_item_deltas": dict(self.per_item_deltas),
        }

    def summary_line(self) -> str:
        parts = [f"model {m} mean {mean:.2f}" for m, (mean, _) in self.model_stats.items()]
        line = " vs ".join(parts)
        if self.winner is None:
            return f"{line} (tie)"
        return f"{line}; winner {self.winner}"


def build_judge_prompt(
    report: RiskReport, summary: DetectionSummary, rubric: JudgeRubric = JudgeRubric()
) -> str:
    """Deterministic judging prompt ending with the SCORE sentinel contract."""
    lo, hi = rubric.scale
    dims = "\n".join(f"- {d}" for d in rubric.dimensions)
    return (
        "You are an impartial evaluator of wildfire risk assessments.\n"
        f"{rubric.instruction}\n"
        "\n"
        "Scoring dimensions:\n"
        f"{dims}\n"
        f"Use an integer scale from {lo} (unacceptable) to {hi} (expert-level).\n"
        "\n"
        "Detection context:\n"
        f"Image size: {summary.image_w}x{summary.image_h}, "
        f"Smoke coverage (%): {summary.smoke_coverage_pct:.2f}, "
        f"Wildfire coverage (%): {summary.wildfire_coverage_pct:.2f}\n"
        "\n"
        "Candidate assessment:\n"
        f"Severity: {report.severity.value}\n"
        f"{report.raw_response}\n"
        "\n"
        "Explain your reasoning briefly, then finish with exactly one final"
        f" line of the form SCORE: <integer {lo}-{hi}>."
    )


_SCORE_RE = re.compile(r"SCORE:\s*(-?\d+)", re.IGNORECASE)


def judge_response(
    raw: str, report_id: str = "", judge_model: str = ""
) -> JudgeScore:
    """Parse the last SCORE: n sentinel; reject missing or out-of-range."""
    if not raw or not raw.strip():
        raise UnparseableScore("empty judge reply")
    matches = list(_SCORE_RE.finditer(raw))
    if not matches:
        raise UnparseableScore("no SCORE: <integer> line found")
    last = matches[-1]
    value = int(last.group(1))
    if not (1 <= value <= 10):
        raise OutOfRangeScore(f"score {value} outside 1..10")
    rationale = raw[: last.start()].strip()
    return JudgeScore(
        report_id=report_id, overall=value, rationale=rationale, judge_model=judge_model
    )


def compare_models(
    scores_a: list[JudgeScore],
    scores_b: list[JudgeScore],
    model_a: str = "model_a",
    model_b: str = "model_b",
) -> ComparisonReport:
    """Mean scores to 2 decimals; higher mean wins, equal means tie."""
    if not scores_a or not scores_b:
        raise EmptyScoreSet("both score lists must be non-empty")
    items_a = {s.report_id for s in scores_a}
    items_b = {s.report_id for s in scores_b}
    if items_a != items_b or len(items_a) != len(scores_a) or len(items_b) != len(scores_b):
        raise MismatchedItemSets(
            f"item sets differ: only-a={sorted(items_a - items_b)}, "
            f"only-b={sorted(items_b - items_a)}"
        )
    mean_a = sum(s.overall for s in scores_a) / len(scores_a)
    mean_b = sum(s.overall for s in scores_b) / len(scores_b)
    if mean_a > mean_b:
        winner = model_a
    elif mean_b > mean_a:
        winner = model_b
    else:
        winner = None
    by_item_b = {s.report_id: s.overall for s in scores_b}
    deltas = {s.report_id: s.overall - by_item_b[s.report_id] for s in scores_a}
    return ComparisonReport(
        model_stats={
            model_a: (round(mean_a, 2), len(scores_a)),
            model_b: (round(mean_b, 2), len(scores_b)),
        },
        winner=winner,
        per_item_deltas=deltas,
    )


# Judge calls run at temperature 0 to keep scores stable; distinct from the
# 0.2 used for risk generation.
JUDGE_PARAMS = GenerationParams(temperature=0.0, max_tokens=1024, top_p=0.95)


def score_report(
    report: RiskReport,
    summary: DetectionSummary,
    client: ChatClient,
    report_id: str,
    rubric: JudgeRubric = JudgeRubric(),
    params: GenerationParams = JUDGE_PARAMS,
) -> JudgeScore:
    prompt = build_judge_prompt(report, summary, rubric)
    exchange = client.complete(ChatRequest(user=prompt, params=params))
    return judge_response(
        exchange.response.text,
        report_id=report_id,
        judge_model=params.model_name or exchange.response.provider_id,
    )


def load_run_manifest(path: str | Path) -> list[dict]:
    """Evaluation run manifest: JSON list of items.

    Each item: {"item_id": str, "report_a": path, "report_b": path,
    "summary": DetectionSummary dict (optional)}.
    """
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, list):
        raise ValueError("run manifest must be a JSON list")
    for i, item in enumerate(doc):
        for key in ("item_id", "report_a", "report_b"):
            if key not in item:
                raise ValueError(f"run manifest item #{i} is missing {key!r}")
    return doc


def run_judge_evaluation(
    manifest: list[dict],
    client: ChatClient,
    model_a: str = "model_a",
    model_b: str = "model_b",
    rubric: JudgeRubric = JudgeRubric(),
    params: GenerationParams = JUDGE_PARAMS,
    base_dir: str | Path = ".",
) -> tuple[list[JudgeScore], list[JudgeScore], ComparisonReport]:
    """Judge every item for model A, then model B, and compare the means."""
    base = Path(base_dir)

    def load_report(ref: str) -> RiskReport:
        return RiskReport.from_dict(
            json.loads((base / ref).read_text(encoding="utf-8"))
        )

    def summary_for(item: dict) -> DetectionSummary:
        if "summary" in item and item["summary"] is not None:
            return DetectionSummary.from_dict(item["summary"])
        return DetectionSummary(
            image_w=1, image_h=1, smoke_coverage_pct=0.0, wildfire_coverage_pct=0.0
        )

    scores_a = [
        score_report(
            load_report(item["report_a"]), summary_for(item), client,
            report_id=item["item_id"], rubric=rubric, params=params,
        )
        for item in manifest
    ]
    scores_b = [
        score_report(
            load_report(item["report_b"]), summary_for(item), client,
            report_id=item["item_id"], rubric=rubric, params=params,
        )
        for item in manifest
    ]
    comparison = compare_models(scores_a, scores_b, model_a=model_a, model_b=model_b)
    return scores_a, scores_b, comparison


def write_scores_csv(
    path: str | Path,
    scores_by_model: dict[str, list[JudgeScore]],
) -> None:
    """CSV rows: item_id,model,score."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id", "model", "score"])
        for model, scores in scores_by_model.items():
            for s in scores:
                writer.writerow([s.report_id, model, s.overall])
