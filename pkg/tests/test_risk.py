from __future__ import annotations

import json
import threading
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sentinel.detection import CoverageMetrics, compute_coverage
from sentinel.imagery import ClassLabel
from sentinel.risk import (
    ANALYSIS_REQUIREMENTS,
    KEY_CONSIDERATIONS_LINE,
    PROMPT_ROLE_LINE,
    AuthFailure,
    ChatClient,
    ChatRequest,
    ChatResponse,
    DetectionSummary,
    EmptyResponse,
    GenerationParams,
    RateLimited,
    RiskReport,
    ScriptedChatClient,
    Severity,
    Timeout,
    assess_risk,
    build_prompt,
    classify_severity_fallback,
    parse_report,
)

from .conftest import det, gradient_pixels, make_record
from sentinel.detection import DetectionResult


SUMMARY = DetectionSummary(
    image_w=416, image_h=416, smoke_coverage_pct=8.67, wildfire_coverage_pct=25.00
)

FULL_REPLY = """General Observations:
Dense smoke spreading northeast across the scene.

Fire Behavior:
Active crown fire along the southern ridge.

Spread Potential:
High winds suggest rapid eastward growth.

Severity Classification: HIGH

Critical Risks:
- Smoke over the highway corridor
- Structures within two kilometers

Recommendations:
1. Dispatch aerial reconnaissance
2. Pre-position engine crews east of the ridge
"""


# ---- prompt ----


def test_prompt_starts_with_role_line():
    assert build_prompt(SUMMARY).startswith(PROMPT_ROLE_LINE)


def test_prompt_contains_parameters_with_two_decimals():
    prompt = build_prompt(SUMMARY)
    assert "416x416" in prompt
    assert "8.67" in prompt
    assert "25.00" in prompt


def test_prompt_contains_all_requirements_and_considerations():
    prompt = build_prompt(SUMMARY)
    for i, req in enumerate(ANALYSIS_REQUIREMENTS, 1):
        assert f"{i}. {req}" in prompt
    assert KEY_CONSIDERATIONS_LINE in prompt


def test_prompts_differ_only_in_parameters_line():
    other = DetectionSummary(
        image_w=832, image_h=624, smoke_coverage_pct=1.23, wildfire_coverage_pct=4.56
    )
    a = build_prompt(SUMMARY).splitlines()
    b = build_prompt(other).splitlines()
    assert len(a) == len(b)
    different = [i for i, (x, y) in enumerate(zip(a, b)) if x != y]
    assert len(different) == 1
    assert a[different[0]].startswith("Image size:")


def test_prompt_deterministic():
    assert build_prompt(SUMMARY) == build_prompt(SUMMARY)


# ---- clients ----


def test_scripted_client_returns_canned_reply():
    client = ScriptedChatClient(["first reply", "second reply"])
    exchange = client.complete(ChatRequest(user="hello"))
    assert exchange.response.text == "first reply"
    assert exchange.response.provider_id == "scripted"
    assert exchange.response.retry_count == 0
    assert client.complete(ChatRequest(user="again")).response.text == "second reply"


def test_scripted_client_exhaustion_is_provider_error():
    client = ScriptedChatClient([], max_retries=0)
    from sentinel.risk import ProviderError

    with pytest.raises(ProviderError):
        client.complete(ChatRequest(user="x"))


def test_scripted_client_hash_transcript(tmp_path):
    key = ScriptedChatClient.request_hash("specific prompt")
    path = tmp_path / "transcript.json"
    path.write_text(json.dumps({key: "matched", "*": "fallback"}))
    client = ScriptedChatClient(path)
    assert client.complete(ChatRequest(user="specific prompt")).response.text == "matched"
    assert client.complete(ChatRequest(user="anything else")).response.text == "fallback"


class FlakyClient(ChatClient):
    provider_id = "flaky"

    def __init__(self, failures: int, exc_factory=lambda: RateLimited("slow down"), **kw):
        kw.setdefault("sleep_fn", lambda s: None)
        super().__init__(**kw)
        self.failures = failures
        self.calls = 0
        self._exc_factory = exc_factory

    def _send_once(self, request: ChatRequest) -> ChatResponse:
        self.calls += 1
        if self.calls <= self.failures:
            raise self._exc_factory()
        return ChatResponse(
            text="recovered", prompt_tokens=1, completion_tokens=1,
            latency_ms=1.0, provider_id=self.provider_id,
        )


def test_retry_twice_then_succeed_records_count():
    client = FlakyClient(failures=2)
    exchange = client.complete(ChatRequest(user="x"))
    assert exchange.response.text == "recovered"
    assert exchange.response.retry_count == 2
    assert client.calls == 3


def test_rate_limit_raises_after_retries_exhausted():
    client = FlakyClient(failures=99)
    with pytest.raises(RateLimited):
        client.complete(ChatRequest(user="x"))
    assert client.calls == 4  # initial try + 3 retries


def test_auth_failure_is_not_retried():
    client = FlakyClient(failures=99, exc_factory=lambda: AuthFailure("401"))
    with pytest.raises(AuthFailure):
        client.complete(ChatRequest(user="x"))
    assert client.calls == 1


def test_in_flight_limit_bounds_concurrency():
    active = []
    peak = []
    lock = threading.Lock()

    class SlowClient(ChatClient):
        provider_id = "slow"

        def _send_once(self, request):
            with lock:
                active.append(1)
                peak.append(len(active))
            time.sleep(0.02)
            with lock:
                active.pop()
            return ChatResponse("ok", 1, 1, 1.0, "slow")

    client = SlowClient(max_in_flight=2)
    threads = [
        threading.Thread(target=lambda: client.complete(ChatRequest(user="x")))
        for _ in range(8)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert max(peak) <= 2


# ---- parsing ----


def test_parse_inline_severity_keyword():
    report = parse_report("Severity: HIGH", SUMMARY, "m")
    assert report.severity is Severity.HIGH
    assert not report.severity_from_fallback


def test_parse_falls_back_to_coverage_severity():
    report = parse_report("no structured sections at all", SUMMARY, "m")
    assert report.severity is Severity.EXTREME  # 33.67% total coverage
    assert report.severity_from_fallback


def test_parse_full_fixture_populates_every_field():
    report = parse_report(FULL_REPLY, SUMMARY, "model-x")
    assert "Dense smoke" in report.general_observations
    assert "crown fire" in report.fire_behavior
    assert "eastward" in report.spread_potential
    assert report.severity is Severity.HIGH
    assert report.critical_risks == [
        "Smoke over the highway corridor",
        "Structures within two kilometers",
    ]
    assert report.recommendations == [
        "Dispatch aerial reconnaissance",
        "Pre-position engine crews east of the ridge",
    ]
    assert report.raw_response == FULL_REPLY
    assert report.source_model == "model-x"
    round_tripped = RiskReport.from_dict(json.loads(json.dumps(report.to_dict())))
    assert round_tripped == report


def test_parse_markdown_style_headings():
    raw = "**Severity:** moderate\n**Recommendations:**\n- watch it\n"
    report = parse_report(raw, SUMMARY, "m")
    assert report.severity is Severity.MODERATE
    assert report.recommendations == ["watch it"]


def test_parse_empty_reply_rejected():
    with pytest.raises(EmptyResponse):
        parse_report("   \n", SUMMARY, "m")


@settings(max_examples=120, deadline=None)
@given(raw=st.text(min_size=1).filter(lambda s: s.strip()))
def test_parse_never_fails_on_nonempty_text(raw):
    report = parse_report(raw, SUMMARY, "m")
    assert isinstance(report, RiskReport)
    assert report.severity in Severity


# ---- severity fallback ----


def test_fallback_examples():
    assert classify_severity_fallback(CoverageMetrics(0.0, 0.0)) is Severity.LOW
    assert classify_severity_fallback(CoverageMetrics(2.0, 1.5)) is Severity.MODERATE
    assert classify_severity_fallback(CoverageMetrics(25.0, 8.67)) is Severity.EXTREME
    assert classify_severity_fallback(CoverageMetrics(3.0, 4.0)) is Severity.HIGH


@given(
    w1=st.floats(0, 100), s1=st.floats(0, 100),
    w2=st.floats(0, 100), s2=st.floats(0, 100),
)
def test_fallback_monotone_in_total_coverage(w1, s1, w2, s2):
    rank = {Severity.LOW: 0, Severity.MODERATE: 1, Severity.HIGH: 2, Severity.EXTREME: 3}
    a = classify_severity_fallback(CoverageMetrics(w1, s1))
    b = classify_severity_fallback(CoverageMetrics(w2, s2))
    if w1 + s1 <= w2 + s2:
        assert rank[a] <= rank[b]


# ---- assess_risk ----


def _result_for(record) -> DetectionResult:
    dets = [
        det(0, 0, 208, 208, ClassLabel.WILDFIRE, 0.9),
        det(0, 0, 100, 100, ClassLabel.SMOKE, 0.8),
        det(50, 0, 150, 100, ClassLabel.SMOKE, 0.7),
    ]
    return DetectionResult(
        image_id=record.id,
        model_id="mock",
        detections=dets,
        inference_ms=3.0,
        coverage=compute_coverage(dets, record.width_px, record.height_px),
    )


def test_assess_risk_deterministic_with_scripted_client():
    record = make_record("scene")
    pixels = gradient_pixels(416, 416)
    result = _result_for(record)
    client = ScriptedChatClient([FULL_REPLY])
    params = GenerationParams(model_name="scripted-a")
    report, exchange = assess_risk(record, pixels, result, client, params)
    assert report.severity is Severity.HIGH
    assert report.source_model == "scripted-a"
    assert exchange.request.image_png is not None
    assert exchange.request.user.startswith(PROMPT_ROLE_LINE)
    assert "25.00" in exchange.request.user and "8.67" in exchange.request.user


def test_assess_risk_propagates_timeout():
    record = make_record("scene")
    result = _result_for(record)

    class TimeoutClient(ChatClient):
        def _send_once(self, request):
            raise Timeout("deadline")

    client = TimeoutClient(max_retries=0, sleep_fn=lambda s: None)
    with pytest.raises(Timeout):
        assess_risk(record, gradient_pixels(416, 416), result, client, GenerationParams())


def test_assess_risk_sends_prompt_even_with_no_detections():
    record = make_record("empty-scene")
    result = DetectionResult(
        image_id=record.id, model_id="mock", detections=[],
        inference_ms=0.0, coverage=CoverageMetrics(0.0, 0.0),
    )
    client = ScriptedChatClient(["Severity: low\nRecommendations:\n- keep monitoring"])
    report, exchange = assess_risk(
        record, gradient_pixels(416, 416), result, client, GenerationParams()
    )
    assert "0.00" in exchange.request.user
    assert report.severity is Severity.LOW


def test_generation_params_defaults_and_validation():
    params = GenerationParams()
    assert (params.temperature, params.max_tokens, params.top_p) == (0.2, 1024, 0.95)
    with pytest.raises(ValueError):
        GenerationParams(top_p=0.0)
    with pytest.raises(ValueError):
        GenerationParams(max_tokens=0)
    with pytest.raises(ValueError):
        GenerationParams(temperature=-0.1)
