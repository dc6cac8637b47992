"""Risk assessment: analyst prompt, LLM clients, and report parsing.

The prompt template is fixed; only the input-parameters line varies with
the detection summary. Providers sit behind one ChatClient interface with
retry/backoff, and replies are parsed tolerantly into a typed RiskReport.
"""
from __future__ import annotations

import base64
import hashlib
import io as _io
import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image

from .detection import CoverageMetrics, DetectionResult, draw_detections
from .imagery import ClassLabel, ImageRecord


class RiskError(Exception):
    pass


class AuthFailure(RiskError):
    pass


class RateLimited(RiskError):
    pass


class ProviderError(RiskError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class Timeout(RiskError):
    pass


class EmptyResponse(RiskError):
    pass


class Severity(str, Enum):
    LOW = "low"
    MODERATE = "moderate"
    HIGH = "high"
    EXTREME = "extreme"


SEVERITY_ORDER = [Severity.LOW, Severity.MODERATE, Severity.HIGH, Severity.EXTREME]

# Total-coverage thresholds (percent) for the fallback classifier; tunable.
SEVERITY_THRESHOLDS = {"moderate": 1.0, "high": 5.0, "extreme": 15.0}


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.2
    max_tokens: int = 1024
    top_p: float = 0.95
    model_name: str = ""

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not (0 < self.top_p <= 1):
            raise ValueError("top_p must be in (0, 1]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class DetectionSummary:
    """Structured auxiliary inputs handed to the language model."""

    image_w: int
    image_h: int
    smoke_coverage_pct: float
    wildfire_coverage_pct: float
    boxes: tuple = ()

    @classmethod
    def from_result(cls, record: ImageRecord, result: DetectionResult) -> "DetectionSummary":
        return cls(
            image_w=record.width_px,
            image_h=record.height_px,
            smoke_coverage_pct=result.coverage.smoke_coverage_pct,
            wildfire_coverage_pct=result.coverage.wildfire_coverage_pct,
            boxes=tuple(
                (d.class_label.value, tuple(d.bbox.as_list()), d.confidence)
                for d in result.detections
            ),
        )

    def to_dict(self) -> dict:
        return {
            "image_w": self.image_w,
            "image_h": self.image_h,
            "smoke_coverage_pct": self.smoke_coverage_pct,
            "wildfire_coverage_pct": self.wildfire_coverage_pct,
            "boxes": [list(b) for b in self.boxes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DetectionSummary":
        return cls(
            image_w=int(d["image_w"]),
            image_h=int(d["image_h"]),
            smoke_coverage_pct=float(d["smoke_coverage_pct"]),
            wildfire_coverage_pct=float(d["wildfire_coverage_pct"]),
            boxes=tuple(
                (b[0], tuple(float(v) for v in b[1]), float(b[2]))
                for b in d.get("boxes", [])
            ),
        )


PROMPT_ROLE_LINE = (
    "You are a senior wildfire analyst specializing in satellite imagery analysis."
)

ANALYSIS_REQUIREMENTS = (
    "Visual assessment independent of bounding boxes",
    "Fire behavior from smoke patterns and burn distribution",
    "Spread potential evaluation (pattern, growth rate)",
    "Severity classification from coverage metrics",
    "Critical risk identification",
    "Actionable recommendations /Insight (immediate actions, monitoring, resources)",
)

KEY_CONSIDERATIONS_LINE = (
    "Key Considerations: Smoke plume density, fire zone clustering, "
    "spatial relationships, infrastructure impact."
)

_PROMPT_TEMPLATE = (
    PROMPT_ROLE_LINE
    + " Analyze the following detection data from satellite imagery and provide"
    " a comprehensive risk assessment.\n"
    "In the first step, you need to analyze the image and provide a detailed"
    " analysis addressing the following points,\n"
    "There might be some bounding boxes of ROI in the image, but it is not"
    " guaranteed that all the bounding boxes are detected or localized"
    " correctly.\n"
    "** If you find a wildfire that the model did not detect, you can assume"
    " that the wildfire is detected and provide the analysis based on your"
    " point.\n"
    "\n"
    "Input Parameters:\n"
    "Image size: {image_size}, Smoke coverage (%): {smoke}, Wildfire coverage (%): {wildfire}\n"
    "\n"
    "Analysis Requirements:\n"
    + "".join(f"{i}. {req}\n" for i, req in enumerate(ANALYSIS_REQUIREMENTS, 1))
    + "\n"
    + KEY_CONSIDERATIONS_LINE
    + "\n"
)


def build_prompt(summary: DetectionSummary) -> str:
    """Instantiate the analyst prompt; deterministic for a given summary."""
    return _PROMPT_TEMPLATE.format(
        image_size=f"{summary.image_w}x{summary.image_h}",
        smoke=f"{summary.smoke_coverage_pct:.2f}",
        wildfire=f"{summary.wildfire_coverage_pct:.2f}",
    )


@dataclass
class ChatRequest:
    user: str
    system: str | None = None
    image_png: bytes | None = None
    params: GenerationParams = field(default_factory=GenerationParams)


@dataclass
class ChatResponse:
    text: str
    prompt_tokens: int
    completion_tokens: int
    latency_ms: float
    provider_id: str
    retry_count: int = 0


@dataclass
class ChatExchange:
    request: ChatRequest
    response: ChatResponse


class ChatClient:
    """Provider-agnostic completion client.

    complete() retries transient failures (rate limits, 5xx, timeouts) up to
    `max_retries` times with exponential backoff plus jitter; concurrent
    exchanges are bounded by `max_in_flight`.
    """

    provider_id = "unknown"

    def __init__(
        self,
        max_retries: int = 3,
        backoff_base_s: float = 0.5,
        max_in_flight: int = 4,
        sleep_fn=time.sleep,
    ):
        self._max_retries = max_retries
        self._backoff_base_s = backoff_base_s
        self._sleep = sleep_fn
        self._gate = threading.BoundedSemaphore(max_in_flight)

    def _send_once(self, request: ChatRequest) -> ChatResponse:
        raise NotImplementedError

    def complete(self, request: ChatRequest) -> ChatExchange:
        with self._gate:
            retries = 0
            while True:
                start = time.perf_counter()
                try:
                    response = self._send_once(request)
                except (RateLimited, Timeout, ProviderError) as exc:
                    transient = not (
                        isinstance(exc, ProviderError)
                        and exc.status is not None
                        and 400 <= exc.status < 500
                    )
                    if not transient or retries >= self._max_retries:
                        raise
                    self._sleep(
                        self._backoff_base_s * (2**retries)
                        + random.uniform(0, self._backoff_base_s)
                    )
                    retries += 1
                    continue
                if not response.text:
                    raise ProviderError("provider returned an empty completion")
                if response.latency_ms == 0.0 and self.provider_id != "scripted":
                    response.latency_ms = (time.perf_counter() - start) * 1000.0
                response.retry_count = retries
                return ChatExchange(request=request, response=response)


class ScriptedChatClient(ChatClient):
    """Deterministic client replaying a canned transcript.

    Transcript forms: a JSON list of response texts consumed in order, or a
    JSON object keyed by sha256(user text) (key "*" is a catch-all).
    """

    provider_id = "scripted"

    def __init__(self, transcript, **kwargs):
        super().__init__(**kwargs)
        if isinstance(transcript, (str, Path)):
            transcript = json.loads(Path(transcript).read_text(encoding="utf-8"))
        self._lock = threading.Lock()
        self._cursor = 0
        if isinstance(transcript, list):
            self._sequence: list[str] | None = [str(t) for t in transcript]
            self._by_hash: dict[str, str] | None = None
        elif isinstance(transcript, dict):
            self._sequence = None
            self._by_hash = {str(k): str(v) for k, v in transcript.items()}
        else:
            raise ValueError("transcript must be a list or an object")
        self.exchanges: list[ChatRequest] = []

    @staticmethod
    def request_hash(user_text: str) -> str:
        return hashlib.sha256(user_text.encode("utf-8")).hexdigest()

    def _send_once(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.exchanges.append(request)
            if self._sequence is not None:
                if self._cursor >= len(self._sequence):
                    raise ProviderError("scripted transcript exhausted")
                text = self._sequence[self._cursor]
                self._cursor += 1
            else:
                key = self.request_hash(request.user)
                assert self._by_hash is not None
                if key in self._by_hash:
                    text = self._by_hash[key]
                elif "*" in self._by_hash:
                    text = self._by_hash["*"]
                else:
                    raise ProviderError(f"no scripted reply for request hash {key[:12]}")
        return ChatResponse(
            text=text,
            prompt_tokens=len(request.user.split()),
            completion_tokens=len(text.split()),
            latency_ms=0.0,
            provider_id=self.provider_id,
        )


class HttpChatClient(ChatClient):
    """Chat-completions client for an OpenAI-style HTTP endpoint."""

    def __init__(self, endpoint: str, api_key: str, model: str, timeout_s: float = 120.0, **kwargs):
        super().__init__(**kwargs)
        import httpx

        self._endpoint = endpoint
        self._api_key = api_key
        self._model = model
        self._client = httpx.Client(timeout=timeout_s)
        self.provider_id = model or "http"

    @classmethod
    def from_env(cls, model_env: str = "LLM_MODEL", **kwargs) -> "HttpChatClient":
        endpoint = os.environ.get("LLM_ENDPOINT", "")
        if not endpoint:
            raise ValueError("LLM_ENDPOINT is not configured")
        return cls(
            endpoint=endpoint,
            api_key=os.environ.get("LLM_API_KEY", ""),
            model=os.environ.get(model_env, ""),
            **kwargs,
        )

    def _send_once(self, request: ChatRequest) -> ChatResponse:
        import httpx

        messages = []
        if request.system:
            messages.append({"role": "system", "content": request.system})
        if request.image_png is not None:
            data_url = "data:image/png;base64," + base64.b64encode(
                request.image_png
            ).decode("ascii")
            content = [
                {"type": "text", "text": request.user},
                {"type": "image_url", "image_url": {"url": data_url}},
            ]
        else:
            content = request.user
        messages.append({"role": "user", "content": content})
        payload = {
            "model": request.params.model_name or self._model,
            "messages": messages,
            "temperature": request.params.temperature,
            "max_tokens": request.params.max_tokens,
            "top_p": request.params.top_p,
        }
        start = time.perf_counter()
        try:
            resp = self._client.post(
                self._endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {self._api_key}"},
            )
        except httpx.TimeoutException as exc:
            raise Timeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise ProviderError(str(exc)) from exc
        latency_ms = (time.perf_counter() - start) * 1000.0
        if resp.status_code in (401, 403):
            raise AuthFailure(f"HTTP {resp.status_code}")
        if resp.status_code == 429:
            raise RateLimited("HTTP 429")
        if resp.status_code >= 500:
            raise ProviderError(f"HTTP {resp.status_code}", status=resp.status_code)
        if resp.status_code != 200:
            raise ProviderError(f"HTTP {resp.status_code}", status=resp.status_code)
        try:
            doc = resp.json()
            text = doc["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion payload: {exc}") from exc
        usage = doc.get("usage", {})
        return ChatResponse(
            text=text or "",
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            latency_ms=latency_ms,
            provider_id=str(doc.get("model", self.provider_id)),
        )


@dataclass
class RiskReport:
    general_observations: str
    fire_behavior: str
    spread_potential: str
    severity: Severity
    critical_risks: list[str]
    recommendations: list[str]
    raw_response: str
    source_model: str
    severity_from_fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "general_observations": self.general_observations,
            "fire_behavior": self.fire_behavior,
            "spread_potential": self.spread_potential,
            "severity": self.severity.value,
            "critical_risks": list(self.critical_risks),
            "recommendations": list(self.recommendations),
            "raw_response": self.raw_response,
            "source_model": self.source_model,
            "severity_from_fallback": self.severity_from_fallback,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RiskReport":
        return cls(
            general_observations=d["general_observations"],
            fire_behavior=d["fire_behavior"],
            spread_potential=d["spread_potential"],
            severity=Severity(d["severity"]),
            critical_risks=list(d["critical_risks"]),
            recommendations=list(d["recommendations"]),
            raw_response=d["raw_response"],
            source_model=d["source_model"],
            severity_from_fallback=bool(d.get("severity_from_fallback", False)),
        )


_SECTION_PATTERNS = {
    "general_observations": r"general\s+observations?",
    "fire_behavior": r"fire\s+behavior(?:\s+analysis)?",
    "spread_potential": r"spread\s+potential(?:\s+evaluation)?",
    "severity": r"severity(?:\s+(?:classification|level|assessment))?",
    "critical_risks": r"critical\s+risks?(?:\s+identification)?",
    "recommendations": r"(?:actionable\s+)?recommendations?(?:\s*/?\s*insights?)?(?:\s*/?\s*insight\s+action)?",
}

_HEADING_RE = re.compile(
    r"^\s*(?:#{1,6}\s*)?(?:\d+[.)]\s*)?(?:[-•]\s*)?\**\s*(?P<name>%s)\s*\**\s*[:\-]?\s*\**\s*(?P<rest>.*)$"
    % "|".join(f"(?P<{k}>{v})" for k, v in _SECTION_PATTERNS.items()),
    re.IGNORECASE,
)

_LIST_MARKER_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")
_SEVERITY_WORD_RE = re.compile(r"\b(low|moderate|high|extreme)\b", re.IGNORECASE)


def _split_sections(raw: str) -> dict[str, str]:
    sections: dict[str, list[str]] = {}
    current: str | None = None
    preamble: list[str] = []
    for line in raw.splitlines():
        m = _HEADING_RE.match(line)
        if m and m.group("name"):
            current = next(
                k for k in _SECTION_PATTERNS if m.group(k) is not None
            )
            sections.setdefault(current, [])
            rest = m.group("rest").strip()
            if rest:
                sections[current].append(rest)
        elif current is not None:
            sections[current].append(line)
        else:
            preamble.append(line)
    out = {k: "\n".join(v).strip() for k, v in sections.items()}
    if "general_observations" not in out and preamble:
        text = "\n".join(preamble).strip()
        if text:
            out["general_observations"] = text
    return out


def _split_items(text: str) -> list[str]:
    items = []
    for line in text.splitlines():
        stripped = _LIST_MARKER_RE.sub("", line).strip()
        if stripped:
            items.append(stripped)
    if not items and text.strip():
        items = [text.strip()]
    return items


def classify_severity_fallback(coverage: CoverageMetrics) -> Severity:
    """Coverage-driven severity when the model reply names no level."""
    total = min(
        coverage.wildfire_coverage_pct + coverage.smoke_coverage_pct, 100.0
    )
    if total < SEVERITY_THRESHOLDS["moderate"]:
        return Severity.LOW
    if total < SEVERITY_THRESHOLDS["high"]:
        return Severity.MODERATE
    if total < SEVERITY_THRESHOLDS["extreme"]:
        return Severity.HIGH
    return Severity.EXTREME


def parse_report(raw: str, summary: DetectionSummary, model: str) -> RiskReport:
    """Parse free-form analyst prose into a RiskReport.

    Section headings are matched case-insensitively, numbered or bulleted.
    Never fails on non-empty input; missing severity falls back to the
    coverage classifier and is flagged.
    """
    if not raw or not raw.strip():
        raise EmptyResponse("empty model reply")
    sections = _split_sections(raw)

    severity: Severity | None = None
    sev_text = sections.get("severity", "")
    m = _SEVERITY_WORD_RE.search(sev_text)
    if m:
        severity = Severity(m.group(1).lower())
    fallback = severity is None
    if severity is None:
        severity = classify_severity_fallback(
            CoverageMetrics(
                wildfire_coverage_pct=summary.wildfire_coverage_pct,
                smoke_coverage_pct=summary.smoke_coverage_pct,
            )
        )

    return RiskReport(
        general_observations=sections.get("general_observations", ""),
        fire_behavior=sections.get("fire_behavior", ""),
        spread_potential=sections.get("spread_potential", ""),
        severity=severity,
        critical_risks=_split_items(sections.get("critical_risks", "")),
        recommendations=_split_items(sections.get("recommendations", "")),
        raw_response=raw,
        source_model=model,
        severity_from_fallback=fallback,
    )


def _png_bytes(pixels: np.ndarray) -> bytes:
    mode = "L" if pixels.ndim == 2 else "RGB"
    buf = _io.BytesIO()
    Image.fromarray(pixels, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def assess_risk(
    record: ImageRecord,
    pixels: np.ndarray,
    result: DetectionResult,
    client: ChatClient,
    params: GenerationParams,
) -> tuple[RiskReport, ChatExchange]:
    """Prompt the model with the box-overlaid image and parse its reply.

    The prompt is sent even with zero detections; the instructions tell the
    model it may call out fire the detector missed.
    """
    summary = DetectionSummary.from_result(record, result)
    prompt = build_prompt(summary)
    overlay = draw_detections(pixels, result.detections)
    request = ChatRequest(user=prompt, image_png=_png_bytes(overlay), params=params)
    exchange = client.complete(request)
    model = params.model_name or exchange.response.provider_id
    report = parse_report(exchange.response.text, summary, model)
    return report, exchange
