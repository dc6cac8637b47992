"""Async HTTP API over the detection/assessment pipeline.

Endpoints (JSON over HTTP/1.1):
  POST /api/images        submit a raster; returns {"job_id"} with 202
  GET  /api/jobs/{id}     job snapshot
  GET  /api/results/{id}  detection + risk report (or evaluation artifact)
  GET  /api/history       coverage time series for a region/time window
  POST /api/evaluations   run a detector over a manifest's test split
  POST /api/judge-runs    judge two models' reports and compare
  GET  /api/health        liveness and job counters

Submission returns before any processing starts; pipeline work runs on the
JobQueue's bounded worker pool.
"""
from __future__ import annotations

import io
import json
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse

from ..detection import BackendPool, DetectorConfig, detect
from ..imagery import Source, load_image, load_manifest, ManifestInvalid, Split
from ..judge import load_run_manifest, run_judge_evaluation, write_scores_csv
from ..metrics import evaluate_model
from ..risk import ChatClient, GenerationParams, assess_risk
from ..store import (
    HistoryRecord,
    InvalidRange,
    NonMonotonicTime,
    NotFound,
    WildfireStore,
    growth_rate,
)
from .jobs import JobKind, JobNotFound, JobQueue, JobState, QueueFull

DEFAULT_MAX_PAYLOAD = 32 * 1024 * 1024


@dataclass
class ServiceConfig:
    store: WildfireStore
    data_dir: Path
    detector_cfg: DetectorConfig | None = None
    llm_client: ChatClient | None = None
    judge_client: ChatClient | None = None
    generation: GenerationParams = field(default_factory=GenerationParams)
    judge_generation: GenerationParams = field(
        default_factory=lambda: GenerationParams(temperature=0.0)
    )
    workers: int = 4
    queue_size: int = 256
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD
    api_token: str | None = None
    static_dir: Path | None = None


def _parse_when(value: str, name: str) -> datetime:
    try:
        if value.isdigit():
            return datetime.fromtimestamp(int(value) / 1000.0, tz=timezone.utc)
        dt = datetime.fromisoformat(value)
        return dt if dt.tzinfo else dt.replace(tzinfo=timezone.utc)
    except ValueError:
        raise HTTPException(status_code=400, detail=f"bad {name!r} timestamp: {value}")


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="wildfire-sentinel", version="0.1.0")
    config.data_dir.mkdir(parents=True, exist_ok=True)
    uploads = config.data_dir / "uploads"
    artifacts = config.data_dir / "artifacts"
    uploads.mkdir(exist_ok=True)
    artifacts.mkdir(exist_ok=True)

    jobs = JobQueue(workers=config.workers, queue_size=config.queue_size)
    pool = (
        BackendPool(config.detector_cfg, size=config.workers)
        if config.detector_cfg
        else None
    )
    app.state.jobs = jobs
    app.state.config = config

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if (
            config.api_token
            and request.url.path.startswith("/api/")
            and request.url.path != "/api/health"
        ):
            header = request.headers.get("authorization", "")
            if header != f"Bearer {config.api_token}":
                return JSONResponse({"detail": "unauthorized"}, status_code=401)
        return await call_next(request)

    # ---- pipeline job bodies ----

    def run_image_job(
        saved: Path, image_id: str, source: Source, region: str | None,
        acquired_at: datetime | None,
    ) -> str:
        if pool is None or config.detector_cfg is None:
            raise RuntimeError("no detector backend configured")
        record, pixels = load_image(
            saved, image_id=image_id, source=source,
            acquired_at=acquired_at, region_tag=region,
        )
        with pool.acquire() as backend:
            result = detect(record, pixels, config.detector_cfg, backend)
        record_id = uuid.uuid4().hex
        risk_report = None
        report_id = None
        if config.llm_client is not None:
            risk_report, _ = assess_risk(
                record, pixels, result, config.llm_client, config.generation
            )
            report_id = f"rr-{record_id}"
        config.store.insert_image(record)
        config.store.insert_record(
            HistoryRecord(
                record_id=record_id,
                image_id=record.id,
                acquired_at=record.acquired_at,
                region_tag=record.region_tag,
                detection=result,
                risk_report_id=report_id,
                created_at=datetime.now(timezone.utc),
            )
        )
        if risk_report is not None and report_id is not None:
            config.store.insert_risk_report(report_id, record_id, risk_report)
        return record_id

    def run_evaluation_job(manifest_path: str, backend_spec: str | None,
                           results_path: str | None, iou_threshold: float) -> str:
        manifest = load_manifest(manifest_path)
        if results_path:
            from ..detection import DetectionResult

            docs = json.loads(Path(results_path).read_text(encoding="utf-8"))
            results = [DetectionResult.from_dict(d) for d in docs]
        else:
            cfg = config.detector_cfg
            if backend_spec:
                base = cfg or DetectorConfig(backend=backend_spec)
                cfg = DetectorConfig(
                    backend=backend_spec,
                    confidence_threshold=base.confidence_threshold,
                    nms_iou_threshold=base.nms_iou_threshold,
                    input_size=base.input_size,
                )
            if cfg is None:
                raise RuntimeError("no detector backend configured")
            eval_pool = BackendPool(cfg, size=1)
            results = []
            for image_id in manifest.split_ids(Split.TEST) or manifest.ids():
                record, anns = manifest.entry(image_id)
                _, pixels = load_image(record.pixel_ref, image_id=record.id)
                with eval_pool.acquire() as backend:
                    results.append(detect(record, pixels, cfg, backend))
        report = evaluate_model(manifest, results, iou_threshold=iou_threshold)
        out = artifacts / f"metrics-{uuid.uuid4().hex}.json"
        out.write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
        return f"artifact:{out}"

    def run_judge_job(run_manifest_path: str, model_a: str, model_b: str) -> str:
        if config.judge_client is None:
            raise RuntimeError("no judge client configured")
        manifest = load_run_manifest(run_manifest_path)
        base_dir = Path(run_manifest_path).parent
        scores_a, scores_b, comparison = run_judge_evaluation(
            manifest,
            config.judge_client,
            model_a=model_a,
            model_b=model_b,
            params=config.judge_generation,
            base_dir=base_dir,
        )
        run_id = uuid.uuid4().hex
        csv_path = artifacts / f"judge-{run_id}.csv"
        write_scores_csv(csv_path, {model_a: scores_a, model_b: scores_b})
        out = artifacts / f"judge-{run_id}.json"
        doc = comparison.to_dict()
        doc["scores_csv"] = str(csv_path)
        out.write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
        return f"artifact:{out}"

    # ---- endpoints ----

    @app.post("/api/images", status_code=202)
    async def submit_image(
        request: Request,
        image_id: str | None = None,
        source: str = "other",
        region: str | None = None,
        acquired_at: str | None = None,
    ):
        body = await request.body()
        if len(body) > config.max_payload_bytes:
            raise HTTPException(status_code=413, detail="payload too large")
        if not body:
            raise HTTPException(status_code=415, detail="empty payload")
        from PIL import Image, UnidentifiedImageError

        try:
            with Image.open(io.BytesIO(body)) as probe:
                fmt = (probe.format or "bin").lower()
        except UnidentifiedImageError:
            raise HTTPException(status_code=415, detail="unsupported image format")
        try:
            src = Source(source)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown source {source!r}")
        when = _parse_when(acquired_at, "acquired_at") if acquired_at else None

        upload_id = uuid.uuid4().hex
        saved = uploads / f"{upload_id}.{fmt}"
        saved.write_bytes(body)
        final_id = image_id or upload_id
        kind = JobKind.ASSESS if config.llm_client is not None else JobKind.DETECT
        try:
            job = jobs.submit(
                kind,
                lambda: run_image_job(saved, final_id, src, region, when),
            )
        except QueueFull:
            raise HTTPException(status_code=429, detail="queue full, retry later")
        return {"job_id": job.job_id}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            return jobs.get(job_id).to_dict()
        except JobNotFound:
            raise HTTPException(status_code=404, detail=f"no job {job_id!r}")

    @app.get("/api/results/{job_id}")
    def get_result(job_id: str):
        try:
            job = jobs.get(job_id)
        except JobNotFound:
            raise HTTPException(status_code=404, detail=f"no job {job_id!r}")
        if job.state is not JobState.DONE:
            detail = {"state": job.state.value, "error": job.error}
            raise HTTPException(status_code=409, detail=detail)
        assert job.result_ref is not None
        if job.result_ref.startswith("artifact:"):
            path = Path(job.result_ref[len("artifact:") :])
            return json.loads(path.read_text(encoding="utf-8"))
        try:
            record = config.store.get_record(job.result_ref)
        except NotFound:
            raise HTTPException(status_code=404, detail="result vanished from store")
        report = None
        if record.risk_report_id:
            report = config.store.get_risk_report(record.risk_report_id).to_dict()
        return {
            "record_id": record.record_id,
            "image_id": record.image_id,
            "acquired_at": record.acquired_at.isoformat(),
            "region_tag": record.region_tag,
            "detection": record.detection.to_dict(),
            "risk_report": report,
        }

    @app.get("/api/history")
    def get_history(
        region: str | None = None,
        from_: str = Query(alias="from"),
        to: str = Query(alias="to"),
    ):
        from_dt = _parse_when(from_, "from")
        to_dt = _parse_when(to, "to")
        try:
            points = config.store.coverage_time_series(region, from_dt, to_dt)
        except InvalidRange as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        rates = []
        if len(points) >= 2:
            try:
                rates = [
                    {
                        "from": start.isoformat(),
                        "to": end.isoformat(),
                        "wildfire_pp_per_hour": rate,
                    }
                    for (start, end), rate in growth_rate(points)
                ]
            except NonMonotonicTime:
                rates = []  # coincident acquisitions: no defined rate
        return {
            "points": [
                {
                    "timestamp": p.timestamp.isoformat(),
                    "wildfire_pct": p.wildfire_pct,
                    "smoke_pct": p.smoke_pct,
                }
                for p in points
            ],
            "growth_rates": rates,
        }

    @app.get("/api/health")
    def health():
        return {"status": "ok", "jobs": jobs.counts(), "high_water": jobs.high_water}

    @app.post("/api/evaluations", status_code=202)
    def submit_evaluation(body: dict):
        manifest_path = body.get("manifest_path")
        if not manifest_path:
            raise HTTPException(status_code=400, detail="manifest_path is required")
        try:
            load_manifest(manifest_path)
        except ManifestInvalid as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        try:
            job = jobs.submit(
                JobKind.EVALUATE,
                lambda: run_evaluation_job(
                    manifest_path,
                    body.get("backend"),
                    body.get("results_path"),
                    float(body.get("iou_threshold", 0.5)),
                ),
            )
        except QueueFull:
            raise HTTPException(status_code=429, detail="queue full, retry later")
        return {"job_id": job.job_id}

    @app.post("/api/judge-runs", status_code=202)
    def submit_judge_run(body: dict):
        path = body.get("run_manifest_path")
        if not path:
            raise HTTPException(status_code=400, detail="run_manifest_path is required")
        try:
            manifest = load_run_manifest(path)
        except (OSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        base = Path(path).parent
        missing = [
            item["item_id"]
            for item in manifest
            if not (base / item["report_a"]).exists()
            or not (base / item["report_b"]).exists()
        ]
        if missing:
            raise HTTPException(
                status_code=400,
                detail=f"reports missing for items: {missing}",
            )
        try:
            job = jobs.submit(
                JobKind.JUDGE_RUN,
                lambda: run_judge_job(
                    path,
                    body.get("model_a", "model_a"),
                    body.get("model_b", "model_b"),
                ),
            )
        except QueueFull:
            raise HTTPException(status_code=429, detail="queue full, retry later")
        return {"job_id": job.job_id}

    if config.static_dir and Path(config.static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True))

    return app
