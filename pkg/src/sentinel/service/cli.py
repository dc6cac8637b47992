"""Command-line front door: ingest, detect, evaluate, assess, judge, serve."""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from ..detection import BackendPool, DetectionResult, DetectorConfig, detect
from ..imagery import (
    DatasetManifest,
    Source,
    Split,
    assign_splits,
    load_image,
    load_manifest,
    read_annotations,
    save_manifest,
)
from ..judge import load_run_manifest, run_judge_evaluation, write_scores_csv
from ..metrics import evaluate_model, format_table
from ..risk import (
    GenerationParams,
    HttpChatClient,
    ScriptedChatClient,
    assess_risk,
)

RASTER_SUFFIXES = {".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp"}


@click.group()
def main():
    """Wildfire monitoring pipeline."""


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(), help="Manifest JSON destination.")
@click.option("--source", default="other", type=click.Choice([s.value for s in Source]))
@click.option("--region", default=None, help="Region tag applied to every image.")
@click.option("--seed", default=1234, show_default=True, help="Split shuffle seed.")
def ingest(directory, out_path, source, region, seed):
    """Scan DIRECTORY for rasters (+ sidecar .txt labels) into a manifest."""
    entries = []
    for path in sorted(Path(directory).iterdir()):
        if path.suffix.lower() not in RASTER_SUFFIXES:
            continue
        record, _ = load_image(path, source=Source(source), region_tag=region)
        sidecar = path.with_suffix(".txt")
        anns = read_annotations(sidecar) if sidecar.exists() else []
        entries.append((record, anns))
    if not entries:
        raise click.ClickException(f"no rasters found under {directory}")
    manifest = assign_splits(DatasetManifest(entries=entries), seed=seed)
    save_manifest(manifest, out_path)
    counts = manifest.split_counts()
    click.echo(
        f"ingested {len(entries)} images -> {out_path} "
        f"(train={counts[0]}, val={counts[1]}, test={counts[2]})"
    )


@main.command("detect")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--backend", required=True, help="mock:<script>|remote:<url>|model:<file>")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--split", default="all", type=click.Choice(["all", "train", "val", "test"]))
@click.option("--confidence", default=0.25, show_default=True)
@click.option("--nms-iou", default=0.5, show_default=True)
def detect_cmd(manifest_path, backend, out_path, split, confidence, nms_iou):
    """Run the detector over manifest images and write results JSON."""
    manifest = load_manifest(manifest_path)
    cfg = DetectorConfig(
        backend=backend, confidence_threshold=confidence, nms_iou_threshold=nms_iou
    )
    ids = manifest.ids() if split == "all" else manifest.split_ids(Split(split))
    pool = BackendPool(cfg, size=1)
    results = []
    for image_id in ids:
        record, _ = manifest.entry(image_id)
        _, pixels = load_image(record.pixel_ref, image_id=record.id)
        with pool.acquire() as handle:
            results.append(detect(record, pixels, cfg, handle))
    Path(out_path).write_text(
        json.dumps([r.to_dict() for r in results], indent=2, sort_keys=True),
        encoding="utf-8",
    )
    click.echo(f"wrote {len(results)} detection results -> {out_path}")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--results", "results_path", required=True, type=click.Path(exists=True))
@click.option("--iou", default=0.5, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path())
def evaluate(manifest_path, results_path, iou, out_path):
    """Score detection results against the manifest's test split."""
    manifest = load_manifest(manifest_path)
    docs = json.loads(Path(results_path).read_text(encoding="utf-8"))
    results = [DetectionResult.from_dict(d) for d in docs]
    report = evaluate_model(manifest, results, iou_threshold=iou)
    click.echo(format_table([report]))
    if out_path:
        Path(out_path).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
        click.echo(f"wrote report -> {out_path}")


@main.command()
@click.option("--result", "result_path", required=True, type=click.Path(exists=True))
@click.option("--image", "image_path", default=None, type=click.Path(exists=True),
              help="Raster to attach; defaults to a blank canvas-free text prompt.")
@click.option("--provider-env", is_flag=True, help="Use LLM_ENDPOINT/LLM_API_KEY/LLM_MODEL.")
@click.option("--transcript", default=None, type=click.Path(exists=True),
              help="Scripted transcript JSON instead of a live provider.")
@click.option("--out", "out_path", default=None, type=click.Path())
def assess(result_path, image_path, provider_env, transcript, out_path):
    """Generate a structured risk report for one detection result."""
    doc = json.loads(Path(result_path).read_text(encoding="utf-8"))
    if isinstance(doc, list):
        if not doc:
            raise click.ClickException("results file is empty")
        doc = doc[0]
    result = DetectionResult.from_dict(doc)

    if transcript:
        client = ScriptedChatClient(transcript)
        model = "scripted"
    elif provider_env:
        client = HttpChatClient.from_env()
        model = os.environ.get("LLM_MODEL", "")
    else:
        raise click.ClickException("pass --provider-env or --transcript")
    params = GenerationParams(model_name=model)

    if image_path:
        record, pixels = load_image(image_path, image_id=result.image_id)
    else:
        import numpy as np

        from ..imagery import ImageRecord
        from datetime import datetime, timezone

        side = 416
        record = ImageRecord(
            id=result.image_id,
            source=Source.OTHER,
            acquired_at=datetime.now(timezone.utc),
            width_px=side,
            height_px=side,
            pixel_ref="(none)",
        )
        pixels = np.zeros((side, side, 3), dtype=np.uint8)
    report, exchange = assess_risk(record, pixels, result, client, params)
    click.echo(f"severity: {report.severity.value}"
               + (" (fallback from coverage)" if report.severity_from_fallback else ""))
    for rec in report.recommendations:
        click.echo(f"- {rec}")
    if out_path:
        Path(out_path).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
        click.echo(f"wrote report -> {out_path}")


@main.command()
@click.option("--run-manifest", "run_manifest_path", required=True, type=click.Path(exists=True))
@click.option("--provider-env", is_flag=True, help="Use LLM_ENDPOINT + JUDGE_MODEL.")
@click.option("--transcript", default=None, type=click.Path(exists=True))
@click.option("--model-a", default="model_a", show_default=True)
@click.option("--model-b", default="model_b", show_default=True)
@click.option("--out-prefix", default=None, type=click.Path(),
              help="Write <prefix>.csv and <prefix>.json.")
def judge(run_manifest_path, provider_env, transcript, model_a, model_b, out_prefix):
    """Judge two models' reports item-by-item and compare mean scores."""
    manifest = load_run_manifest(run_manifest_path)
    if transcript:
        client = ScriptedChatClient(transcript)
        judge_model = "scripted"
    elif provider_env:
        client = HttpChatClient.from_env(model_env="JUDGE_MODEL")
        judge_model = os.environ.get("JUDGE_MODEL", "")
    else:
        raise click.ClickException("pass --provider-env or --transcript")
    params = GenerationParams(temperature=0.0, model_name=judge_model)
    scores_a, scores_b, comparison = run_judge_evaluation(
        manifest,
        client,
        model_a=model_a,
        model_b=model_b,
        params=params,
        base_dir=Path(run_manifest_path).parent,
    )
    click.echo(comparison.summary_line())
    if out_prefix:
        write_scores_csv(f"{out_prefix}.csv", {model_a: scores_a, model_b: scores_b})
        Path(f"{out_prefix}.json").write_text(
            json.dumps(comparison.to_dict(), indent=2, sort_keys=True),
            encoding="utf-8",
        )
        click.echo(f"wrote {out_prefix}.csv and {out_prefix}.json")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--workers", default=4, show_default=True, help="Pipeline worker pool size.")
@click.option("--backend", default=None, help="Detector backend spec.")
@click.option("--store", "store_target", default=None,
              help="Store location; defaults to DB_URL or ./sentinel-data/store.")
@click.option("--data-dir", default="./sentinel-data", show_default=True)
@click.option("--token", default=None, help="Static API token; unset disables auth.")
@click.option("--static-dir", default=None, type=click.Path(),
              help="Dashboard build directory to serve at /.")
def serve(port, host, workers, backend, store_target, data_dir, token, static_dir):
    """Run the HTTP API (uvicorn)."""
    import uvicorn

    from ..store import open_store
    from .api import ServiceConfig, create_app

    data_dir = Path(data_dir)
    target = store_target or os.environ.get("DB_URL") or str(data_dir / "store")
    store = open_store(target)

    llm_client = judge_client = None
    if os.environ.get("LLM_ENDPOINT"):
        llm_client = HttpChatClient.from_env()
        judge_client = HttpChatClient.from_env(model_env="JUDGE_MODEL")
    config = ServiceConfig(
        store=store,
        data_dir=data_dir,
        detector_cfg=DetectorConfig(backend=backend) if backend else None,
        llm_client=llm_client,
        judge_client=judge_client,
        generation=GenerationParams(model_name=os.environ.get("LLM_MODEL", "")),
        judge_generation=GenerationParams(
            temperature=0.0, model_name=os.environ.get("JUDGE_MODEL", "")
        ),
        workers=workers,
        api_token=token,
        static_dir=Path(static_dir) if static_dir else None,
    )
    app = create_app(config)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
