from __future__ import annotations

import sqlite3
from datetime import datetime, timedelta, timezone

import pytest

from sentinel.detection import CoverageMetrics, DetectionResult, compute_coverage
from sentinel.imagery import ClassLabel
from sentinel.judge import JudgeScore
from sentinel.risk import RiskReport, Severity
from sentinel.store import (
    MAGIC_HEADER,
    DuplicateId,
    EmbeddedStore,
    ForeignKeyViolation,
    HistoryRecord,
    InvalidRange,
    NonMonotonicTime,
    NotFound,
    SqlStore,
    TimeSeriesPoint,
    TooFewPoints,
    dt_to_ms,
    growth_rate,
    open_store,
)

from .conftest import det, make_record

T0 = datetime(2024, 7, 1, 12, 0, tzinfo=timezone.utc)


def _detection_result(image_id: str, wf: float = 5.0) -> DetectionResult:
    dets = [det(0, 0, 416 * (wf / 100.0) ** 0.5, 416 * (wf / 100.0) ** 0.5,
                ClassLabel.WILDFIRE, 0.9)] if wf > 0 else []
    return DetectionResult(
        image_id=image_id,
        model_id="mock",
        detections=dets,
        inference_ms=2.5,
        coverage=compute_coverage(dets, 416, 416),
    )


def _record(record_id: str, image_id: str, acquired: datetime, region="west", wf=5.0):
    return HistoryRecord(
        record_id=record_id,
        image_id=image_id,
        acquired_at=acquired,
        region_tag=region,
        detection=_detection_result(image_id, wf),
        risk_report_id=None,
        created_at=acquired + timedelta(minutes=5),
    )


def _risk_report() -> RiskReport:
    return RiskReport(
        general_observations="obs",
        fire_behavior="fb",
        spread_potential="sp",
        severity=Severity.HIGH,
        critical_risks=["a"],
        recommendations=["b"],
        raw_response="Severity: high",
        source_model="m",
    )


@pytest.fixture(params=["embedded", "sql"])
def store(request, tmp_path):
    if request.param == "embedded":
        return EmbeddedStore(tmp_path / "store")
    return SqlStore(sqlite3.connect(":memory:", check_same_thread=False))


def _seed_image(store, image_id="img-1", region="west", acquired=T0):
    record = make_record(image_id, region=region, acquired_at=acquired)
    store.insert_image(record)
    return record


# ---- round trips ----


def test_image_round_trip(store):
    record = _seed_image(store)
    assert store.get_image("img-1") == record


def test_history_record_round_trip(store):
    _seed_image(store)
    rec = _record("r-1", "img-1", T0)
    store.insert_record(rec)
    assert store.get_record("r-1") == rec


def test_duplicate_ids_rejected(store):
    record = _seed_image(store)
    with pytest.raises(DuplicateId):
        store.insert_image(record)
    rec = _record("r-1", "img-1", T0)
    store.insert_record(rec)
    with pytest.raises(DuplicateId):
        store.insert_record(rec)


def test_unknown_image_is_fk_violation(store):
    with pytest.raises(ForeignKeyViolation):
        store.insert_record(_record("r-1", "ghost", T0))


def test_missing_lookups_not_found(store):
    with pytest.raises(NotFound):
        store.get_image("nope")
    with pytest.raises(NotFound):
        store.get_record("nope")
    with pytest.raises(NotFound):
        store.get_risk_report("nope")


def test_risk_report_round_trip_and_fk(store):
    _seed_image(store)
    store.insert_record(_record("r-1", "img-1", T0))
    report = _risk_report()
    with pytest.raises(ForeignKeyViolation):
        store.insert_risk_report("rr-1", "ghost-record", report)
    store.insert_risk_report("rr-1", "r-1", report)
    assert store.get_risk_report("rr-1") == report
    with pytest.raises(DuplicateId):
        store.insert_risk_report("rr-1", "r-1", report)


def test_judge_score_insert(store):
    _seed_image(store)
    store.insert_record(_record("r-1", "img-1", T0))
    store.insert_risk_report("rr-1", "r-1", _risk_report())
    score = JudgeScore(report_id="rr-1", overall=7, rationale="ok", judge_model="j")
    store.insert_judge_score("js-1", score)
    with pytest.raises(DuplicateId):
        store.insert_judge_score("js-1", score)


def test_many_insert_fetch_cycles_field_equal(store):
    for i in range(60):
        image_id = f"img-{i}"
        _seed_image(store, image_id, acquired=T0 + timedelta(minutes=i))
        rec = _record(f"r-{i}", image_id, T0 + timedelta(minutes=i), wf=float(i % 7))
        store.insert_record(rec)
        assert store.get_record(f"r-{i}") == rec


# ---- time series ----


def test_time_series_empty(store):
    assert store.coverage_time_series("west", T0, T0 + timedelta(days=1)) == []


def test_time_series_ordered_and_filtered(store):
    for i, minutes in enumerate([40, 0, 20]):
        image_id = f"img-{i}"
        _seed_image(store, image_id, acquired=T0 + timedelta(minutes=minutes))
        store.insert_record(
            _record(f"r-{i}", image_id, T0 + timedelta(minutes=minutes), wf=float(i + 1))
        )
    _seed_image(store, "east-img", region="east")
    store.insert_record(_record("r-east", "east-img", T0, region="east"))

    points = store.coverage_time_series("west", T0, T0 + timedelta(hours=1))
    assert [p.timestamp for p in points] == [
        T0, T0 + timedelta(minutes=20), T0 + timedelta(minutes=40)
    ]
    assert [round(p.wildfire_pct, 6) for p in points] == [2.0, 3.0, 1.0]


def test_time_series_half_open_interval(store):
    for i in range(3):
        image_id = f"img-{i}"
        when = T0 + timedelta(hours=i)
        _seed_image(store, image_id, acquired=when)
        store.insert_record(_record(f"r-{i}", image_id, when))
    points = store.coverage_time_series("west", T0, T0 + timedelta(hours=2))
    assert len(points) == 2  # the record at exactly `to` is excluded
    assert points[0].timestamp == T0
    points = store.coverage_time_series("west", T0 + timedelta(hours=1), T0 + timedelta(hours=3))
    assert len(points) == 2  # the record at exactly `from` is included


def test_time_series_invalid_range(store):
    with pytest.raises(InvalidRange):
        store.coverage_time_series("west", T0 + timedelta(days=1), T0)


# ---- growth rate ----


def _point(when: datetime, wf: float) -> TimeSeriesPoint:
    return TimeSeriesPoint(timestamp=when, wildfire_pct=wf, smoke_pct=0.0)


def test_growth_rate_basic_arithmetic():
    series = [_point(T0, 5.0), _point(T0 + timedelta(hours=1), 7.0)]
    [(interval, rate)] = growth_rate(series)
    assert interval == (T0, T0 + timedelta(hours=1))
    assert rate == pytest.approx(2.0)


def test_growth_rate_constant_series_is_zero():
    series = [_point(T0 + timedelta(hours=i), 4.0) for i in range(5)]
    assert [r for _, r in growth_rate(series)] == [0.0] * 4


def test_growth_rate_duplicate_timestamps_rejected():
    series = [_point(T0, 5.0), _point(T0, 6.0)]
    with pytest.raises(NonMonotonicTime):
        growth_rate(series)


def test_growth_rate_too_few_points():
    with pytest.raises(TooFewPoints):
        growth_rate([_point(T0, 5.0)])


def test_growth_rate_linear_series_constant():
    series = [_point(T0 + timedelta(hours=i), 2.0 + 1.5 * i) for i in range(8)]
    rates = [r for _, r in growth_rate(series)]
    assert all(r == pytest.approx(1.5) for r in rates)


# ---- embedded specifics ----


def test_embedded_store_durable_across_reopen(tmp_path):
    root = tmp_path / "store"
    first = EmbeddedStore(root)
    _seed_image(first)
    first.insert_record(_record("r-1", "img-1", T0))
    second = EmbeddedStore(root)
    assert second.get_record("r-1") == first.get_record("r-1")
    head = (root / "store.log").read_text().splitlines()[0]
    assert head == MAGIC_HEADER


def test_embedded_store_rejects_foreign_log(tmp_path):
    root = tmp_path / "store"
    root.mkdir()
    (root / "store.log").write_text("SOMETHING ELSE\n")
    with pytest.raises(Exception):
        EmbeddedStore(root)


def test_embedded_snapshot_written_and_used(tmp_path):
    root = tmp_path / "store"
    store = EmbeddedStore(root, snapshot_every=10)
    for i in range(12):
        _seed_image(store, f"img-{i}", acquired=T0)
    assert (root / "index.snap").exists()
    reopened = EmbeddedStore(root, snapshot_every=10)
    assert reopened.get_image("img-11").id == "img-11"


def test_open_store_dispatch(tmp_path):
    embedded = open_store(tmp_path / "emb")
    assert isinstance(embedded, EmbeddedStore)
    sql = open_store("sqlite::memory:")
    assert isinstance(sql, SqlStore)


def test_history_record_invariant():
    with pytest.raises(ValueError):
        HistoryRecord(
            record_id="r",
            image_id="i",
            acquired_at=T0 + timedelta(days=1),
            region_tag=None,
            detection=_detection_result("i"),
            risk_report_id=None,
            created_at=T0,
        )


def test_timeseries_point_validation():
    with pytest.raises(ValueError):
        TimeSeriesPoint(timestamp=T0, wildfire_pct=120.0, smoke_pct=0.0)
