"""Persistence for images, detections, risk reports, and judge scores.

Two interchangeable backends:
  * EmbeddedStore - append-only JSON-line log with a periodic index
    snapshot; zero external dependencies, the default for tests and the CLI.
  * SqlStore - any DB-API connection (sqlite3 in tests) using the fixed
    relational schema in DDL_STATEMENTS.

Timestamps are stored as UTC epoch milliseconds in both backends. Writes
are serialized through a single lock; reads see a consistent snapshot.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .detection import DetectionResult
from .imagery import ImageRecord, Source
from .judge import JudgeScore
from .risk import RiskReport


class StoreError(Exception):
    pass


class DuplicateId(StoreError):
    pass


class ForeignKeyViolation(StoreError):
    pass


class NotFound(StoreError):
    pass


class InvalidRange(StoreError):
    pass


class TooFewPoints(StoreError):
    pass


class NonMonotonicTime(StoreError):
    pass


MAGIC_HEADER = "WILDFIRE-STORE v1"
SNAPSHOT_EVERY = 100


def dt_to_ms(dt: datetime) -> int:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(round(dt.timestamp() * 1000))


def ms_to_dt(ms: int) -> datetime:
    return datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)


@dataclass
class HistoryRecord:
    record_id: str
    image_id: str
    acquired_at: datetime
    region_tag: str | None
    detection: DetectionResult
    risk_report_id: str | None
    created_at: datetime

    def __post_init__(self) -> None:
        if self.acquired_at.tzinfo is None:
            self.acquired_at = self.acquired_at.replace(tzinfo=timezone.utc)
        if self.created_at.tzinfo is None:
            self.created_at = self.created_at.replace(tzinfo=timezone.utc)
        if self.acquired_at > self.created_at:
            raise ValueError("acquired_at must not be after created_at")

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "image_id": self.image_id,
            "acquired_at_ms": dt_to_ms(self.acquired_at),
            "region_tag": self.region_tag,
            "detection": self.detection.to_dict(),
            "risk_report_id": self.risk_report_id,
            "created_at_ms": dt_to_ms(self.created_at),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HistoryRecord":
        return cls(
            record_id=d["record_id"],
            image_id=d["image_id"],
            acquired_at=ms_to_dt(d["acquired_at_ms"]),
            region_tag=d.get("region_tag"),
            detection=DetectionResult.from_dict(d["detection"]),
            risk_report_id=d.get("risk_report_id"),
            created_at=ms_to_dt(d["created_at_ms"]),
        )


@dataclass(frozen=True)
class TimeSeriesPoint:
    timestamp: datetime
    wildfire_pct: float
    smoke_pct: float

    def __post_init__(self) -> None:
        for v in (self.wildfire_pct, self.smoke_pct):
            if not (0.0 <= v <= 100.0):
                raise ValueError(f"percentage {v} outside [0,100]")

    def to_dict(self) -> dict:
        return {
            "timestamp_ms": dt_to_ms(self.timestamp),
            "wildfire_pct": self.wildfire_pct,
            "smoke_pct": self.smoke_pct,
        }


def growth_rate(
    series: list[TimeSeriesPoint],
) -> list[tuple[tuple[datetime, datetime], float]]:
    """Wildfire-coverage change per consecutive pair, in pct-points/hour."""
    if len(series) < 2:
        raise TooFewPoints(f"need at least 2 points, got {len(series)}")
    for a, b in zip(series, series[1:]):
        if b.timestamp <= a.timestamp:
            raise NonMonotonicTime(
                f"timestamps not strictly increasing at {a.timestamp} -> {b.timestamp}"
            )
    rates = []
    for a, b in zip(series, series[1:]):
        hours = (b.timestamp - a.timestamp).total_seconds() / 3600.0
        rates.append(
            ((a.timestamp, b.timestamp), (b.wildfire_pct - a.wildfire_pct) / hours)
        )
    return rates


class WildfireStore:
    """Shared query layer; subclasses provide the physical storage."""

    def insert_image(self, record: ImageRecord) -> str:
        raise NotImplementedError

    def get_image(self, image_id: str) -> ImageRecord:
        raise NotImplementedError

    def insert_record(self, rec: HistoryRecord) -> str:
        raise NotImplementedError

    def get_record(self, record_id: str) -> HistoryRecord:
        raise NotImplementedError

    def insert_risk_report(
        self, report_id: str, detection_record_id: str, report: RiskReport
    ) -> str:
        raise NotImplementedError

    def get_risk_report(self, report_id: str) -> RiskReport:
        raise NotImplementedError

    def insert_judge_score(self, score_id: str, score: JudgeScore) -> str:
        raise NotImplementedError

    def list_records(self) -> list[HistoryRecord]:
        raise NotImplementedError

    def coverage_time_series(
        self, region_tag: str | None, from_dt: datetime, to_dt: datetime
    ) -> list[TimeSeriesPoint]:
        """Points for records with acquired_at in the half-open [from, to)."""
        if from_dt > to_dt:
            raise InvalidRange(f"from {from_dt} is after to {to_dt}")
        picked = [
            r
            for r in self.list_records()
            if (region_tag is None or r.region_tag == region_tag)
            and from_dt <= r.acquired_at < to_dt
        ]
        picked.sort(key=lambda r: (r.acquired_at, r.record_id))
        return [
            TimeSeriesPoint(
                timestamp=r.acquired_at,
                wildfire_pct=r.detection.coverage.wildfire_coverage_pct,
                smoke_pct=r.detection.coverage.smoke_coverage_pct,
            )
            for r in picked
        ]


class EmbeddedStore(WildfireStore):
    """File-backed store: magic-headed append-only log + index snapshots."""

    def __init__(self, root: str | Path, snapshot_every: int = SNAPSHOT_EVERY):
        self._root = Path(root)
        self._root.mkdir(parents=True, exist_ok=True)
        self._log_path = self._root / "store.log"
        self._snap_path = self._root / "index.snap"
        self._lock = threading.Lock()
        self._snapshot_every = snapshot_every
        self._images: dict[str, dict] = {}
        self._records: dict[str, dict] = {}
        self._reports: dict[str, dict] = {}
        self._scores: dict[str, dict] = {}
        self._applied = 0
        self._load()

    # ---- log plumbing ----

    def _load(self) -> None:
        if not self._log_path.exists():
            self._log_path.write_text(MAGIC_HEADER + "\n", encoding="utf-8")
            return
        start_line = 0
        if self._snap_path.exists():
            snap = json.loads(self._snap_path.read_text(encoding="utf-8"))
            if snap.get("magic") == MAGIC_HEADER:
                self._images = snap["images"]
                self._records = snap["records"]
                self._reports = snap["reports"]
                self._scores = snap["scores"]
                start_line = int(snap["log_lines"])
                self._applied = start_line
        with open(self._log_path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if header != MAGIC_HEADER:
                raise StoreError(f"{self._log_path}: bad magic header {header!r}")
            for lineno, line in enumerate(fh):
                if lineno < start_line or not line.strip():
                    continue
                entry = json.loads(line)
                self._apply(entry["kind"], entry["data"])
                self._applied += 1

    def _apply(self, kind: str, data: dict) -> None:
        target = {
            "image": (self._images, "id"),
            "record": (self._records, "record_id"),
            "report": (self._reports, "report_id"),
            "score": (self._scores, "score_id"),
        }[kind]
        table, key = target
        table[data[key]] = data

    def _append(self, kind: str, data: dict) -> None:
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"kind": kind, "data": data}, sort_keys=True) + "\n")
            fh.flush()
        self._apply(kind, data)
        self._applied += 1
        if self._applied % self._snapshot_every == 0:
            self._write_snapshot()

    def _write_snapshot(self) -> None:
        snap = {
            "magic": MAGIC_HEADER,
            "log_lines": self._applied,
            "images": self._images,
            "records": self._records,
            "reports": self._reports,
            "scores": self._scores,
        }
        tmp = self._snap_path.with_suffix(".snap.tmp")
        tmp.write_text(json.dumps(snap, sort_keys=True), encoding="utf-8")
        tmp.replace(self._snap_path)

    # ---- store API ----

    def insert_image(self, record: ImageRecord) -> str:
        with self._lock:
            if record.id in self._images:
                raise DuplicateId(f"image {record.id!r} already stored")
            self._append(
                "image",
                {
                    "id": record.id,
                    "source": record.source.value,
                    "acquired_at_ms": dt_to_ms(record.acquired_at),
                    "width": record.width_px,
                    "height": record.height_px,
                    "region_tag": record.region_tag,
                    "pixel_ref": record.pixel_ref,
                },
            )
            return record.id

    def get_image(self, image_id: str) -> ImageRecord:
        with self._lock:
            try:
                d = self._images[image_id]
            except KeyError:
                raise NotFound(f"image {image_id!r}") from None
        return ImageRecord(
            id=d["id"],
            source=Source(d["source"]),
            acquired_at=ms_to_dt(d["acquired_at_ms"]),
            width_px=d["width"],
            height_px=d["height"],
            pixel_ref=d["pixel_ref"],
            region_tag=d.get("region_tag"),
        )

    def insert_record(self, rec: HistoryRecord) -> str:
        with self._lock:
            if rec.record_id in self._records:
                raise DuplicateId(f"record {rec.record_id!r} already stored")
            if rec.image_id not in self._images:
                raise ForeignKeyViolation(f"unknown image {rec.image_id!r}")
            self._append("record", rec.to_dict())
            return rec.record_id

    def get_record(self, record_id: str) -> HistoryRecord:
        with self._lock:
            try:
                d = self._records[record_id]
            except KeyError:
                raise NotFound(f"record {record_id!r}") from None
        return HistoryRecord.from_dict(d)

    def insert_risk_report(
        self, report_id: str, detection_record_id: str, report: RiskReport
    ) -> str:
        with self._lock:
            if report_id in self._reports:
                raise DuplicateId(f"report {report_id!r} already stored")
            if detection_record_id not in self._records:
                raise ForeignKeyViolation(f"unknown record {detection_record_id!r}")
            self._append(
                "report",
                {
                    "report_id": report_id,
                    "detection_id": detection_record_id,
                    "report": report.to_dict(),
                },
            )
            return report_id

    def get_risk_report(self, report_id: str) -> RiskReport:
        with self._lock:
            try:
                d = self._reports[report_id]
            except KeyError:
                raise NotFound(f"report {report_id!r}") from None
        return RiskReport.from_dict(d["report"])

    def insert_judge_score(self, score_id: str, score: JudgeScore) -> str:
        with self._lock:
            if score_id in self._scores:
                raise DuplicateId(f"score {score_id!r} already stored")
            self._append(
                "score",
                {
                    "score_id": score_id,
                    "report_id": score.report_id,
                    "judge_model": score.judge_model,
                    "score": score.overall,
                    "rationale": score.rationale,
                },
            )
            return score_id

    def list_records(self) -> list[HistoryRecord]:
        with self._lock:
            dicts = list(self._records.values())
        return [HistoryRecord.from_dict(d) for d in dicts]


DDL_STATEMENTS = (
    """CREATE TABLE IF NOT EXISTS images(
        id TEXT PRIMARY KEY,
        source TEXT NOT NULL,
        acquired_at BIGINT NOT NULL,
        width INTEGER NOT NULL,
        height INTEGER NOT NULL,
        region_tag TEXT,
        pixel_ref TEXT NOT NULL
    )""",
    """CREATE TABLE IF NOT EXISTS detections(
        id TEXT PRIMARY KEY,
        image_id TEXT NOT NULL REFERENCES images(id),
        model_id TEXT NOT NULL,
        created_at BIGINT NOT NULL,
        inference_ms REAL NOT NULL,
        wildfire_pct REAL NOT NULL,
        smoke_pct REAL NOT NULL,
        boxes_json TEXT NOT NULL
    )""",
    """CREATE TABLE IF NOT EXISTS risk_reports(
        id TEXT PRIMARY KEY,
        detection_id TEXT NOT NULL REFERENCES detections(id),
        severity TEXT NOT NULL,
        report_json TEXT NOT NULL,
        model TEXT NOT NULL
    )""",
    """CREATE TABLE IF NOT EXISTS judge_scores(
        id TEXT PRIMARY KEY,
        report_id TEXT NOT NULL REFERENCES risk_reports(id),
        judge_model TEXT NOT NULL,
        score INTEGER NOT NULL,
        rationale TEXT
    )""",
)


class SqlStore(WildfireStore):
    """Relational backend over a DB-API connection (sqlite3 in tests).

    The detections row also carries acquired-at/risk-report bookkeeping
    inside boxes_json so a HistoryRecord round-trips exactly.
    """

    def __init__(self, connection):
        self._conn = connection
        self._lock = threading.Lock()
        with self._lock:
            cur = self._conn.cursor()
            for ddl in DDL_STATEMENTS:
                cur.execute(ddl)
            self._conn.commit()

    def insert_image(self, record: ImageRecord) -> str:
        with self._lock:
            cur = self._conn.cursor()
            cur.execute("SELECT 1 FROM images WHERE id = ?", (record.id,))
            if cur.fetchone():
                raise DuplicateId(f"image {record.id!r} already stored")
            cur.execute(
                "INSERT INTO images(id, source, acquired_at, width, height,"
                " region_tag, pixel_ref) VALUES (?, ?, ?, ?, ?, ?, ?)",
                (
                    record.id,
                    record.source.value,
                    dt_to_ms(record.acquired_at),
                    record.width_px,
                    record.height_px,
                    record.region_tag,
                    record.pixel_ref,
                ),
            )
            self._conn.commit()
            return record.id

    def get_image(self, image_id: str) -> ImageRecord:
        with self._lock:
            cur = self._conn.cursor()
            cur.execute(
                "SELECT id, source, acquired_at, width, height, region_tag,"
                " pixel_ref FROM images WHERE id = ?",
                (image_id,),
            )
            row = cur.fetchone()
        if row is None:
            raise NotFound(f"image {image_id!r}")
        return ImageRecord(
            id=row[0],
            source=Source(row[1]),
            acquired_at=ms_to_dt(row[2]),
            width_px=row[3],
            height_px=row[4],
            pixel_ref=row[6],
            region_tag=row[5],
        )

    def insert_record(self, rec: HistoryRecord) -> str:
        with self._lock:
            cur = self._conn.cursor()
            cur.execute("SELECT 1 FROM detections WHERE id = ?", (rec.record_id,))
            if cur.fetchone():
                raise DuplicateId(f"record {rec.record_id!r} already stored")
            cur.execute("SELECT 1 FROM images WHERE id = ?", (rec.image_id,))
            if not cur.fetchone():
                raise ForeignKeyViolation(f"unknown image {rec.image_id!r}")
            payload = {
                "detections": [d.to_dict() for d in rec.detection.detections],
                "acquired_at_ms": dt_to_ms(rec.acquired_at),
                "region_tag": rec.region_tag,
                "risk_report_id": rec.risk_report_id,
            }
            cur.execute(
                "INSERT INTO detections(id, image_id, model_id, created_at,"
                " inference_ms, wildfire_pct, smoke_pct, boxes_json)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    rec.record_id,
                    rec.image_id,
                    rec.detection.model_id,
                    dt_to_ms(rec.created_at),
                    rec.detection.inference_ms,
                    rec.detection.coverage.wildfire_coverage_pct,
                    rec.detection.coverage.smoke_coverage_pct,
                    json.dumps(payload, sort_keys=True),
                ),
            )
            self._conn.commit()
            return rec.record_id

    def _row_to_record(self, row) -> HistoryRecord:
        payload = json.loads(row[7])
        result = DetectionResult.from_dict(
            {
                "image_id": row[1],
                "model_id": row[2],
                "detections": payload["detections"],
                "inference_ms": row[4],
                "coverage": {
                    "wildfire_coverage_pct": row[5],
                    "smoke_coverage_pct": row[6],
                },
            }
        )
        return HistoryRecord(
            record_id=row[0],
            image_id=row[1],
            acquired_at=ms_to_dt(payload["acquired_at_ms"]),
            region_tag=payload.get("region_tag"),
            detection=result,
            risk_report_id=payload.get("risk_report_id"),
            created_at=ms_to_dt(row[3]),
        )

    _RECORD_COLUMNS = (
        "id, image_id, model_id, created_at, inference_ms, wildfire_pct,"
        " smoke_pct, boxes_json"
    )

    def get_record(self, record_id: str) -> HistoryRecord:
        with self._lock:
            cur = self._conn.cursor()
            cur.execute(
                f"SELECT {self._RECORD_COLUMNS} FROM detections WHERE id = ?",
                (record_id,),
            )
            row = cur.fetchone()
        if row is None:
            raise NotFound(f"record {record_id!r}")
        return self._row_to_record(row)

    def insert_risk_report(
        self, report_id: str, detection_record_id: str, report: RiskReport
    ) -> str:
        with self._lock:
            cur = self._conn.cursor()
            cur.execute("SELECT 1 FROM risk_reports WHERE id = ?", (report_id,))
            if cur.fetchone():
                raise DuplicateId(f"report {report_id!r} already stored")
            cur.execute("SELECT 1 FROM detections WHERE id = ?", (detection_record_id,))
            if not cur.fetchone():
                raise ForeignKeyViolation(f"unknown record {detection_record_id!r}")
            cur.execute(
                "INSERT INTO risk_reports(id, detection_id, severity, report_json,"
                " model) VALUES (?, ?, ?, ?, ?)",
                (
                    report_id,
                    detection_record_id,
                    report.severity.value,
                    json.dumps(report.to_dict(), sort_keys=True),
                    report.source_model,
                ),
            )
            self._conn.commit()
            return report_id

    def get_risk_report(self, report_id: str) -> RiskReport:
        with self._lock:
            cur = self._conn.cursor()
            cur.execute(
                "SELECT report_json FROM risk_reports WHERE id = ?", (report_id,)
            )
            row = cur.fetchone()
        if row is None:
            raise NotFound(f"report {report_id!r}")
        return RiskReport.from_dict(json.loads(row[0]))

    def insert_judge_score(self, score_id: str, score: JudgeScore) -> str:
        with self._lock:
            cur = self._conn.cursor()
            cur.execute("SELECT 1 FROM judge_scores WHERE id = ?", (score_id,))
            if cur.fetchone():
                raise DuplicateId(f"score {score_id!r} already stored")
            cur.execute(
                "INSERT INTO judge_scores(id, report_id, judge_model, score,"
                " rationale) VALUES (?, ?, ?, ?, ?)",
                (
                    score_id,
                    score.report_id,
                    score.judge_model,
                    score.overall,
                    score.rationale,
                ),
            )
            self._conn.commit()
            return score_id

    def list_records(self) -> list[HistoryRecord]:
        with self._lock:
            cur = self._conn.cursor()
            cur.execute(f"SELECT {self._RECORD_COLUMNS} FROM detections")
            rows = cur.fetchall()
        return [self._row_to_record(r) for r in rows]


def open_store(target: str | Path) -> WildfireStore:
    """Open a store from a target spec.

    "sqlite:<path>" (or ":memory:") opens the relational backend; anything
    else is treated as an embedded-store directory.
    """
    target = str(target)
    if target.startswith("sqlite:"):
        import sqlite3

        path = target[len("sqlite:") :] or ":memory:"
        conn = sqlite3.connect(path, check_same_thread=False)
        return SqlStore(conn)
    return EmbeddedStore(target)
