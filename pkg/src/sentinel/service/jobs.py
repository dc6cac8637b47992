"""Bounded job queue with a fixed worker pool.

Submission is non-blocking: jobs enter a bounded queue and return
immediately; workers pull them off and run the supplied callable. State
only ever moves queued -> running -> done|failed, and terminal states are
immutable.
"""
from __future__ import annotations

import dataclasses
import queue
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Callable


class JobError(Exception):
    pass


class QueueFull(JobError):
    """Backpressure: the pending-job queue is at capacity."""


class JobNotFound(JobError):
    pass


class IllegalTransition(JobError):
    pass


class JobKind(str, Enum):
    DETECT = "detect"
    ASSESS = "assess"
    EVALUATE = "evaluate"
    JUDGE_RUN = "judge_run"


class JobState(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


_ALLOWED = {
    (JobState.QUEUED, JobState.RUNNING),
    (JobState.RUNNING, JobState.DONE),
    (JobState.RUNNING, JobState.FAILED),
}

TERMINAL_STATES = {JobState.DONE, JobState.FAILED}


@dataclass
class Job:
    job_id: str
    kind: JobKind
    state: JobState
    submitted_at: datetime
    finished_at: datetime | None = None
    result_ref: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind.value,
            "state": self.state.value,
            "submitted_at": self.submitted_at.isoformat(),
            "finished_at": self.finished_at.isoformat() if self.finished_at else None,
            "result_ref": self.result_ref,
            "error": self.error,
        }


class JobQueue:
    """Thread-pool executor with job bookkeeping and backpressure."""

    def __init__(self, workers: int = 4, queue_size: int = 256):
        self._jobs: dict[str, Job] = {}
        self._pending: queue.Queue = queue.Queue(maxsize=queue_size)
        self._lock = threading.Lock()
        self._terminal = threading.Condition(self._lock)
        self._running_now = 0
        self._high_water = 0
        self._workers = [
            threading.Thread(target=self._worker_loop, daemon=True, name=f"job-worker-{i}")
            for i in range(max(workers, 1))
        ]
        for t in self._workers:
            t.start()

    # ---- state machine ----

    def _transition(self, job: Job, new_state: JobState) -> None:
        if (job.state, new_state) not in _ALLOWED:
            raise IllegalTransition(f"{job.state.value} -> {new_state.value}")
        job.state = new_state
        if new_state in TERMINAL_STATES:
            job.finished_at = datetime.now(timezone.utc)
            self._terminal.notify_all()

    # ---- public API ----

    def submit(self, kind: JobKind, fn: Callable[[], str]) -> Job:
        """Queue fn for execution; returns the queued Job immediately.

        fn must return a result reference string; raising marks the job
        failed with the exception text.
        """
        job = Job(
            job_id=uuid.uuid4().hex,
            kind=kind,
            state=JobState.QUEUED,
            submitted_at=datetime.now(timezone.utc),
        )
        with self._lock:
            self._jobs[job.job_id] = job
        try:
            self._pending.put_nowait((job.job_id, fn))
        except queue.Full:
            with self._lock:
                del self._jobs[job.job_id]
            raise QueueFull(f"queue at capacity ({self._pending.maxsize})") from None
        return self.get(job.job_id)

    def get(self, job_id: str) -> Job:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise JobNotFound(job_id)
            return dataclasses.replace(job)

    def wait(self, job_id: str, timeout: float = 30.0) -> Job:
        """Block until the job is terminal (or timeout); returns a snapshot."""
        with self._terminal:
            job = self._jobs.get(job_id)
            if job is None:
                raise JobNotFound(job_id)
            self._terminal.wait_for(
                lambda: self._jobs[job_id].state in TERMINAL_STATES, timeout=timeout
            )
            return dataclasses.replace(self._jobs[job_id])

    def counts(self) -> dict[str, int]:
        with self._lock:
            out = {s.value: 0 for s in JobState}
            for job in self._jobs.values():
                out[job.state.value] += 1
            return out

    @property
    def high_water(self) -> int:
        """Peak number of simultaneously running jobs since startup."""
        with self._lock:
            return self._high_water

    def shutdown(self, timeout: float = 5.0) -> None:
        for _ in self._workers:
            self._pending.put((None, None))
        for t in self._workers:
            t.join(timeout=timeout)

    # ---- worker ----

    def _worker_loop(self) -> None:
        while True:
            job_id, fn = self._pending.get()
            if job_id is None:
                return
            with self._lock:
                job = self._jobs[job_id]
                self._transition(job, JobState.RUNNING)
                self._running_now += 1
                self._high_water = max(self._high_water, self._running_now)
            try:
                result_ref = fn()
            except Exception as exc:  # job failures must not kill the worker
                with self._lock:
                    job.error = f"{type(exc).__name__}: {exc}"
                    self._running_now -= 1
                    self._transition(job, JobState.FAILED)
            else:
                with self._lock:
                    job.result_ref = result_ref
                    self._running_now -= 1
                    self._transition(job, JobState.DONE)
