"""Pipeline jobs: a FIFO queue with worker threads and a strict lifecycle.

Status moves only along Queued -> Running -> {Succeeded, Failed, Cancelled}
(plus Queued -> Cancelled). Cancellation of a running job takes effect at
the next pipeline stage boundary; cancelling a terminal job is a no-op.
"""
from __future__ import annotations

import threading
import uuid
from collections import deque
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Optional

from .errors import EngineError, JobError
from .pipeline import (
    DbConfig,
    PipelineConfig,
    PipelineResult,
    execute_pipeline,
    parse_db_config,
    parse_ml_config,
)


class JobStatus(str, Enum):
    QUEUED = "Queued"
    RUNNING = "Running"
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"
    CANCELLED = "Cancelled"


TERMINAL = (JobStatus.SUCCEEDED, JobStatus.FAILED, JobStatus.CANCELLED)

_LEGAL_TRANSITIONS = {
    JobStatus.QUEUED: {JobStatus.RUNNING, JobStatus.CANCELLED},
    JobStatus.RUNNING: {JobStatus.SUCCEEDED, JobStatus.FAILED, JobStatus.CANCELLED},
    JobStatus.SUCCEEDED: set(),
    JobStatus.FAILED: set(),
    JobStatus.CANCELLED: set(),
}


@dataclass(frozen=True)
class PipelineJob:
    id: str
    status: JobStatus
    submitted_at: str
    finished_at: Optional[str] = None
    result: Optional[PipelineResult] = None
    error: Optional[str] = None
    error_code: Optional[str] = None


class JobCancelled(Exception):
    pass


class JobNotFound(JobError):
    pass


class JobStateError(JobError):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class _JobState:
    __slots__ = ("snapshot", "configs", "cancel_event")

    def __init__(self, snapshot: PipelineJob, configs: tuple[PipelineConfig, DbConfig]):
        self.snapshot = snapshot
        self.configs = configs
        self.cancel_event = threading.Event()


class JobManager:
    """Owns job state; at most max_workers pipelines execute at once."""

    def __init__(self, engine, max_workers: int = 1, stage_hook: Optional[Callable] = None):
        self.engine = engine
        self.stage_hook = stage_hook  # test seam: called as (job_id, stage)
        self._lock = threading.Lock()
        self._wakeup = threading.Condition(self._lock)
        self._jobs: dict[str, _JobState] = {}
        self._queue: deque[str] = deque()
        self._shutdown = False
        self._workers = [
            threading.Thread(target=self._worker_loop, daemon=True, name=f"pipeline-worker-{i}")
            for i in range(max(1, max_workers))
        ]
        for worker in self._workers:
            worker.start()

    # public API

    def submit(self, ml_config_xml: str, db_config_xml: str) -> PipelineJob:
        """Parse both configs (errors surface synchronously) and enqueue."""
        cfg = parse_ml_config(ml_config_xml)
        db = parse_db_config(db_config_xml)
        job_id = uuid.uuid4().hex
        snapshot = PipelineJob(id=job_id, status=JobStatus.QUEUED, submitted_at=_now())
        state = _JobState(snapshot, (cfg, db))
        with self._wakeup:
            self._jobs[job_id] = state
            self._queue.append(job_id)
            self._wakeup.notify()
        return snapshot

    def get(self, job_id: str) -> PipelineJob:
        with self._lock:
            state = self._jobs.get(job_id)
            if state is None:
                raise JobNotFound(f"unknown job {job_id!r}")
            return state.snapshot

    def list_jobs(self) -> list[PipelineJob]:
        with self._lock:
            return sorted(
                (state.snapshot for state in self._jobs.values()),
                key=lambda job: job.submitted_at,
            )

    def cancel(self, job_id: str) -> PipelineJob:
        """Cancel a queued or running job; terminal jobs are left unchanged."""
        with self._lock:
            state = self._jobs.get(job_id)
            if state is None:
                raise JobNotFound(f"unknown job {job_id!r}")
            if state.snapshot.status is JobStatus.QUEUED:
                self._transition(state, JobStatus.CANCELLED, finished=True)
            elif state.snapshot.status is JobStatus.RUNNING:
                state.cancel_event.set()
            return state.snapshot

    def export_csv(self, job_id: str) -> str:
        from .export import relation_to_csv

        job = self.get(job_id)
        if job.status is not JobStatus.SUCCEEDED:
            raise JobStateError(f"job {job_id!r} is {job.status.value}, not Succeeded")
        return relation_to_csv(job.result.result)

    def shutdown(self) -> None:
        with self._wakeup:
            self._shutdown = True
            self._wakeup.notify_all()

    # internals

    def _transition(self, state: _JobState, status: JobStatus, finished: bool = False, **fields) -> None:
        current = state.snapshot.status
        if status not in _LEGAL_TRANSITIONS[current]:
            raise JobStateError(f"illegal transition {current.value} -> {status.value}")
        if finished:
            fields.setdefault("finished_at", _now())
        state.snapshot = replace(state.snapshot, status=status, **fields)

    def _worker_loop(self) -> None:
        while True:
            with self._wakeup:
                while not self._queue and not self._shutdown:
                    self._wakeup.wait()
                if self._shutdown:
                    return
                job_id = self._queue.popleft()
                state = self._jobs[job_id]
                if state.snapshot.status is not JobStatus.QUEUED:
                    continue  # cancelled while queued
                self._transition(state, JobStatus.RUNNING)
            self._run_job(job_id, state)

    def _run_job(self, job_id: str, state: _JobState) -> None:
        cfg, db = state.configs

        def stage_callback(stage: str) -> None:
            if self.stage_hook is not None:
                self.stage_hook(job_id, stage)
            if state.cancel_event.is_set():
                raise JobCancelled()

        try:
            result = execute_pipeline(cfg, db, self.engine, stage_callback=stage_callback)
        except JobCancelled:
            with self._lock:
                self._transition(state, JobStatus.CANCELLED, finished=True)
            return
        except EngineError as exc:
            with self._lock:
                self._transition(
                    state, JobStatus.FAILED, finished=True, error=exc.message, error_code=exc.code
                )
            return
        except Exception as exc:  # noqa: BLE001 - jobs must never kill the worker
            with self._lock:
                self._transition(
                    state, JobStatus.FAILED, finished=True, error=str(exc), error_code="internal"
                )
            return
        with self._lock:
            if state.cancel_event.is_set():
                # Cancelled after the last stage boundary: honor the cancel.
                self._transition(state, JobStatus.CANCELLED, finished=True)
            else:
                self._transition(state, JobStatus.SUCCEEDED, finished=True, result=result)
