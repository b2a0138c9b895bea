import random
import threading
import time

import pytest

from polyquery.errors import ConfigError
from polyquery.jobs import JobManager, JobNotFound, JobStateError, JobStatus

ML_XML = """
<configuration>
  <input><database><sql>SELECT trip_id, fare, duration FROM trips WHERE fare > 0</sql></database></input>
  <parameter><value>2</value></parameter>
  <algorithm>KMeans</algorithm>
  <primary_sql>SELECT * FROM trips WHERE fare &lt; 0</primary_sql>
</configuration>
"""
NO_ML_XML = ML_XML.replace("SELECT * FROM trips WHERE fare &lt; 0", "SELECT * FROM trips")
DB_XML = "<database><url>local:.</url><user>u</user><password></password></database>"


def wait_terminal(jobs, job_id, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = jobs.get(job_id)
        if job.status in (JobStatus.SUCCEEDED, JobStatus.FAILED, JobStatus.CANCELLED):
            return job
        time.sleep(0.01)
    raise AssertionError(f"job {job_id} never finished: {jobs.get(job_id).status}")


class TestLifecycle:
    def test_submit_succeeds_eventually(self, trips_engine):
        jobs = JobManager(trips_engine, max_workers=2)
        job = jobs.submit(ML_XML, DB_XML)
        assert job.status is JobStatus.QUEUED
        done = wait_terminal(jobs, job.id)
        assert done.status is JobStatus.SUCCEEDED
        assert done.result is not None
        assert done.finished_at is not None

    def test_malformed_config_fails_synchronously(self, trips_engine):
        jobs = JobManager(trips_engine)
        with pytest.raises(ConfigError):
            jobs.submit("<configuration><input>", DB_XML)

    def test_distinct_ids(self, trips_engine):
        jobs = JobManager(trips_engine)
        a = jobs.submit(ML_XML, DB_XML)
        b = jobs.submit(ML_XML, DB_XML)
        assert a.id != b.id

    def test_unknown_id(self, trips_engine):
        jobs = JobManager(trips_engine)
        with pytest.raises(JobNotFound):
            jobs.get("missing")
        with pytest.raises(JobNotFound):
            jobs.cancel("missing")

    def test_failed_job_reports_error(self, trips_engine):
        jobs = JobManager(trips_engine)
        bad = ML_XML.replace("KMeans", "NoSuchAlgo")
        job = jobs.submit(bad, DB_XML)
        done = wait_terminal(jobs, job.id)
        assert done.status is JobStatus.FAILED
        assert "NoSuchAlgo" in done.error
        assert done.result is None

    def test_result_present_iff_succeeded(self, trips_engine):
        jobs = JobManager(trips_engine)
        ok = wait_terminal(jobs, jobs.submit(NO_ML_XML, DB_XML).id)
        bad = wait_terminal(jobs, jobs.submit(ML_XML.replace("KMeans", "Nope"), DB_XML).id)
        assert (ok.result is not None) == (ok.status is JobStatus.SUCCEEDED)
        assert (bad.result is not None) == (bad.status is JobStatus.SUCCEEDED)


class TestCancel:
    def test_cancel_queued_job(self, trips_engine):
        blocker = threading.Event()

        def hook(job_id, stage):
            blocker.wait(5.0)

        jobs = JobManager(trips_engine, max_workers=1, stage_hook=hook)
        first = jobs.submit(ML_XML, DB_XML)  # occupies the single worker
        second = jobs.submit(ML_XML, DB_XML)  # stays queued
        cancelled = jobs.cancel(second.id)
        assert cancelled.status is JobStatus.CANCELLED
        blocker.set()
        wait_terminal(jobs, first.id)
        assert jobs.get(second.id).status is JobStatus.CANCELLED

    def test_cancel_running_job_at_stage_boundary(self, trips_engine):
        entered_ml = threading.Event()
        release = threading.Event()

        def hook(job_id, stage):
            if stage == "ml":
                entered_ml.set()
                release.wait(5.0)

        jobs = JobManager(trips_engine, max_workers=1, stage_hook=hook)
        job = jobs.submit(ML_XML, DB_XML)
        assert entered_ml.wait(5.0)
        assert jobs.get(job.id).status is JobStatus.RUNNING
        jobs.cancel(job.id)
        release.set()
        done = wait_terminal(jobs, job.id)
        assert done.status is JobStatus.CANCELLED
        assert done.result is None

    def test_cancel_succeeded_is_idempotent(self, trips_engine):
        jobs = JobManager(trips_engine)
        job = jobs.submit(NO_ML_XML, DB_XML)
        wait_terminal(jobs, job.id)
        once = jobs.cancel(job.id)
        twice = jobs.cancel(job.id)
        assert once.status is JobStatus.SUCCEEDED
        assert twice.status is JobStatus.SUCCEEDED

    def test_cancel_twice_same_state(self, trips_engine):
        jobs = JobManager(trips_engine, max_workers=1, stage_hook=lambda j, s: time.sleep(0.05))
        job = jobs.submit(ML_XML, DB_XML)
        jobs.cancel(job.id)
        first = jobs.get(job.id).status
        jobs.cancel(job.id)
        done = wait_terminal(jobs, job.id)
        assert done.status is JobStatus.CANCELLED


class TestExportCsv:
    def test_export_succeeded(self, trips_engine):
        jobs = JobManager(trips_engine)
        job = jobs.submit(NO_ML_XML, DB_XML)
        wait_terminal(jobs, job.id)
        text = jobs.export_csv(job.id)
        lines = text.split("\r\n")
        assert lines[0] == "trip_id,city,fare,duration"
        assert len([l for l in lines if l]) == 6  # header + 5 rows
        assert ",," in text or ",\r\n" not in text  # NULL fare renders empty

    def test_export_is_byte_identical(self, trips_engine):
        jobs = JobManager(trips_engine)
        job = jobs.submit(NO_ML_XML, DB_XML)
        wait_terminal(jobs, job.id)
        assert jobs.export_csv(job.id) == jobs.export_csv(job.id)

    def test_export_requires_success(self, trips_engine):
        jobs = JobManager(trips_engine)
        job = jobs.submit(ML_XML.replace("KMeans", "Nope"), DB_XML)
        wait_terminal(jobs, job.id)
        with pytest.raises(JobStateError):
            jobs.export_csv(job.id)


class TestStateMachineStress:
    def test_randomized_interleaving_never_sees_illegal_transition(self, trips_engine):
        order = [JobStatus.QUEUED, JobStatus.RUNNING, JobStatus.SUCCEEDED,
                 JobStatus.FAILED, JobStatus.CANCELLED]
        rank = {s: i for i, s in enumerate(order)}
        jobs = JobManager(trips_engine, max_workers=3)
        rng = random.Random(2024)
        ids = []
        histories = {}
        lock = threading.Lock()
        stop = threading.Event()

        def poller():
            while not stop.is_set():
                with lock:
                    snapshot = list(ids)
                for job_id in snapshot:
                    status = jobs.get(job_id).status
                    histories[job_id].append(status)
                time.sleep(0.001)

        threads = [threading.Thread(target=poller) for _ in range(3)]
        for t in threads:
            t.start()
        for i in range(20):
            xml = ML_XML if rng.random() < 0.5 else NO_ML_XML
            job = jobs.submit(xml, DB_XML)
            with lock:
                ids.append(job.id)
                histories.setdefault(job.id, [])
            if rng.random() < 0.4:
                jobs.cancel(rng.choice(ids))
            time.sleep(rng.random() * 0.01)
        for job_id in ids:
            wait_terminal(jobs, job_id)
        stop.set()
        for t in threads:
            t.join()

        terminal = {JobStatus.SUCCEEDED, JobStatus.FAILED, JobStatus.CANCELLED}
        for job_id, seen in histories.items():
            seen = seen + [jobs.get(job_id).status]
            for a, b in zip(seen, seen[1:]):
                if a == b:
                    continue
                assert a not in terminal, f"{job_id}: left terminal state {a} -> {b}"
                assert rank[b] > rank[a] or (a is JobStatus.QUEUED and b is JobStatus.CANCELLED)
