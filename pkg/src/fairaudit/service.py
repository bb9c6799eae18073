"""HTTP API for transcript submission, audit status, leaderboard, and plots.

One background worker drains a FIFO queue of submitted audits, so GETs never
block on a running audit and the store sees one writer. The job table lives
in memory and restarts empty; completed audits are durable in the store.
"""

from __future__ import annotations

import csv
import io
import queue
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, File, Form, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .corpus import DEMOGRAPHIC_ATTRIBUTES, Corpus
from .errors import FairauditError
from .fairness import AuditConfig, audit_to_dict, run_audit
from .store import AuditStore, MODEL_ID_PATTERN, validate_model_id

HISTOGRAM_BIN_WIDTH = 0.05
HISTOGRAM_RANGE = (0.0, 2.0)


@dataclass(frozen=True)
class ServiceConfig:
    max_upload_bytes: int = 10 * 1024 * 1024
    queue_depth: int = 16
    audit: AuditConfig = field(default_factory=AuditConfig)


@dataclass
class SubmissionJob:
    job_id: str
    model_id: str
    state: str = "queued"  # queued -> running -> done | failed
    error: str | None = None
    error_kind: str | None = None
    result_ref: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "model_id": self.model_id,
            "state": self.state,
            "error": self.error,
            "error_kind": self.error_kind,
            "result_ref": self.result_ref,
        }


class ServiceState:
    def __init__(self, corpus: Corpus | None, store: AuditStore, config: ServiceConfig):
        self.corpus = corpus
        self.store = store
        self.config = config
        self.jobs: dict[str, SubmissionJob] = {}
        self.lock = threading.Lock()
        self.queue: queue.Queue = queue.Queue()
        self.worker: threading.Thread | None = None

    def queued_count(self) -> int:
        with self.lock:
            return sum(1 for j in self.jobs.values() if j.state == "queued")

    def start_worker(self) -> None:
        if self.worker is None or not self.worker.is_alive():
            self.worker = threading.Thread(target=self._work_loop, daemon=True)
            self.worker.start()

    def stop_worker(self) -> None:
        if self.worker is not None and self.worker.is_alive():
            self.queue.put(None)
            self.worker.join(timeout=30)

    def _work_loop(self) -> None:
        while True:
            item = self.queue.get()
            if item is None:
                return
            job_id, transcripts = item
            with self.lock:
                job = self.jobs[job_id]
                job.state = "running"
            try:
                result = run_audit(self.corpus, transcripts, job.model_id, self.config.audit)
                self.store.save_audit(audit_to_dict(result))
            except Exception as exc:
                with self.lock:
                    job.state = "failed"
                    job.error = str(exc)
                    job.error_kind = type(exc).__name__
            else:
                with self.lock:
                    job.state = "done"
                    job.result_ref = job.model_id


def _parse_transcript_csv(payload: bytes) -> dict[str, str]:
    """Strict parse of an uploaded `utterance_id,hypothesis` CSV."""
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"transcript CSV is not UTF-8: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"utterance_id", "hypothesis"} <= set(reader.fieldnames):
        raise ValueError("transcript CSV needs utterance_id and hypothesis columns")
    transcripts = {}
    for row in reader:
        utterance_id = (row.get("utterance_id") or "").strip()
        if not utterance_id:
            raise ValueError(f"line {reader.line_num}: empty utterance_id")
        transcripts[utterance_id] = row.get("hypothesis") or ""
    if not transcripts:
        raise ValueError("transcript CSV has no rows")
    return transcripts


def _five_number_summary(values: np.ndarray) -> dict:
    # Quartile convention: linear interpolation between closest ranks (inclusive).
    q = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
    return {
        "min": float(q[0]),
        "q1": float(q[1]),
        "median": float(q[2]),
        "q3": float(q[3]),
        "max": float(q[4]),
    }


def _histogram(values: np.ndarray) -> dict:
    lo, hi = HISTOGRAM_RANGE
    n_bins = int(round((hi - lo) / HISTOGRAM_BIN_WIDTH))
    idx = np.floor((values - lo) / HISTOGRAM_BIN_WIDTH).astype(int)
    overflow = int(np.sum(values >= hi))
    in_range = idx[(values >= lo) & (values < hi)]
    counts = np.bincount(in_range, minlength=n_bins)[:n_bins]
    return {
        "bin_width": HISTOGRAM_BIN_WIDTH,
        "range": [lo, hi],
        "counts": [int(c) for c in counts],
        "overflow": overflow,
    }


def build_plot_summary(doc: dict, corpus: Corpus) -> dict:
    """Plot-ready box/histogram summaries from an audit's per-utterance detail."""
    per_utterance = doc["per_utterance"]
    wers = {row["utterance_id"]: row["wer"] for row in per_utterance}
    all_values = np.array(list(wers.values()))
    by_id = corpus.by_id()

    attributes: dict[str, dict] = {}
    for attribute in DEMOGRAPHIC_ATTRIBUTES:
        level_values: dict[str, list[float]] = {}
        for utterance_id, w in wers.items():
            record = by_id.get(utterance_id)
            if record is None:
                continue
            level = record.profile.level(attribute)
            level_values.setdefault(level, []).append(w)
        attributes[attribute] = {
            "levels": {
                level: {
                    "count": len(vals),
                    "box": _five_number_summary(np.array(vals)),
                    "histogram": _histogram(np.array(vals)),
                }
                for level, vals in sorted(level_values.items())
            }
        }

    return {
        "model_id": doc["model_id"],
        "histogram": _histogram(all_values),
        "attributes": attributes,
    }


def create_app(
    corpus: Corpus | None,
    store: AuditStore,
    config: ServiceConfig = ServiceConfig(),
    start_worker: bool = True,
) -> FastAPI:
    state = ServiceState(corpus, store, config)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        if start_worker:
            state.start_worker()
        yield
        state.stop_worker()

    app = FastAPI(title="fairaudit", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.service = state

    @app.post("/api/submit", status_code=202)
    async def submit(model_id: str = Form(...), transcripts: UploadFile = File(...)):
        if state.corpus is None:
            return JSONResponse({"error": "reference corpus not loaded"}, status_code=503)
        if not MODEL_ID_PATTERN.match(model_id):
            return JSONResponse({"error": f"invalid model_id {model_id!r}"}, status_code=400)
        try:
            validate_model_id(model_id)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        payload = await transcripts.read()
        if len(payload) > state.config.max_upload_bytes:
            return JSONResponse(
                {"error": f"payload exceeds {state.config.max_upload_bytes} bytes"},
                status_code=413,
            )
        try:
            parsed = _parse_transcript_csv(payload)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        if state.queued_count() >= state.config.queue_depth:
            return JSONResponse({"error": "submission queue is full"}, status_code=429)
        job = SubmissionJob(job_id=uuid.uuid4().hex, model_id=model_id)
        with state.lock:
            state.jobs[job.job_id] = job
        state.queue.put((job.job_id, parsed))
        return {"job_id": job.job_id}

    @app.get("/api/status/{job_id}")
    def status(job_id: str):
        with state.lock:
            job = state.jobs.get(job_id)
            if job is None:
                return JSONResponse({"error": "unknown job"}, status_code=404)
            return job.to_dict()

    @app.get("/api/leaderboard")
    def leaderboard(request: Request):
        etag = state.store.etag()
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        entries = [e.to_dict() for e in state.store.list_leaderboard()]
        return JSONResponse(entries, headers={"ETag": etag})

    @app.get("/api/result/{model_id:path}")
    def result(model_id: str):
        try:
            return state.store.get_audit(model_id)
        except FairauditError:
            return JSONResponse({"error": f"no audit for {model_id!r}"}, status_code=404)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=404)

    @app.get("/api/plots/{model_id:path}")
    def plots(model_id: str):
        try:
            doc = state.store.get_audit(model_id)
        except FairauditError:
            return JSONResponse({"error": f"no audit for {model_id!r}"}, status_code=404)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=404)
        if "per_utterance" not in doc:
            return JSONResponse(
                {"error": "audit was stored without per-utterance detail"},
                status_code=409,
            )
        if state.corpus is None:
            return JSONResponse({"error": "reference corpus not loaded"}, status_code=503)
        return build_plot_summary(doc, state.corpus)

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "corpus_loaded": state.corpus is not None,
            "queue_depth": state.queued_count(),
        }

    return app
