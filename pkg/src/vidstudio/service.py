"""HTTP service and job machinery orchestrating the sentence-to-video flow.

Sessions live in a single sqlite file under the data root; jobs are in-memory
with an append-only JSONL write-ahead record for crash visibility. Every
response body is JSON except the video downloads; errors always carry
{"error": code, "message": text}.
"""

from __future__ import annotations

import base64
import json
import queue
import sqlite3
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from . import kwx
from .catalog import Catalog
from .errors import (
    AdapterUnavailable,
    DecodeError,
    NotFound,
    StudioError,
)
from .media import (
    DEFAULT_FPS,
    build_manifest,
    compose,
)

JOB_STATES = ("queued", "running", "done", "failed")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class Job:
    job_id: str
    session_id: str
    state: str = "queued"
    progress: float = 0.0
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "session_id": self.session_id,
            "state": self.state,
            "progress": self.progress,
            "error": self.error,
        }


@dataclass
class StudioContext:
    data_root: Path
    catalog: Catalog
    asr: kwx.AsrAdapter | None = None
    muxer: str = "auto"
    max_terms: int = 8
    fps: int = DEFAULT_FPS
    workers: int = 1


class SessionStore:
    """Sessions as JSON blobs in one sqlite file; one lock per session id."""

    def __init__(self, path: Path):
        self.path = path
        self._db_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        with self._connect() as conn:
            conn.execute(
                "CREATE TABLE IF NOT EXISTS sessions (id TEXT PRIMARY KEY, data TEXT)"
            )

    def _connect(self) -> sqlite3.Connection:
        return sqlite3.connect(self.path, check_same_thread=False)

    def lock(self, session_id: str) -> threading.Lock:
        with self._db_lock:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def put(self, session: dict) -> None:
        with self._db_lock, self._connect() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO sessions (id, data) VALUES (?, ?)",
                (session["session_id"], json.dumps(session)),
            )

    def get(self, session_id: str) -> dict:
        with self._db_lock, self._connect() as conn:
            row = conn.execute(
                "SELECT data FROM sessions WHERE id = ?", (session_id,)
            ).fetchone()
        if row is None:
            raise ApiError(404, "session_not_found", f"no session {session_id}")
        return json.loads(row[0])


class JobQueue:
    """FIFO queue with worker threads; transitions are monotone and logged."""

    def __init__(self, ctx: StudioContext, store: SessionStore):
        self.ctx = ctx
        self.store = store
        self.jobs: dict[str, Job] = {}
        self._jobs_lock = threading.Lock()
        self._queue: queue.Queue[str] = queue.Queue()
        self._log_path = ctx.data_root / "jobs.log"
        self._workers_started = False

    def _start_workers(self) -> None:
        if self._workers_started:
            return
        self._workers_started = True
        for i in range(max(1, self.ctx.workers)):
            thread = threading.Thread(
                target=self._worker, name=f"compose-worker-{i}", daemon=True
            )
            thread.start()

    def _record(self, job: Job) -> None:
        entry = dict(job.to_dict(), ts=time.time())
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry) + "\n")

    def _set(self, job: Job, state: str, progress: float, error: str | None = None) -> None:
        # queued -> running -> {done, failed}; progress never decreases.
        assert JOB_STATES.index(state) >= JOB_STATES.index(job.state)
        job.state = state
        job.progress = max(job.progress, progress)
        if error is not None:
            job.error = error
        self._record(job)

    def enqueue(self, session_id: str) -> Job:
        self._start_workers()
        job = Job(job_id=uuid.uuid4().hex[:12], session_id=session_id)
        with self._jobs_lock:
            self.jobs[job.job_id] = job
        self._record(job)
        self._queue.put(job.job_id)
        return job

    def get(self, job_id: str) -> Job:
        with self._jobs_lock:
            job = self.jobs.get(job_id)
        if job is None:
            raise ApiError(404, "job_not_found", f"no job {job_id}")
        return job

    def _worker(self) -> None:
        while True:
            job_id = self._queue.get()
            job = self.get(job_id)
            try:
                self._run(job)
            except Exception as exc:  # surface every failure on the job
                self._set(job, "failed", job.progress, error=str(exc))
                self._finish_session(job, success=False)
            finally:
                self._queue.task_done()

    def _run(self, job: Job) -> None:
        self._set(job, "running", 0.05)
        session = self.store.get(job.session_id)
        terms = _terms_from_rows(session["terms"] or [])
        selections = {t: ids for t, ids in session["selections"].items() if ids}
        manifest = build_manifest(
            terms, selections, self.ctx.catalog, fps=self.ctx.fps
        )
        self._set(job, "running", 0.3)
        out_dir = self.ctx.data_root / "sessions" / job.session_id / "out"
        result = compose(manifest, self.ctx.catalog, out_dir, muxer=self.ctx.muxer)
        self._set(job, "running", 0.9)
        with self.store.lock(job.session_id):
            session = self.store.get(job.session_id)
            session["outputs"] = {
                "silent": str(result.silent_path),
                "final": str(result.final_path) if result.final_path else None,
                "bundle": str(result.bundle_dir) if result.bundle_dir else None,
            }
            session["active_job"] = None
            self.store.put(session)
        self._set(job, "done", 1.0)

    def _finish_session(self, job: Job, success: bool) -> None:
        with self.store.lock(job.session_id):
            session = self.store.get(job.session_id)
            session["active_job"] = None
            self.store.put(session)


def _terms_from_rows(rows: list[dict]) -> kwx.TermList:
    return kwx.TermList(
        terms=tuple(
            kwx.Term(term=r["term"], score=r["score"], rank=r["rank"]) for r in rows
        )
    )


def _session_view(session: dict) -> dict:
    view = dict(session)
    view["outputs"] = {
        "silent": bool(session["outputs"].get("silent")),
        "final": bool(session["outputs"].get("final")),
    }
    return view


def _data_url(mime: str, payload: bytes) -> str:
    return f"data:{mime};base64," + base64.b64encode(payload).decode("ascii")


def create_app(ctx: StudioContext) -> FastAPI:
    ctx.data_root.mkdir(parents=True, exist_ok=True)
    store = SessionStore(ctx.data_root / "sessions.sqlite")
    jobs = JobQueue(ctx, store)
    app = FastAPI(title="vidstudio", version="0.1.0")
    app.state.store = store
    app.state.jobs = jobs
    app.state.ctx = ctx

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": exc.code, "message": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"error": "validation_error", "message": str(exc.errors())},
        )

    @app.exception_handler(StudioError)
    async def _studio_error(_req: Request, exc: StudioError):
        return JSONResponse(
            status_code=500,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.post("/api/sessions")
    async def create_session(body: dict):
        text = body.get("text")
        audio_ref = body.get("audio_ref")
        if (text is None) == (audio_ref is None):
            raise ApiError(
                422, "bad_input", "provide exactly one of 'text' or 'audio_ref'"
            )
        if text is not None:
            if not text.strip():
                raise ApiError(422, "bad_input", "text must be non-empty")
            normalized = kwx.normalize_text(text)
        else:
            # audio_ref is either a data:audio/wav URI (mic capture shipped
            # inline) or a server-visible WAV path.
            if audio_ref.startswith("data:audio/wav;base64,"):
                audio = base64.b64decode(audio_ref.split(",", 1)[1])
            else:
                audio_path = Path(audio_ref)
                if not audio_path.is_absolute():
                    audio_path = ctx.data_root / audio_path
                if not audio_path.exists():
                    raise ApiError(422, "bad_input", f"audio_ref {audio_ref} not found")
                audio = audio_path.read_bytes()
            try:
                normalized = kwx.transcribe(audio, ctx.asr)
            except AdapterUnavailable as exc:
                raise ApiError(503, "asr_unavailable", str(exc))
            except DecodeError as exc:
                raise ApiError(422, "bad_audio", str(exc))
        session = {
            "session_id": uuid.uuid4().hex[:12],
            "text": {
                "original": normalized.original,
                "tokens": list(normalized.tokens),
                "source": normalized.source,
            },
            "terms": None,
            "selections": {},
            "active_job": None,
            "outputs": {"silent": None, "final": None, "bundle": None},
            "created_at": time.time(),
        }
        store.put(session)
        return _session_view(session)

    @app.post("/api/sessions/{session_id}/terms")
    async def extract_terms_endpoint(session_id: str):
        with store.lock(session_id):
            session = store.get(session_id)
            normalized = kwx.NormalizedText(
                original=session["text"]["original"],
                tokens=tuple(session["text"]["tokens"]),
                source=session["text"]["source"],
            )
            term_list = kwx.extract_terms(normalized, ctx.max_terms)
            rows = []
            for term in term_list.terms:
                candidates = ctx.catalog.rank_candidates(term.term)
                try:
                    clip = ctx.catalog.get_audio(term.term)
                    audio = {
                        "asset_id": clip.asset_id,
                        "duration": clip.duration,
                        "data_url": _data_url("audio/wav", clip.bytes),
                    }
                except NotFound:
                    audio = None
                rows.append(
                    {
                        "term": term.term,
                        "score": term.score,
                        "rank": term.rank,
                        "audio": audio,
                        "images": [
                            {
                                "asset_id": a.asset_id,
                                "width": a.width,
                                "height": a.height,
                                "origin": a.origin,
                                "data_url": _data_url("image/png", a.bytes),
                            }
                            for a in candidates
                        ],
                    }
                )
            session["terms"] = [
                {"term": t.term, "score": t.score, "rank": t.rank}
                for t in term_list.terms
            ]
            session["candidates"] = {
                row["term"]: [img["asset_id"] for img in row["images"]]
                for row in rows
            }
            store.put(session)
        return {"rows": rows}

    @app.put("/api/sessions/{session_id}/terms/{term}/selection")
    async def select_images(session_id: str, term: str, body: dict):
        asset_ids = body.get("asset_ids")
        if not isinstance(asset_ids, list):
            raise ApiError(422, "bad_input", "'asset_ids' must be a list")
        with store.lock(session_id):
            session = store.get(session_id)
            known = [row["term"] for row in (session["terms"] or [])]
            if term not in known:
                raise ApiError(404, "term_not_found", f"term {term!r} not extracted")
            candidates = session.get("candidates", {}).get(term, [])
            unknown = [a for a in asset_ids if a not in candidates]
            if unknown:
                raise ApiError(
                    422, "unknown_asset", f"not candidates for {term!r}: {unknown}"
                )
            if asset_ids:
                session["selections"][term] = list(asset_ids)
            else:
                session["selections"].pop(term, None)
            store.put(session)
            return _session_view(session)

    @app.post("/api/sessions/{session_id}/video")
    async def compose_video(session_id: str):
        with store.lock(session_id):
            session = store.get(session_id)
            if session["active_job"]:
                raise ApiError(409, "job_active", "a compose job is already running")
            if not any(session["selections"].values()):
                raise ApiError(422, "no_selection", "no term has selected images")
            job = jobs.enqueue(session_id)
            session["active_job"] = job.job_id
            store.put(session)
        return {"job_id": job.job_id}

    @app.get("/api/jobs/{job_id}")
    async def job_status(job_id: str):
        return jobs.get(job_id).to_dict()

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str):
        return _session_view(store.get(session_id))

    @app.get("/api/sessions/{session_id}/video")
    async def download(session_id: str, kind: str = "final"):
        if kind not in ("silent", "final"):
            raise ApiError(422, "bad_kind", "kind must be 'silent' or 'final'")
        session = store.get(session_id)
        path = session["outputs"].get(kind)
        if not path or not Path(path).exists():
            raise ApiError(404, "not_produced", f"no {kind} video for this session")
        data = Path(path).read_bytes()
        mime = "video/mp4" if path.endswith(".mp4") else "video/x-msvideo"
        return Response(content=data, media_type=mime)

    return app
