"""HTTP service: tasks, submissions, streamed feedback, video bytes, stats.

Feedback is delivered as server-sent events: ``token`` events carry text
deltas (the footnote definitions arrive as the final token batch), one
``citations`` event carries the resolved sources with service-relative video
URLs, and one ``done`` event carries the latency metrics and the mode that
was actually used. Mid-stream failures produce a terminal ``error`` event.

Every JSON error body has the shape ``{"error_code": ..., "message": ...}``.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from urllib.parse import quote

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel

from .chain import (
    Final,
    FeedbackChain,
    FeedbackResult,
    StudentContext,
    TextDelta,
    WITH_LECTURE,
    WITHOUT_LECTURE,
)
from .citations import FootnoteDefinition
from .config import ServiceConfig
from .embeddings import Embedder, LocalHashEmbedder, RemoteEmbedder
from .errors import DimensionMismatch, VidtutorError
from .exercises import Runner, Submission, SubprocessRunner, Task, evaluate, load_tasks
from .llm import ChatProvider, RemoteChatProvider, ScriptedChatProvider, load_script
from .prompts import PromptTemplates
from .store import VectorStore
from .timing import Clock, SystemClock
from .usage import UsageEvent, UsageLog

logger = logging.getLogger(__name__)

_RANGE_RE = re.compile(r"^bytes=(\d*)-(\d*)$")


class ApiError(Exception):
    def __init__(self, status_code: int, error_code: str, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.error_code = error_code
        self.message = message


class CodeSubmission(BaseModel):
    code: str


@dataclass
class ServiceState:
    """Everything the request handlers share."""

    tasks: dict[str, Task]
    chain: FeedbackChain
    runner: Runner
    usage_log: UsageLog
    video_dir: Path
    compile_timeout_s: float = 10.0
    test_timeout_s: float = 10.0
    max_concurrent_evaluations: int = 4
    static_dir: Path | None = None
    submissions: dict[str, Submission] = dataclass_field(default_factory=dict)
    _submissions_lock: threading.Lock = dataclass_field(default_factory=threading.Lock)
    _active_feedback: set = dataclass_field(default_factory=set)
    _active_lock: threading.Lock = dataclass_field(default_factory=threading.Lock)
    _eval_slots: threading.BoundedSemaphore = dataclass_field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self._eval_slots = threading.BoundedSemaphore(self.max_concurrent_evaluations)


def build_state(
    config: ServiceConfig,
    llm: ChatProvider | None = None,
    embedder: Embedder | None = None,
    clock: Clock | None = None,
) -> ServiceState:
    """Assemble service components from configuration.

    ``llm``, ``embedder`` and ``clock`` may be injected (tests); otherwise
    they are built from the config's provider sections. Fails fast when the
    store on disk disagrees with the configured embedder.
    """
    clock = clock or SystemClock()

    if embedder is None:
        if config.embedding.provider == "remote":
            embedder = RemoteEmbedder(
                api_url=config.embedding.api_url,
                model=config.embedding.model,
                dim=config.embedding.dim,
                api_key=config.embedding.api_key,
            )
        else:
            embedder = LocalHashEmbedder(dim=config.embedding.dim)

    store = None
    if config.store_dir:
        store_path = Path(config.store_dir)
        if (store_path / "manifest.json").is_file():
            store = VectorStore.load(store_path, expected_embedder_id=embedder.descriptor.id)
            if store.dim != embedder.descriptor.dim:
                raise DimensionMismatch(
                    f"store dim {store.dim} != embedder dim {embedder.descriptor.dim}"
                )
        else:
            logger.warning(
                "store directory %s has no manifest; lecture feedback will degrade",
                config.store_dir,
            )

    if llm is None:
        if config.llm.provider == "scripted":
            llm = ScriptedChatProvider(load_script(config.llm.script_path), clock=clock)
        else:
            llm = RemoteChatProvider(
                api_url=config.llm.api_url,
                model=config.llm.model,
                api_key=config.llm.api_key,
            )

    templates = (
        PromptTemplates.load(config.prompt_template) if config.prompt_template else PromptTemplates.load()
    )
    chain = FeedbackChain(
        llm=llm,
        embedder=embedder,
        store=store,
        model_id=config.llm.model,
        templates=templates,
        clock=clock,
    )
    tasks = {t.task_id: t for t in load_tasks(config.task_dir)} if config.task_dir else {}
    static_dir = Path(config.static_dir) if config.static_dir else None

    return ServiceState(
        tasks=tasks,
        chain=chain,
        runner=SubprocessRunner(config.runners),
        usage_log=UsageLog(config.usage_log),
        video_dir=Path(config.video_dir) if config.video_dir else Path("."),
        compile_timeout_s=config.compile_timeout_s,
        test_timeout_s=config.test_timeout_s,
        max_concurrent_evaluations=config.max_concurrent_evaluations,
        static_dir=static_dir if static_dir and static_dir.is_dir() else None,
    )


def _sse(event: str, payload) -> str:
    return f"event: {event}\ndata: {json.dumps(payload, ensure_ascii=False)}\n\n"


def _video_url(video_file: str, start_ms: int) -> str:
    return f"/api/videos/{quote(video_file)}#t={start_ms // 1000}"


def _citation_payload(definition: FootnoteDefinition) -> dict:
    return {
        "footnote_id": definition.footnote_id,
        "video_file": definition.video_file,
        "start_ms": definition.start_ms,
        "url": _video_url(definition.video_file, definition.start_ms),
    }


def _done_payload(result: FeedbackResult) -> dict:
    metrics = result.metrics
    return {
        "mode": result.mode,
        "degraded": metrics.degraded,
        "time_to_first_token_ms": metrics.time_to_first_token_ms,
        "total_ms": metrics.total_ms,
        "run1_ms": metrics.run1_ms,
        "chunks_used": metrics.chunks_used,
        "citations_count": len(result.citations),
    }


def _submission_payload(submission: Submission) -> dict:
    payload = {
        "submission_id": submission.submission_id,
        "task_id": submission.task_id,
        "received_at": submission.received_at.isoformat(),
        "compile": {
            "success": submission.compile.success,
            "output": submission.compile.output,
            "duration_ms": submission.compile.duration_ms,
        },
        "tests": None,
    }
    if submission.tests is not None:
        payload["tests"] = {
            "passed": submission.tests.passed,
            "total": submission.tests.total,
            "output": submission.tests.output,
            "duration_ms": submission.tests.duration_ms,
        }
    return payload


def _student_context(task: Task, submission: Submission) -> StudentContext:
    if submission.tests is not None:
        unit_test_result = (
            f"{submission.tests.passed}/{submission.tests.total} tests passed\n"
            f"{submission.tests.output}"
        )
    else:
        unit_test_result = ""
    return StudentContext(
        task_description=task.description_md,
        programming_language=task.programming_language,
        student_code=submission.code,
        compiler_output=submission.compile.output,
        unit_test_result=unit_test_result,
    )


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="vidtutor", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def handle_api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status_code,
            content={"error_code": exc.error_code, "message": exc.message},
        )

    @app.exception_handler(VidtutorError)
    async def handle_domain_error(_req: Request, exc: VidtutorError):
        logger.exception("unhandled domain error")
        return JSONResponse(
            status_code=500,
            content={"error_code": "internal_error", "message": str(exc)},
        )

    @app.get("/api/tasks")
    def list_tasks():
        return [
            {
                "task_id": t.task_id,
                "title": t.title,
                "programming_language": t.programming_language,
            }
            for t in sorted(state.tasks.values(), key=lambda t: t.task_id)
        ]

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str):
        task = state.tasks.get(task_id)
        if task is None:
            raise ApiError(404, "task_not_found", f"no task {task_id!r}")
        return {
            "task_id": task.task_id,
            "title": task.title,
            "programming_language": task.programming_language,
            "description_md": task.description_md,
            "starter_code": task.starter_code,
        }

    @app.post("/api/tasks/{task_id}/submissions")
    def submit(task_id: str, body: CodeSubmission):
        task = state.tasks.get(task_id)
        if task is None:
            raise ApiError(404, "task_not_found", f"no task {task_id!r}")
        if not body.code.strip():
            raise ApiError(422, "empty_code", "submission code must not be empty")
        with state._eval_slots:
            submission = evaluate(
                task,
                body.code,
                state.runner,
                compile_timeout_s=state.compile_timeout_s,
                test_timeout_s=state.test_timeout_s,
            )
        with state._submissions_lock:
            state.submissions[submission.submission_id] = submission
        state.usage_log.append(UsageEvent.submission(task_id))
        return _submission_payload(submission)

    @app.post("/api/submissions/{submission_id}/feedback")
    def feedback(submission_id: str, lecture: bool = Query(False)):
        with state._submissions_lock:
            submission = state.submissions.get(submission_id)
        if submission is None:
            raise ApiError(404, "submission_not_found", f"no submission {submission_id!r}")
        task = state.tasks[submission.task_id]

        with state._active_lock:
            if submission_id in state._active_feedback:
                raise ApiError(
                    409, "feedback_in_progress", "a feedback stream for this submission is active"
                )
            state._active_feedback.add(submission_id)

        mode = WITH_LECTURE if lecture else WITHOUT_LECTURE
        ctx = _student_context(task, submission)

        def event_stream():
            sent: list[str] = []
            try:
                result: FeedbackResult | None = None
                for item in state.chain.stream_feedback(ctx, mode):
                    if isinstance(item, TextDelta):
                        sent.append(item.text)
                        yield _sse("token", {"text": item.text})
                    elif isinstance(item, Final):
                        result = item.result
                assert result is not None
                prefix = "".join(sent)
                if result.markdown != prefix:
                    if result.markdown.startswith(prefix):
                        yield _sse("token", {"text": result.markdown[len(prefix):]})
                    else:
                        # Streamed text can only diverge when invented footnote
                        # references were stripped; clients keep the streamed text.
                        logger.warning("final markdown diverged from streamed text")
                yield _sse("citations", [_citation_payload(c) for c in result.citations])
                yield _sse("done", _done_payload(result))
                state.usage_log.append(
                    UsageEvent.feedback(
                        task_id=task.task_id,
                        mode=result.mode,
                        citations_count=len(result.citations),
                        time_to_first_token_ms=result.metrics.time_to_first_token_ms,
                        total_ms=result.metrics.total_ms,
                    )
                )
            except VidtutorError as exc:
                logger.warning("feedback stream failed: %s", exc)
                yield _sse(
                    "error",
                    {"error_code": exc.__class__.__name__, "message": str(exc)},
                )
            finally:
                with state._active_lock:
                    state._active_feedback.discard(submission_id)

        return StreamingResponse(event_stream(), media_type="text/event-stream")

    @app.get("/api/videos/{file_name}")
    def video(file_name: str, request: Request):
        if (
            file_name in (".", "..")
            or "/" in file_name
            or "\\" in file_name
            or file_name != Path(file_name).name
        ):
            raise ApiError(400, "invalid_path", "video name must be a plain file name")
        path = state.video_dir / file_name
        if not path.is_file():
            raise ApiError(404, "video_not_found", f"no video {file_name!r}")

        size = path.stat().st_size
        range_header = request.headers.get("range")
        headers = {"Accept-Ranges": "bytes"}
        if range_header:
            parsed = _parse_range(range_header, size)
            if parsed == "invalid":
                pass  # per RFC 7233, ignore unparseable Range headers
            elif parsed is None:
                return Response(
                    status_code=416,
                    headers={**headers, "Content-Range": f"bytes */{size}"},
                )
            else:
                start, end = parsed
                with open(path, "rb") as fh:
                    fh.seek(start)
                    data = fh.read(end - start + 1)
                return Response(
                    content=data,
                    status_code=206,
                    media_type="video/mp4",
                    headers={**headers, "Content-Range": f"bytes {start}-{end}/{size}"},
                )
        return Response(content=path.read_bytes(), media_type="video/mp4", headers=headers)

    @app.get("/api/stats")
    def stats():
        return state.usage_log.stats().to_dict()

    if state.static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=state.static_dir, html=True), name="ui")

    return app


def _parse_range(header: str, size: int):
    """``(start, end)`` inclusive, ``None`` if unsatisfiable, ``"invalid"``
    if the header is not a single byte range."""
    m = _RANGE_RE.match(header.strip())
    if not m:
        return "invalid"
    raw_start, raw_end = m.groups()
    if raw_start == "" and raw_end == "":
        return "invalid"
    if raw_start == "":
        # suffix form: last N bytes
        length = int(raw_end)
        if length == 0 or size == 0:
            return None
        start = max(size - length, 0)
        return (start, size - 1)
    start = int(raw_start)
    if start >= size:
        return None
    end = int(raw_end) if raw_end else size - 1
    return (start, min(end, size - 1))


def create_app_from_config(config: ServiceConfig) -> FastAPI:
    return create_app(build_state(config))
