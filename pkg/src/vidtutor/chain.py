"""Two-run feedback pipeline.

Run 1 asks the model which concepts the student is missing and turns each
into a retrieval question (at most two). Each question is embedded and the
top four lecture chunks are fetched, deduplicated across questions, and
numbered as footnotes (at most eight). Run 2 streams the actual feedback,
grounded in those chunks; afterwards the footnotes the model actually used
are resolved into video citations.

The fast path (``without_lecture``) skips Run 1 and retrieval entirely and
prompts with the student context alone. A lecture-mode request silently
degrades to the fast path when no store is loaded or Run 1 yields nothing;
the result's metrics record the degradation.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Callable, Iterator, Literal, Union

from .citations import CitationSet, FinalizedFeedback, FootnoteDefinition, finalize_feedback, footnote_definition
from .chunking import LectureChunk
from .embeddings import Embedder
from .errors import MalformedToolCall
from .llm import (
    END,
    TEXT_DELTA,
    TOOL_CALL,
    ChatMessage,
    ChatProvider,
    CompletionRequest,
    ToolSpec,
)
from .prompts import PromptTemplates
from .store import VectorStore
from .timing import Clock, SystemClock

logger = logging.getLogger(__name__)

WITH_LECTURE = "with_lecture"
WITHOUT_LECTURE = "without_lecture"
Mode = Literal["with_lecture", "without_lecture"]

MAX_QUERIES = 2
TOP_K_PER_QUERY = 4
MAX_CHUNKS = MAX_QUERIES * TOP_K_PER_QUERY

# The array cap tells the model the limit; overlong responses are truncated
# rather than rejected (see llm.validate_tool_call).
REPORT_MISSING_CONCEPTS = ToolSpec(
    name="report_missing_concepts",
    description=(
        "Report which concepts the student is missing for a correct solution, "
        "each with one simple question to look the concept up in the lecture."
    ),
    parameters={
        "type": "object",
        "properties": {
            "concepts": {
                "type": "array",
                "maxItems": MAX_QUERIES,
                "items": {
                    "type": "object",
                    "properties": {
                        "concept": {"type": "string"},
                        "query": {"type": "string"},
                    },
                    "required": ["concept", "query"],
                },
            }
        },
        "required": ["concepts"],
    },
)


@dataclass(frozen=True)
class StudentContext:
    """Everything the model sees about one submission."""

    task_description: str
    programming_language: str
    student_code: str
    compiler_output: str = ""
    unit_test_result: str = ""

    def __post_init__(self) -> None:
        if not self.task_description or not self.student_code:
            raise ValueError("task_description and student_code must be non-empty")


@dataclass(frozen=True)
class ConceptQuery:
    concept: str
    query: str


@dataclass(frozen=True)
class RetrievedEntry:
    footnote_id: int
    chunk: LectureChunk
    score: float
    source_query: ConceptQuery


@dataclass(frozen=True)
class RetrievedContext:
    entries: tuple[RetrievedEntry, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        if len(self.entries) > MAX_CHUNKS:
            raise ValueError(f"retrieved context exceeds {MAX_CHUNKS} chunks")
        for pos, entry in enumerate(self.entries, start=1):
            if entry.footnote_id != pos:
                raise ValueError("footnote ids must be consecutive starting at 1")

    def chunks_json(self) -> list[dict]:
        return [
            {
                "id": e.footnote_id,
                "citation": f"[^{e.footnote_id}]",
                "content": e.chunk.text,
            }
            for e in self.entries
        ]

    def citation_set(self) -> CitationSet:
        return CitationSet(
            [
                footnote_definition(e.footnote_id, e.chunk.video_file, e.chunk.start_ms)
                for e in self.entries
            ]
        )


@dataclass(frozen=True)
class FeedbackMetrics:
    time_to_first_token_ms: int
    total_ms: int
    run1_ms: int
    chunks_used: int
    degraded: bool = False


@dataclass(frozen=True)
class FeedbackResult:
    markdown: str
    citations: list[FootnoteDefinition]
    mode: Mode
    metrics: FeedbackMetrics


@dataclass(frozen=True)
class TextDelta:
    text: str


@dataclass(frozen=True)
class Final:
    result: FeedbackResult


FeedbackStreamItem = Union[TextDelta, Final]


def _ms(seconds: float) -> int:
    return int(round(seconds * 1000))


class FeedbackChain:
    """Orchestrates Run 1, retrieval, and the streamed Run 2."""

    def __init__(
        self,
        llm: ChatProvider,
        embedder: Embedder | None = None,
        store: VectorStore | None = None,
        model_id: str = "",
        templates: PromptTemplates | None = None,
        clock: Clock | None = None,
    ):
        self.llm = llm
        self.embedder = embedder
        self.store = store
        self.model_id = model_id
        self.templates = templates or PromptTemplates.load()
        self.clock = clock or SystemClock()

    # -- Run 1 ---------------------------------------------------------------

    def _student_context_text(self, ctx: StudentContext) -> str:
        return self.templates.render(
            "student_context",
            task_description=ctx.task_description,
            programming_language=ctx.programming_language,
            student_code=ctx.student_code,
            compiler_output=ctx.compiler_output,
            unit_test_result=ctx.unit_test_result,
        )

    def _run1_request(self, ctx: StudentContext) -> CompletionRequest:
        return CompletionRequest(
            messages=(
                ChatMessage("system", self.templates.render("run1_system")),
                ChatMessage(
                    "user",
                    self.templates.render(
                        "run1_user", student_context=self._student_context_text(ctx)
                    ),
                ),
            ),
            tools=(REPORT_MISSING_CONCEPTS,),
            model_id=self.model_id,
        )

    def identify_missing_concepts(self, ctx: StudentContext) -> list[ConceptQuery]:
        """Run 1: at most two (concept, retrieval question) pairs.

        A malformed tool call is retried exactly once; a second failure, or a
        completion with no tool call at all, degrades to an empty list. The
        model's list is truncated to two entries.
        """
        request = self._run1_request(ctx)
        for attempt in (1, 2):
            try:
                arguments = None
                for event in self.llm.complete(request):
                    if event.kind == TOOL_CALL and event.tool_call is not None:
                        arguments = json.loads(event.tool_call.arguments)
                    elif event.kind == END:
                        break
            except MalformedToolCall as exc:
                logger.warning("run 1 attempt %d produced a malformed tool call: %s", attempt, exc)
                continue
            if arguments is None:
                logger.warning("run 1 returned no tool call; continuing without lecture context")
                return []
            concepts = [
                ConceptQuery(concept=item["concept"].strip(), query=item["query"].strip())
                for item in arguments.get("concepts", [])
            ]
            concepts = [c for c in concepts if c.concept and c.query]
            if len(concepts) > MAX_QUERIES:
                logger.warning("run 1 reported %d concepts; keeping the first %d", len(concepts), MAX_QUERIES)
            return concepts[:MAX_QUERIES]
        return []

    # -- Retrieval -----------------------------------------------------------

    def retrieve_context(self, queries: list[ConceptQuery]) -> RetrievedContext:
        """Embed each question, take its top four chunks, deduplicate across
        questions keeping the first occurrence, and number footnotes 1..n."""
        if self.store is None or self.embedder is None:
            return RetrievedContext()
        entries: list[RetrievedEntry] = []
        seen: set[str] = set()
        for query in queries[:MAX_QUERIES]:
            vector = self.embedder.embed(query.query)
            for scored in self.store.top_k(vector, TOP_K_PER_QUERY):
                record = scored.record
                if record.chunk_id in seen:
                    continue
                seen.add(record.chunk_id)
                entries.append(
                    RetrievedEntry(
                        footnote_id=len(entries) + 1,
                        chunk=LectureChunk(
                            chunk_id=record.chunk_id,
                            video_file=record.video_file,
                            start_ms=record.start_ms,
                            text=record.text,
                        ),
                        score=scored.score,
                        source_query=query,
                    )
                )
        return RetrievedContext(entries=tuple(entries))

    # -- Run 2 ---------------------------------------------------------------

    def build_run2_prompt(
        self, ctx: StudentContext, rc: RetrievedContext, mode: Mode
    ) -> CompletionRequest:
        """Assemble the feedback prompt.

        Lecture mode includes, in order: role, rules, the chunk-format
        description, citation few-shots, the student context, and the chunks
        as JSON. The fast mode carries only role, rules, and student context.
        """
        system_sections = [self.templates.render("role"), self.templates.render("rules")]
        user_sections = [self._student_context_text(ctx)]
        if mode == WITH_LECTURE:
            system_sections.append(self.templates.render("chunk_format"))
            system_sections.append(self.templates.render("citation_examples"))
            chunks_json = json.dumps(rc.chunks_json(), ensure_ascii=False)
            user_sections.append(self.templates.render("chunks", chunks_json=chunks_json))
        return CompletionRequest(
            messages=(
                ChatMessage("system", "\n\n".join(system_sections)),
                ChatMessage("user", "\n\n".join(user_sections)),
            ),
            model_id=self.model_id,
        )

    def stream_feedback(self, ctx: StudentContext, mode: Mode) -> Iterator[FeedbackStreamItem]:
        """Yield TextDelta items as tokens arrive, then one Final item.

        Lecture mode runs concept extraction and retrieval before the stream
        can start, which is why its first token arrives much later than the
        fast path's.
        """
        if mode not in (WITH_LECTURE, WITHOUT_LECTURE):
            raise ValueError(f"unknown mode {mode!r}")
        started = self.clock.now()
        run1_ms = 0
        degraded = False
        rc = RetrievedContext()
        effective_mode: Mode = mode

        if mode == WITH_LECTURE:
            if self.store is None or self.embedder is None:
                logger.warning("no store/embedder loaded; degrading to %s", WITHOUT_LECTURE)
                degraded = True
                effective_mode = WITHOUT_LECTURE
            else:
                queries = self.identify_missing_concepts(ctx)
                run1_ms = _ms(self.clock.now() - started)
                if not queries:
                    degraded = True
                    effective_mode = WITHOUT_LECTURE
                else:
                    rc = self.retrieve_context(queries)

        request = self.build_run2_prompt(ctx, rc, effective_mode)
        parts: list[str] = []
        first_token_ms: int | None = None
        for event in self.llm.complete(request):
            if event.kind == TEXT_DELTA:
                if first_token_ms is None:
                    first_token_ms = _ms(self.clock.now() - started)
                parts.append(event.text)
                yield TextDelta(event.text)
            elif event.kind == TOOL_CALL:
                logger.warning("ignoring unexpected tool call in feedback run")
            elif event.kind == END:
                break

        finalized: FinalizedFeedback = finalize_feedback("".join(parts), rc.citation_set())
        total_ms = _ms(self.clock.now() - started)
        metrics = FeedbackMetrics(
            time_to_first_token_ms=first_token_ms if first_token_ms is not None else total_ms,
            total_ms=total_ms,
            run1_ms=run1_ms,
            chunks_used=len(rc.entries),
            degraded=degraded,
        )
        yield Final(
            FeedbackResult(
                markdown=finalized.markdown,
                citations=finalized.citations,
                mode=effective_mode,
                metrics=metrics,
            )
        )

    def generate_feedback(
        self,
        ctx: StudentContext,
        mode: Mode,
        on_delta: Callable[[str], None] | None = None,
    ) -> FeedbackResult:
        """Convenience wrapper around ``stream_feedback``."""
        result: FeedbackResult | None = None
        for item in self.stream_feedback(ctx, mode):
            if isinstance(item, TextDelta):
                if on_delta is not None:
                    on_delta(item.text)
            else:
                result = item.result
        assert result is not None
        return result
