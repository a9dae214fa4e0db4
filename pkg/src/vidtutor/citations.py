"""Markdown footnote citations linking feedback text to video timestamps.

A citation is a standard markdown footnote whose definition links to the
cited video at a second-exact offset:

    [^3]: [lecture_03.mp4 @ 00:14:32](video://lecture_03.mp4#t=872)

The ``video://<file>#t=<seconds>`` scheme keeps stored feedback independent
of any deployment URL; the serving layer rewrites it to its own video
endpoint when citations leave the process.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

logger = logging.getLogger(__name__)

# Inline reference: [^12] not followed by ':' (that would be a definition).
_REF_RE = re.compile(r"\[\^(\d+)\](?!:)")
_DEFINITION_LINE_RE = re.compile(r"^\[\^\d+\]:")


def format_display_time(ms: int) -> str:
    """``HH:MM:SS`` for humans; milliseconds truncated, not rounded."""
    seconds = ms // 1000
    minutes, sec = divmod(seconds, 60)
    hours, minute = divmod(minutes, 60)
    return f"{hours:02d}:{minute:02d}:{sec:02d}"


@dataclass(frozen=True)
class FootnoteDefinition:
    footnote_id: int
    video_file: str
    start_ms: int

    @property
    def rendered(self) -> str:
        seconds = self.start_ms // 1000
        display = format_display_time(self.start_ms)
        return (
            f"[^{self.footnote_id}]: [{self.video_file} @ {display}]"
            f"(video://{self.video_file}#t={seconds})"
        )


def footnote_definition(footnote_id: int, video_file: str, start_ms: int) -> FootnoteDefinition:
    if footnote_id < 1:
        raise ValueError("footnote_id must be >= 1")
    if not video_file:
        raise ValueError("video_file must be non-empty")
    if start_ms < 0:
        raise ValueError("start_ms must be non-negative")
    return FootnoteDefinition(footnote_id=footnote_id, video_file=video_file, start_ms=start_ms)


class CitationSet:
    """Footnote definitions keyed by id; ids are unique."""

    def __init__(self, definitions: list[FootnoteDefinition] | None = None):
        self._definitions: dict[int, FootnoteDefinition] = {}
        for definition in definitions or []:
            self.add(definition)

    def add(self, definition: FootnoteDefinition) -> None:
        if definition.footnote_id in self._definitions:
            raise ValueError(f"duplicate footnote id {definition.footnote_id}")
        self._definitions[definition.footnote_id] = definition

    def get(self, footnote_id: int) -> FootnoteDefinition | None:
        return self._definitions.get(footnote_id)

    def __contains__(self, footnote_id: int) -> bool:
        return footnote_id in self._definitions

    def __len__(self) -> int:
        return len(self._definitions)


def extract_footnote_refs(markdown: str) -> list[int]:
    """Inline footnote ids in first-occurrence order, deduplicated.

    Definition lines (``[^n]: ...``) are not references and are skipped.
    """
    seen: list[int] = []
    for line in markdown.splitlines():
        if _DEFINITION_LINE_RE.match(line):
            continue
        for match in _REF_RE.finditer(line):
            ref = int(match.group(1))
            if ref not in seen:
                seen.append(ref)
    return seen


@dataclass(frozen=True)
class FinalizedFeedback:
    markdown: str
    citations: list[FootnoteDefinition]


def finalize_feedback(body: str, citation_set: CitationSet) -> FinalizedFeedback:
    """Resolve a feedback body against the retrieved-chunk citations.

    References without a matching definition are removed from the body (the
    model invented them); definitions are appended, ascending by id, for the
    referenced ids only. A body without references is returned unchanged.
    """
    refs = extract_footnote_refs(body)
    known = [r for r in refs if r in citation_set]
    unknown = [r for r in refs if r not in citation_set]

    cleaned = body
    if unknown:
        logger.warning("stripping unknown footnote references: %s", unknown)
        pattern = re.compile(
            r"\[\^(?:" + "|".join(str(r) for r in unknown) + r")\](?!:)"
        )
        cleaned = pattern.sub("", cleaned)

    if not known:
        return FinalizedFeedback(markdown=cleaned, citations=[])

    definitions = [citation_set.get(r) for r in sorted(known)]
    rendered = "\n".join(d.rendered for d in definitions if d is not None)
    markdown = f"{cleaned.rstrip()}\n\n{rendered}"
    return FinalizedFeedback(
        markdown=markdown, citations=[d for d in definitions if d is not None]
    )
