"""Re-segment transcript text into uniform, overlapping chunks.

SRT cue texts vary wildly in length, so they are concatenated into one
character timeline (each character remembers the start timestamp of the
segment it came from) and sliced into windows of ``CHUNK_SIZE`` characters
that overlap the previous window by ``CHUNK_OVERLAP`` characters. A chunk's
timestamp is the timestamp of its first character.

Counting is in Unicode code points, never bytes: transcripts contain umlauts
and slicing must not split characters.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidChunkParams
from .srt import Transcript

CHUNK_SIZE = 512
CHUNK_OVERLAP = 64

# Fixed width keeps chunk ids lexicographically ordered per video.
_ORDINAL_WIDTH = 4


@dataclass(frozen=True)
class CharTimeline:
    """Concatenated transcript text plus a per-character start timestamp."""

    text: str
    char_start_ms: list[int]

    def __post_init__(self) -> None:
        if len(self.text) != len(self.char_start_ms):
            raise ValueError("timeline text and timestamps must have equal length")


@dataclass(frozen=True)
class LectureChunk:
    """The unit of indexing, retrieval, and citation."""

    chunk_id: str
    video_file: str
    start_ms: int
    text: str


def build_timeline(transcript: Transcript) -> CharTimeline:
    """Join segment texts with single spaces into one timestamped character stream.

    Joiner spaces inherit the start timestamp of the preceding segment.
    """
    if not transcript.segments:
        raise ValueError("cannot build a timeline from an empty transcript")

    parts: list[str] = []
    stamps: list[int] = []
    for pos, seg in enumerate(transcript.segments):
        if pos > 0:
            parts.append(" ")
            stamps.append(transcript.segments[pos - 1].start_ms)
        parts.append(seg.text)
        stamps.extend([seg.start_ms] * len(seg.text))
    return CharTimeline(text="".join(parts), char_start_ms=stamps)


def chunk_timeline(
    timeline: CharTimeline,
    video_file: str,
    size: int = CHUNK_SIZE,
    overlap: int = CHUNK_OVERLAP,
) -> list[LectureChunk]:
    """Slice a timeline into chunks of ``size`` chars overlapping by ``overlap``.

    Windows start at offsets 0, size-overlap, 2*(size-overlap), ...; emission
    stops with the first window whose end reaches the end of the text, so the
    final chunk may be short but every character is covered exactly.

    Raises:
        InvalidChunkParams: unless ``size > overlap >= 0``.
    """
    if overlap < 0 or size <= overlap:
        raise InvalidChunkParams(f"need size > overlap >= 0, got size={size} overlap={overlap}")
    n = len(timeline.text)
    if n == 0:
        raise ValueError("cannot chunk an empty timeline")

    stride = size - overlap
    chunks: list[LectureChunk] = []
    offset = 0
    while True:
        end = min(offset + size, n)
        chunks.append(
            LectureChunk(
                chunk_id=f"{video_file}#{len(chunks):0{_ORDINAL_WIDTH}d}",
                video_file=video_file,
                start_ms=timeline.char_start_ms[offset],
                text=timeline.text[offset:end],
            )
        )
        if end >= n:
            return chunks
        offset += stride


def chunk_transcript(
    transcript: Transcript, size: int = CHUNK_SIZE, overlap: int = CHUNK_OVERLAP
) -> list[LectureChunk]:
    """Convenience: build the timeline and chunk it in one step."""
    return chunk_timeline(build_timeline(transcript), transcript.video_file, size, overlap)
