"""Parse SubRip (.srt) transcripts into ordered, millisecond-exact segments.

Auto-generated lecture transcripts are messy: CRLF line endings, UTF-8 BOMs,
multi-line cue text, blocks out of temporal order. The parser tolerates all of
that; what it does not tolerate is a block whose index or timestamp line is
unreadable, because downstream chunking needs trustworthy timestamps.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .errors import EmptyTranscript, MalformedBlock, MalformedTimestamp, TranscriptDecodeError

logger = logging.getLogger(__name__)

# SRT convention caps the hour field at two digits, so 99:59:59,999 is the
# largest representable timestamp.
MAX_TIMESTAMP_MS = 99 * 3_600_000 + 59 * 60_000 + 59 * 1_000 + 999

_TIMESTAMP_RE = re.compile(r"^(\d{2}):([0-5]\d):([0-5]\d),(\d{3})$")
_ARROW = "-->"


def parse_timestamp(s: str) -> int:
    """Parse ``HH:MM:SS,mmm`` into milliseconds.

    Raises:
        MalformedTimestamp: wrong shape, non-digits, or MM/SS >= 60.
    """
    m = _TIMESTAMP_RE.match(s)
    if m is None:
        raise MalformedTimestamp(f"not a valid SRT timestamp: {s!r}")
    hours, minutes, seconds, millis = (int(g) for g in m.groups())
    return ((hours * 60 + minutes) * 60 + seconds) * 1000 + millis


def format_timestamp_srt(ms: int) -> str:
    """Format milliseconds as zero-padded ``HH:MM:SS,mmm``; inverse of parse_timestamp."""
    if not 0 <= ms <= MAX_TIMESTAMP_MS:
        raise ValueError(f"timestamp out of range: {ms}")
    seconds, millis = divmod(ms, 1000)
    minutes, sec = divmod(seconds, 60)
    hours, minute = divmod(minutes, 60)
    return f"{hours:02d}:{minute:02d}:{sec:02d},{millis:03d}"


@dataclass(frozen=True)
class TranscriptSegment:
    """One SRT block: counter index, start/end in ms, and its text."""

    index: int
    start_ms: int
    end_ms: int
    text: str

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"segment index must be positive, got {self.index}")
        if not 0 <= self.start_ms <= self.end_ms:
            raise ValueError(
                f"segment times invalid: start={self.start_ms} end={self.end_ms}"
            )
        if not self.text or self.text != self.text.strip():
            raise ValueError("segment text must be non-empty and stripped")


@dataclass
class Transcript:
    """All segments of one lecture video, sorted ascending by start time."""

    video_file: str
    segments: list[TranscriptSegment] = field(default_factory=list)


def _decode(content: bytes | str) -> str:
    if isinstance(content, bytes):
        try:
            text = content.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise TranscriptDecodeError("transcript is not valid UTF-8", exc.start) from exc
    else:
        text = content.removeprefix("﻿")
    return text.replace("\r\n", "\n").replace("\r", "\n")


def parse_srt(content: bytes | str, video_file: str) -> Transcript:
    """Parse SRT content into a Transcript sorted by segment start time.

    Accepts CRLF or LF endings, an optional BOM, and multi-line cue text.
    Blocks with empty text are skipped with a warning; out-of-order blocks
    are sorted rather than rejected.

    Raises:
        TranscriptDecodeError: content is not valid UTF-8 (byte offset named).
        MalformedBlock: index line is not numeric or the timestamp line lacks
            ``-->`` (block ordinal named).
        MalformedTimestamp: a timestamp fails to parse.
        EmptyTranscript: no usable blocks remain.
    """
    text = _decode(content)
    segments: list[TranscriptSegment] = []
    skipped = 0

    ordinal = 0
    for block in re.split(r"\n\s*\n", text):
        if not block.strip():
            continue
        ordinal += 1
        lines = block.strip("\n").split("\n")
        if len(lines) < 2:
            raise MalformedBlock("block has no timestamp line", ordinal)

        index_line = lines[0].strip()
        if not index_line.isdigit():
            raise MalformedBlock(f"index line is not numeric: {index_line!r}", ordinal)
        index = int(index_line)

        timing_line = lines[1].strip()
        if _ARROW not in timing_line:
            raise MalformedBlock(f"timestamp line lacks '-->': {timing_line!r}", ordinal)
        start_raw, _, end_raw = timing_line.partition(_ARROW)
        start_ms = parse_timestamp(start_raw.strip())
        end_ms = parse_timestamp(end_raw.strip())

        body = "\n".join(line.rstrip() for line in lines[2:]).strip()
        if not body:
            skipped += 1
            logger.warning("skipping block %d of %s: empty text", ordinal, video_file)
            continue

        segments.append(
            TranscriptSegment(index=index, start_ms=start_ms, end_ms=end_ms, text=body)
        )

    if not segments:
        raise EmptyTranscript(
            f"no usable blocks in {video_file!r} ({skipped} empty block(s) skipped)"
        )
    if skipped:
        logger.warning("%s: skipped %d empty block(s)", video_file, skipped)

    segments.sort(key=lambda seg: seg.start_ms)
    return Transcript(video_file=video_file, segments=segments)


def render_srt(transcript: Transcript) -> str:
    """Serialize segments back to SRT text (round-trips through parse_srt)."""
    blocks = []
    for seg in transcript.segments:
        timing = f"{format_timestamp_srt(seg.start_ms)} {_ARROW} {format_timestamp_srt(seg.end_ms)}"
        blocks.append(f"{seg.index}\n{timing}\n{seg.text}")
    return "\n\n".join(blocks) + "\n"
