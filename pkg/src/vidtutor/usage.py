"""Anonymous usage logging and aggregate statistics.

One JSON line is appended per submission and per generated feedback; the
stats endpoint recomputes its aggregates from this log on every request, so
the log file is the single source of truth and no database is involved.
"""

from __future__ import annotations

import json
import math
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

SUBMISSION = "submission"
FEEDBACK = "feedback"


@dataclass(frozen=True)
class UsageEvent:
    event_id: str
    kind: str  # submission | feedback
    task_id: str
    at: datetime
    mode: str | None = None
    citations_count: int | None = None
    time_to_first_token_ms: int | None = None
    total_ms: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (SUBMISSION, FEEDBACK):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.kind == FEEDBACK:
            if self.mode is None or self.citations_count is None:
                raise ValueError("feedback events must carry mode and citations_count")
        elif self.mode is not None or self.citations_count is not None:
            raise ValueError("submission events carry no feedback fields")

    @staticmethod
    def submission(task_id: str, at: datetime | None = None) -> "UsageEvent":
        return UsageEvent(
            event_id=uuid.uuid4().hex,
            kind=SUBMISSION,
            task_id=task_id,
            at=at or datetime.now(timezone.utc),
        )

    @staticmethod
    def feedback(
        task_id: str,
        mode: str,
        citations_count: int,
        time_to_first_token_ms: int,
        total_ms: int,
        at: datetime | None = None,
    ) -> "UsageEvent":
        return UsageEvent(
            event_id=uuid.uuid4().hex,
            kind=FEEDBACK,
            task_id=task_id,
            at=at or datetime.now(timezone.utc),
            mode=mode,
            citations_count=citations_count,
            time_to_first_token_ms=time_to_first_token_ms,
            total_ms=total_ms,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "event_id": self.event_id,
                "kind": self.kind,
                "task_id": self.task_id,
                "at": self.at.isoformat(),
                "mode": self.mode,
                "citations_count": self.citations_count,
                "time_to_first_token_ms": self.time_to_first_token_ms,
                "total_ms": self.total_ms,
            }
        )

    @staticmethod
    def from_json(line: str) -> "UsageEvent":
        raw = json.loads(line)
        return UsageEvent(
            event_id=raw["event_id"],
            kind=raw["kind"],
            task_id=raw["task_id"],
            at=datetime.fromisoformat(raw["at"]),
            mode=raw.get("mode"),
            citations_count=raw.get("citations_count"),
            time_to_first_token_ms=raw.get("time_to_first_token_ms"),
            total_ms=raw.get("total_ms"),
        )


@dataclass(frozen=True)
class UsageStats:
    submissions: int
    feedback_total: int
    feedback_with_lecture: int
    feedback_without_lecture: int
    linked_segments_total: int
    avg_links_per_lecture_feedback: float
    ttft_ms: dict = field(default_factory=dict)  # mode -> {"p50": ..., "p95": ...}

    def to_dict(self) -> dict:
        return {
            "submissions": self.submissions,
            "feedback_total": self.feedback_total,
            "feedback_with_lecture": self.feedback_with_lecture,
            "feedback_without_lecture": self.feedback_without_lecture,
            "linked_segments_total": self.linked_segments_total,
            "avg_links_per_lecture_feedback": self.avg_links_per_lecture_feedback,
            "ttft_ms": self.ttft_ms,
        }


def nearest_rank_percentile(values: list[int], percentile: float) -> int:
    """Nearest-rank percentile; 0 for an empty list."""
    if not values:
        return 0
    ordered = sorted(values)
    rank = math.ceil(percentile / 100.0 * len(ordered))
    return ordered[max(rank, 1) - 1]


def compute_stats(events: Iterable[UsageEvent]) -> UsageStats:
    submissions = 0
    with_lecture = 0
    without_lecture = 0
    linked = 0
    ttft: dict[str, list[int]] = {"with_lecture": [], "without_lecture": []}

    for event in events:
        if event.kind == SUBMISSION:
            submissions += 1
            continue
        if event.mode == "with_lecture":
            with_lecture += 1
        else:
            without_lecture += 1
        linked += event.citations_count or 0
        if event.mode in ttft and event.time_to_first_token_ms is not None:
            ttft[event.mode].append(event.time_to_first_token_ms)

    avg = linked / with_lecture if with_lecture else 0.0
    return UsageStats(
        submissions=submissions,
        feedback_total=with_lecture + without_lecture,
        feedback_with_lecture=with_lecture,
        feedback_without_lecture=without_lecture,
        linked_segments_total=linked,
        avg_links_per_lecture_feedback=avg,
        ttft_ms={
            mode: {
                "p50": nearest_rank_percentile(vals, 50),
                "p95": nearest_rank_percentile(vals, 95),
            }
            for mode, vals in ttft.items()
        },
    )


class UsageLog:
    """Append-only JSON-lines log; appends are serialized through one lock."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, event: UsageEvent) -> None:
        line = event.to_json() + "\n"
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()

    def read_all(self) -> list[UsageEvent]:
        if not self.path.is_file():
            return []
        events = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    events.append(UsageEvent.from_json(line))
        return events

    def stats(self) -> UsageStats:
        return compute_stats(self.read_all())
