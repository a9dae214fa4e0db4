"""Clock abstraction so latency-sensitive paths can be tested without sleeping."""

from __future__ import annotations

import threading
import time
from typing import Protocol


class Clock(Protocol):
    def now(self) -> float:
        """Seconds from an arbitrary, monotonic origin."""
        ...

    def sleep(self, seconds: float) -> None:
        ...


class SystemClock:
    """Real wall-clock time via ``time.monotonic`` / ``time.sleep``."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class FakeClock:
    """Deterministic clock: ``sleep`` advances time instantly.

    Shared between a scripted provider (which sleeps) and the code under
    test (which reads ``now``), so latency assertions are exact.
    """

    def __init__(self, start: float = 0.0):
        self._now = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def sleep(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot sleep a negative duration")
        with self._lock:
            self._now += seconds
