"""Embedded vector store: exact top-K cosine scan with file persistence.

A course worth of lecture transcripts is a few thousand chunks, so an exact
numpy scan answers queries in microseconds and there is no database to
operate. The store is written once during indexing and treated as immutable
while serving; concurrent readers are safe.

On disk a store is a directory with two files:
  manifest.json  - embedder id, dimension, record count, creation instant
  records.jsonl  - one record per line: chunk_id, video_file, start_ms,
                   text, vector
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import CorruptStore, DimensionMismatch, DuplicateChunkId, EmbedderMismatch

MANIFEST_FILE = "manifest.json"
RECORDS_FILE = "records.jsonl"


@dataclass(frozen=True)
class ChunkRecord:
    """A lecture chunk plus its embedding vector."""

    chunk_id: str
    video_file: str
    start_ms: int
    text: str
    vector: list[float]


@dataclass(frozen=True)
class StoreManifest:
    embedder_id: str
    dim: int
    record_count: int
    created_at: datetime


@dataclass(frozen=True)
class ScoredChunk:
    record: ChunkRecord
    score: float


class VectorStore:
    """Exact-scan store over chunk records, deterministic across platforms."""

    def __init__(self, embedder_id: str, dim: int, created_at: datetime | None = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.embedder_id = embedder_id
        self.dim = dim
        self.created_at = created_at or datetime.now(timezone.utc)
        self._records: list[ChunkRecord] = []
        self._ids: set[str] = set()
        self._matrix = np.empty((0, dim), dtype=np.float64)
        self._norms = np.empty(0, dtype=np.float64)

    def __len__(self) -> int:
        return len(self._records)

    @property
    def manifest(self) -> StoreManifest:
        return StoreManifest(
            embedder_id=self.embedder_id,
            dim=self.dim,
            record_count=len(self._records),
            created_at=self.created_at,
        )

    @property
    def records(self) -> tuple[ChunkRecord, ...]:
        return tuple(self._records)

    def insert_batch(self, records: list[ChunkRecord]) -> int:
        """Insert records; all-or-nothing. Returns the number inserted.

        Raises:
            DimensionMismatch: any vector differs from the manifest dim.
            DuplicateChunkId: an id collides with the store or within the batch.
        """
        seen_in_batch: set[str] = set()
        for rec in records:
            if len(rec.vector) != self.dim:
                raise DimensionMismatch(
                    f"record {rec.chunk_id!r} has dim {len(rec.vector)}, store has {self.dim}"
                )
            if rec.chunk_id in self._ids or rec.chunk_id in seen_in_batch:
                raise DuplicateChunkId(f"chunk_id already present: {rec.chunk_id!r}")
            seen_in_batch.add(rec.chunk_id)

        self._records.extend(records)
        self._ids.update(seen_in_batch)
        self._reindex()
        return len(records)

    def _reindex(self) -> None:
        if self._records:
            self._matrix = np.array([r.vector for r in self._records], dtype=np.float64)
        else:
            self._matrix = np.empty((0, self.dim), dtype=np.float64)
        self._norms = np.linalg.norm(self._matrix, axis=1)

    def top_k(self, query: list[float], k: int) -> list[ScoredChunk]:
        """The k records most cosine-similar to the query.

        Sorted by score descending; ties broken by chunk_id ascending so the
        result is deterministic. Returns fewer than k when the store is small.

        Raises:
            DimensionMismatch: query dim differs from the manifest dim.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if len(query) != self.dim:
            raise DimensionMismatch(f"query has dim {len(query)}, store has {self.dim}")
        if not self._records:
            return []

        q = np.asarray(query, dtype=np.float64)
        q_norm = float(np.linalg.norm(q))
        dots = self._matrix @ q
        if q_norm == 0.0:
            scores = np.zeros(len(self._records))
        else:
            denom = self._norms * q_norm
            scores = np.divide(dots, denom, out=np.zeros_like(dots), where=denom != 0.0)

        order = sorted(
            range(len(self._records)),
            key=lambda i: (-scores[i], self._records[i].chunk_id),
        )
        return [
            ScoredChunk(record=self._records[i], score=float(scores[i])) for i in order[:k]
        ]

    def save(self, path: str | Path) -> None:
        """Write manifest.json and records.jsonl under ``path`` (a directory)."""
        directory = Path(path)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = {
            "embedder_id": self.embedder_id,
            "dim": self.dim,
            "record_count": len(self._records),
            "created_at": self.created_at.isoformat(),
        }
        (directory / MANIFEST_FILE).write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        with open(directory / RECORDS_FILE, "w", encoding="utf-8") as fh:
            for rec in self._records:
                fh.write(
                    json.dumps(
                        {
                            "chunk_id": rec.chunk_id,
                            "video_file": rec.video_file,
                            "start_ms": rec.start_ms,
                            "text": rec.text,
                            "vector": rec.vector,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )

    @classmethod
    def load(cls, path: str | Path, expected_embedder_id: str | None = None) -> "VectorStore":
        """Rebuild a store from ``save`` output.

        Raises:
            CorruptStore: missing files, bad record lines (line number named),
                or manifest/record inconsistencies.
            EmbedderMismatch: manifest embedder differs from the expected one.
        """
        directory = Path(path)
        manifest_path = directory / MANIFEST_FILE
        records_path = directory / RECORDS_FILE
        if not manifest_path.is_file() or not records_path.is_file():
            raise CorruptStore(f"store at {directory} is missing manifest or records file")

        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            embedder_id = manifest["embedder_id"]
            dim = int(manifest["dim"])
            record_count = int(manifest["record_count"])
            created_at = datetime.fromisoformat(manifest["created_at"])
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CorruptStore(f"bad manifest: {exc}") from exc

        if expected_embedder_id is not None and embedder_id != expected_embedder_id:
            raise EmbedderMismatch(
                f"store was built with embedder {embedder_id!r}, configured {expected_embedder_id!r}"
            )

        store = cls(embedder_id=embedder_id, dim=dim, created_at=created_at)
        records: list[ChunkRecord] = []
        with open(records_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    rec = ChunkRecord(
                        chunk_id=raw["chunk_id"],
                        video_file=raw["video_file"],
                        start_ms=int(raw["start_ms"]),
                        text=raw["text"],
                        vector=[float(x) for x in raw["vector"]],
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise CorruptStore(f"bad record at line {line_no}: {exc}") from exc
                if len(rec.vector) != dim:
                    raise CorruptStore(
                        f"bad record at line {line_no}: dim {len(rec.vector)} != manifest dim {dim}"
                    )
                records.append(rec)

        if len(records) != record_count:
            raise CorruptStore(
                f"manifest says {record_count} records, file has {len(records)}"
            )
        try:
            store.insert_batch(records)
        except DuplicateChunkId as exc:
            raise CorruptStore(f"records file not unique: {exc}") from exc
        return store
