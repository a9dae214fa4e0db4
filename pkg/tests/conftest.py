import json
from pathlib import Path

import pytest

from vidtutor.chunking import chunk_transcript
from vidtutor.embeddings import LocalHashEmbedder
from vidtutor.srt import parse_srt
from vidtutor.store import ChunkRecord, VectorStore

DATA_DIR = Path(__file__).parent / "data"
SRT_DIR = DATA_DIR / "srt"


@pytest.fixture
def srt_corpus_dir() -> Path:
    return SRT_DIR


@pytest.fixture
def local_embedder() -> LocalHashEmbedder:
    return LocalHashEmbedder(dim=256)


def build_store_from_srt(srt_text: str, video_file: str, embedder: LocalHashEmbedder) -> VectorStore:
    transcript = parse_srt(srt_text, video_file)
    chunks = chunk_transcript(transcript)
    store = VectorStore(embedder_id=embedder.descriptor.id, dim=embedder.descriptor.dim)
    store.insert_batch(
        [
            ChunkRecord(
                chunk_id=c.chunk_id,
                video_file=c.video_file,
                start_ms=c.start_ms,
                text=c.text,
                vector=embedder.embed(c.text),
            )
            for c in chunks
        ]
    )
    return store


@pytest.fixture
def lecture_store(local_embedder) -> VectorStore:
    """One-chunk store: recursion material at 00:14:32 of lecture_03.mp4."""
    srt_text = (
        "1\n00:14:32,000 --> 00:14:40,000\n"
        "Recursion means a function calls itself with a smaller input until a base case stops it.\n"
    )
    return build_store_from_srt(srt_text, "lecture_03.mp4", local_embedder)


def make_task_dir(base: Path, task_id: str, title: str = "Sum of numbers", language: str = "python",
                  description: str = "Write a function `total(ns)` returning the sum of a list.",
                  tests: str = 'from solution import total\nprint("1/1" if total([1, 2]) == 3 else "0/1")\n',
                  starter_code: str | None = None, meta_extra: dict | None = None) -> Path:
    task_dir = base / task_id
    (task_dir / "tests").mkdir(parents=True)
    meta = {"title": title, "language": language}
    if starter_code is not None:
        meta["starter_code"] = starter_code
    if meta_extra:
        meta.update(meta_extra)
    (task_dir / "task.json").write_text(json.dumps(meta), encoding="utf-8")
    (task_dir / "description.md").write_text(description, encoding="utf-8")
    (task_dir / "tests" / "test_solution.py").write_text(tests, encoding="utf-8")
    return task_dir
