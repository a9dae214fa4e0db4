"""Command-line entry points: index, search, serve, stats."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .chunking import CHUNK_OVERLAP, CHUNK_SIZE, chunk_transcript
from .citations import format_display_time
from .config import load_config
from .embeddings import Embedder, LocalHashEmbedder, RemoteEmbedder
from .errors import VidtutorError
from .srt import parse_srt
from .store import ChunkRecord, VectorStore
from .usage import UsageLog


def _build_embedder(args) -> Embedder:
    if args.embedder == "remote":
        api_url = os.environ.get("EMBED_API_URL", "")
        model = os.environ.get("EMBED_MODEL", "")
        if not api_url or not model:
            raise VidtutorError("remote embedder needs EMBED_API_URL and EMBED_MODEL")
        return RemoteEmbedder(
            api_url=api_url,
            model=model,
            dim=args.dim,
            api_key=os.environ.get("EMBED_API_KEY", ""),
        )
    return LocalHashEmbedder(dim=args.dim)


def cmd_index(args) -> int:
    embedder = _build_embedder(args)
    transcript = parse_srt(Path(args.srt).read_bytes(), args.video)
    chunks = chunk_transcript(transcript, size=args.size, overlap=args.overlap)

    store_dir = Path(args.store)
    if (store_dir / "manifest.json").is_file():
        store = VectorStore.load(store_dir, expected_embedder_id=embedder.descriptor.id)
        if args.replace:
            replaced_ids = {c.chunk_id for c in chunks}
            kept = [r for r in store.records if r.chunk_id not in replaced_ids]
            rebuilt = VectorStore(embedder_id=store.embedder_id, dim=store.dim)
            rebuilt.insert_batch(kept)
            store = rebuilt
    else:
        store = VectorStore(embedder_id=embedder.descriptor.id, dim=embedder.descriptor.dim)

    vectors = embedder.embed_many([c.text for c in chunks])
    records = [
        ChunkRecord(
            chunk_id=c.chunk_id,
            video_file=c.video_file,
            start_ms=c.start_ms,
            text=c.text,
            vector=v,
        )
        for c, v in zip(chunks, vectors)
    ]
    count = store.insert_batch(records)
    store.save(store_dir)
    print(f"{count} chunks indexed")
    return 0


def cmd_search(args) -> int:
    store = VectorStore.load(args.store)
    if args.embedder == "local":
        embedder: Embedder = LocalHashEmbedder(dim=store.dim)
    else:
        embedder = _build_embedder(args)
    results = store.top_k(embedder.embed(args.query), args.k) if len(store) else []
    for scored in results:
        rec = scored.record
        prefix = rec.text[:60].replace("\n", " ")
        print(f"{rec.chunk_id}\t{scored.score:.6f}\t{format_display_time(rec.start_ms)}\t{prefix}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app_from_config

    config = load_config(args.config)
    app = create_app_from_config(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def cmd_stats(args) -> int:
    stats = UsageLog(args.log).stats()
    print(json.dumps(stats.to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vidtutor",
        description="Index lecture transcripts and serve lecture-grounded programming feedback.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="parse, chunk, embed and store one transcript")
    p_index.add_argument("--srt", required=True, help="path to the .srt transcript")
    p_index.add_argument("--video", required=True, help="name of the source video file")
    p_index.add_argument("--store", required=True, help="store directory")
    p_index.add_argument("--replace", action="store_true", help="replace existing chunks of this video")
    p_index.add_argument("--embedder", choices=["local", "remote"], default="local")
    p_index.add_argument("--dim", type=int, default=256)
    p_index.add_argument("--size", type=int, default=CHUNK_SIZE)
    p_index.add_argument("--overlap", type=int, default=CHUNK_OVERLAP)
    p_index.set_defaults(func=cmd_index)

    p_search = sub.add_parser("search", help="query a store")
    p_search.add_argument("--store", required=True)
    p_search.add_argument("--query", required=True)
    p_search.add_argument("--k", type=int, default=4)
    p_search.add_argument("--embedder", choices=["local", "remote"], default="local")
    p_search.add_argument("--dim", type=int, default=256)
    p_search.set_defaults(func=cmd_search)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--config", required=True, help="path to the JSON config file")
    p_serve.set_defaults(func=cmd_serve)

    p_stats = sub.add_parser("stats", help="print usage statistics for a log file")
    p_stats.add_argument("--log", required=True)
    p_stats.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VidtutorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
