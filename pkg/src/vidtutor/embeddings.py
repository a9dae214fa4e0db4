"""Text-to-vector providers and cosine similarity.

Two providers share one contract: a remote HTTP embedding service for
production and a deterministic hashed bag-of-words embedder so the whole
pipeline (indexing, retrieval, feedback) runs and tests fully offline.
Query and corpus must always use the same provider; stores record the
provider id in their manifest to enforce that.
"""

from __future__ import annotations

import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import httpx

from .errors import DimensionMismatch, ProviderUnavailable

# FNV-1a, 64 bit. Chosen for the local embedder because it is stable across
# processes and trivially portable to other languages.
FNV1A_OFFSET = 0xCBF29CE484222325
FNV1A_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def fnv1a_64(data: bytes) -> int:
    h = FNV1A_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV1A_PRIME) & _MASK64
    return h


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity in [-1, 1]; defined as 0.0 when either norm is zero.

    Raises:
        DimensionMismatch: vectors differ in length.
    """
    if len(a) != len(b):
        raise DimensionMismatch(f"cosine over dims {len(a)} vs {len(b)}")
    dot = 0.0
    norm_a = 0.0
    norm_b = 0.0
    for x, y in zip(a, b):
        dot += x * y
        norm_a += x * x
        norm_b += y * y
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / math.sqrt(norm_a * norm_b)


@dataclass(frozen=True)
class EmbedderDescriptor:
    """Identity and output dimension of an embedding provider."""

    id: str
    dim: int


class Embedder(ABC):
    """Provider contract: deterministic per provider, fixed output dimension."""

    descriptor: EmbedderDescriptor

    @abstractmethod
    def embed(self, text: str) -> list[float]:
        ...

    def embed_many(self, texts: Sequence[str]) -> list[list[float]]:
        return [self.embed(t) for t in texts]


class LocalHashEmbedder(Embedder):
    """Hashed bag-of-words: lowercase, split on non-alphanumerics, FNV-1a
    bucket counts, L2-normalized. All-zero counts yield the zero vector."""

    def __init__(self, dim: int = 256):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.descriptor = EmbedderDescriptor(id="local-hash-v1", dim=dim)

    def embed(self, text: str) -> list[float]:
        dim = self.descriptor.dim
        counts = [0.0] * dim
        for token in _TOKEN_RE.findall(text.lower()):
            counts[fnv1a_64(token.encode("utf-8")) % dim] += 1.0
        norm = math.sqrt(sum(c * c for c in counts))
        if norm == 0.0:
            return counts
        return [c / norm for c in counts]


class RemoteEmbedder(Embedder):
    """Client for an HTTP embedding service.

    Wire contract: POST ``{"model": id, "input": [texts]}`` to the endpoint;
    the response carries ``{"data": [{"embedding": [...]}, ...]}`` with one
    vector per input, in order. Texts are forwarded verbatim.
    """

    def __init__(
        self,
        api_url: str,
        model: str,
        dim: int,
        api_key: str = "",
        timeout_s: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.descriptor = EmbedderDescriptor(id=model, dim=dim)
        self._url = api_url
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(headers=headers, timeout=timeout_s, transport=transport)

    def embed(self, text: str) -> list[float]:
        return self.embed_many([text])[0]

    def embed_many(self, texts: Sequence[str]) -> list[list[float]]:
        payload = {"model": self.descriptor.id, "input": list(texts)}
        try:
            response = self._client.post(self._url, json=payload)
            response.raise_for_status()
            body = response.json()
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"embedding service: {exc}") from exc

        try:
            vectors = [item["embedding"] for item in body["data"]]
        except (KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"embedding service returned malformed body: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProviderUnavailable(
                f"embedding service returned {len(vectors)} vectors for {len(texts)} inputs"
            )
        for vec in vectors:
            if len(vec) != self.descriptor.dim:
                raise DimensionMismatch(
                    f"embedding service returned dim {len(vec)}, expected {self.descriptor.dim}"
                )
        return [[float(x) for x in vec] for vec in vectors]

    def close(self) -> None:
        self._client.close()
