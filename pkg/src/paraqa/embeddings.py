"""Embedding providers behind one small interface.

The package never hosts an embedding model.  Vectors come either from
a pre-materialized file store (JSONL of {"text", "vector"} rows) or
from an HTTP service implementing POST /embed.  Both providers share
an in-memory cache keyed by NFC-normalized text, so repeated scoring
of the same sentence hits the store once.
"""

from __future__ import annotations

import json
import os
import threading
import unicodedata
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import ParaqaError
from .metrics import cosine_similarity

__all__ = [
    "EmbeddingVector",
    "EmbeddingProvider",
    "FileStoreProvider",
    "HttpProvider",
    "MissingEmbedding",
    "ServiceUnavailable",
    "MalformedResponse",
    "ENV_URI",
    "provider_from_uri",
    "embed_batch",
    "similarity_cs",
]

ENV_URI = "PARAQA_EMBED_URI"


class MissingEmbedding(ParaqaError):
    """The file store has no vector for the requested text."""


class ServiceUnavailable(ParaqaError):
    """The embedding service could not be reached or returned non-200."""


class MalformedResponse(ParaqaError):
    """The embedding service answered with an unusable payload."""


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model_id: str

    @property
    def dim(self) -> int:
        return len(self.values)


def _norm(text: str) -> str:
    return unicodedata.normalize("NFC", text)


class EmbeddingProvider(ABC):
    """Order-preserving batch embedding with caching.

    All vectors from one provider share a dimension and a model id;
    a provider that would violate that raises MalformedResponse.
    """

    def __init__(self) -> None:
        self._cache: dict[str, EmbeddingVector] = {}
        self._lock = threading.Lock()

    @property
    @abstractmethod
    def model_id(self) -> str: ...

    @abstractmethod
    def _fetch(self, texts: list[str]) -> list[EmbeddingVector]:
        """Fetch vectors for texts not found in the cache."""

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        keys = [_norm(t) for t in texts]
        with self._lock:
            missing = []
            seen = set()
            for k in keys:
                if k not in self._cache and k not in seen:
                    missing.append(k)
                    seen.add(k)
            if missing:
                fetched = self._fetch(missing)
                if len(fetched) != len(missing):
                    raise MalformedResponse(
                        f"asked for {len(missing)} vectors, got {len(fetched)}"
                    )
                for k, vec in zip(missing, fetched):
                    self._cache[k] = vec
            return [self._cache[k] for k in keys]


class FileStoreProvider(EmbeddingProvider):
    """Vectors read once from a JSONL file of {"text", "vector"} rows.

    Lookup is by exact NFC-normalized string.  Rows may carry a
    "model_id"; the first one seen names the store and later rows must
    agree.  A text without a row raises MissingEmbedding.
    """

    def __init__(self, path: str | Path) -> None:
        super().__init__()
        self._path = Path(path)
        self._store: dict[str, tuple[float, ...]] = {}
        self._model_id = ""
        self._dim = 0
        with open(self._path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    text = row["text"]
                    vector = tuple(float(x) for x in row["vector"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise ParaqaError(
                        f"{self._path}:{line_no}: bad embedding row: {exc}"
                    ) from exc
                if not vector:
                    raise ParaqaError(f"{self._path}:{line_no}: empty vector")
                row_model = str(row.get("model_id", ""))
                if row_model:
                    if self._model_id and row_model != self._model_id:
                        raise ParaqaError(
                            f"{self._path}:{line_no}: mixed model ids "
                            f"{self._model_id!r} and {row_model!r}"
                        )
                    self._model_id = row_model
                if self._dim and len(vector) != self._dim:
                    raise ParaqaError(
                        f"{self._path}:{line_no}: dimension {len(vector)} != {self._dim}"
                    )
                self._dim = len(vector)
                self._store[_norm(text)] = vector
        if not self._model_id:
            self._model_id = f"file-store:{self._path.name}"

    @property
    def model_id(self) -> str:
        return self._model_id

    def _fetch(self, texts: list[str]) -> list[EmbeddingVector]:
        out = []
        for t in texts:
            vec = self._store.get(t)
            if vec is None:
                raise MissingEmbedding(f"no stored vector for {t!r}")
            out.append(EmbeddingVector(values=vec, model_id=self._model_id))
        return out


class HttpProvider(EmbeddingProvider):
    """Client for an embedding service.

    Contract: POST {base_url}/embed with {"texts": [...]} returns
    {"model_id": "...", "vectors": [[...], ...]} with vectors in
    request order.  Anything but HTTP 200 raises ServiceUnavailable;
    a payload of the wrong shape raises MalformedResponse.
    """

    def __init__(self, base_url: str, timeout: float = 30.0) -> None:
        super().__init__()
        self._url = base_url.rstrip("/") + "/embed"
        self._timeout = timeout
        self._model_id = ""
        self._dim = 0

    @property
    def model_id(self) -> str:
        return self._model_id

    def _fetch(self, texts: list[str]) -> list[EmbeddingVector]:
        try:
            resp = requests.post(
                self._url, json={"texts": texts}, timeout=self._timeout
            )
        except requests.RequestException as exc:
            raise ServiceUnavailable(f"POST {self._url}: {exc}") from exc
        if resp.status_code != 200:
            raise ServiceUnavailable(f"POST {self._url}: HTTP {resp.status_code}")
        try:
            payload = resp.json()
            model_id = str(payload["model_id"])
            vectors = [tuple(float(x) for x in v) for v in payload["vectors"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedResponse(f"bad /embed payload: {exc}") from exc
        if len(vectors) != len(texts):
            raise MalformedResponse(
                f"asked for {len(texts)} vectors, got {len(vectors)}"
            )
        for v in vectors:
            if not v:
                raise MalformedResponse("empty vector in response")
            if self._dim and len(v) != self._dim:
                raise MalformedResponse(
                    f"dimension {len(v)} != established {self._dim}"
                )
            self._dim = len(v)
        if self._model_id and model_id != self._model_id:
            raise MalformedResponse(
                f"model id changed from {self._model_id!r} to {model_id!r}"
            )
        self._model_id = model_id
        return [EmbeddingVector(values=v, model_id=model_id) for v in vectors]


def provider_from_uri(uri: str | None = None) -> EmbeddingProvider:
    """Build a provider from "file:<path>" or "http(s)://<url>".

    With no argument the PARAQA_EMBED_URI environment variable is used.
    """
    uri = uri or os.environ.get(ENV_URI, "")
    if not uri:
        raise ParaqaError(
            f"no embedding provider configured (set {ENV_URI} or pass a URI)"
        )
    if uri.startswith("file:"):
        return FileStoreProvider(uri[len("file:") :])
    if uri.startswith(("http://", "https://")):
        return HttpProvider(uri)
    raise ParaqaError(f"unsupported provider URI {uri!r}")


def embed_batch(texts: Sequence[str], provider: EmbeddingProvider) -> list[EmbeddingVector]:
    """Embed texts in order; every returned vector has the provider's
    model id and a consistent dimension."""
    return provider.embed(texts)


def similarity_cs(candidate: str, source: str, provider: EmbeddingProvider) -> float:
    """Cosine similarity between candidate and source embeddings."""
    cand_vec, src_vec = provider.embed([candidate, source])
    return cosine_similarity(cand_vec.values, src_vec.values)
