"""Model backends behind the adapter scripts.

Two families: pivot translation (en <-> de/fr/hi/ru/zh) and sentence
embedding.  Each family has a deterministic offline stub, used by
default and in tests, and a loader for published pretrained
checkpoints.  Checkpoints are pinned by model id so emitted files
record exactly which model produced them.
"""

from __future__ import annotations

import hashlib
import math
import random
import unicodedata
from collections.abc import Callable, Sequence
from typing import Any, Protocol, runtime_checkable

from .errors import AdapterError, UnknownPivot

__all__ = [
    "PIVOTS",
    "OPUS_MT_FORWARD",
    "OPUS_MT_BACKWARD",
    "SENTENCE_EMBEDDING_MODEL",
    "TranslationBackend",
    "EmbeddingBackend",
    "StubTranslator",
    "OpusMtTranslator",
    "StubEmbedder",
    "SentenceTransformerEmbedder",
    "make_translator",
    "make_embedder",
]

PIVOTS: tuple[str, ...] = ("de", "fr", "hi", "ru", "zh")

OPUS_MT_FORWARD: dict[str, str] = {p: f"Helsinki-NLP/opus-mt-en-{p}" for p in PIVOTS}
OPUS_MT_BACKWARD: dict[str, str] = {p: f"Helsinki-NLP/opus-mt-{p}-en" for p in PIVOTS}
SENTENCE_EMBEDDING_MODEL = "sentence-transformers/all-MiniLM-L6-v2"


@runtime_checkable
class TranslationBackend(Protocol):
    """Pivot translation plus the model-id string recorded in outputs."""

    supported_pivots: frozenset[str]

    def translate(self, text: str, src: str, tgt: str) -> str: ...

    def model_id_for(self, pivot: str) -> str: ...


@runtime_checkable
class EmbeddingBackend(Protocol):
    """Order-preserving batch embedding with a fixed model id."""

    model_id: str

    def embed_batch(self, texts: Sequence[str]) -> list[tuple[float, ...]]: ...


# One fixed rewrite keeps stub round trips paraphrase-shaped instead of
# echoing the input verbatim.
_REWRITES: tuple[tuple[str, str], ...] = (
    ("What is", "What's"),
    ("How many", "What number of"),
    ("Which", "What"),
)


class StubTranslator:
    """Deterministic offline stand-in for the pivot-translation models.

    The forward pass tags the text with the pivot language; the backward
    pass strips the tag and applies one fixed English rewrite, so a
    round trip yields a stable paraphrase-shaped variant with no model.
    """

    supported_pivots = frozenset(PIVOTS)

    def model_id_for(self, pivot: str) -> str:
        return "stub-translator"

    def translate(self, text: str, src: str, tgt: str) -> str:
        if src == "en" and tgt in self.supported_pivots:
            return f"{tgt}:: {text}"
        if src in self.supported_pivots and tgt == "en":
            stripped = text.removeprefix(f"{src}:: ")
            for old, new in _REWRITES:
                if old in stripped:
                    return stripped.replace(old, new, 1)
            return stripped
        raise UnknownPivot(f"unsupported direction {src!r} -> {tgt!r}")


def _load_marian_pipeline(model_id: str) -> Any:
    from transformers import pipeline

    return pipeline("translation", model=model_id)


class OpusMtTranslator:
    """Marian checkpoints from the OPUS-MT family, one per direction.

    Models load lazily and are cached per direction; a failed load
    aborts the whole run rather than degrading silently.
    """

    supported_pivots = frozenset(PIVOTS)

    def __init__(self, loader: Callable[[str], Any] | None = None) -> None:
        self._loader = loader or _load_marian_pipeline
        self._pipelines: dict[str, Any] = {}

    def model_id_for(self, pivot: str) -> str:
        if pivot not in self.supported_pivots:
            raise UnknownPivot(f"pivot {pivot!r} not in {sorted(self.supported_pivots)}")
        return f"{OPUS_MT_FORWARD[pivot]}+{OPUS_MT_BACKWARD[pivot]}"

    def _pipeline(self, model_id: str) -> Any:
        if model_id not in self._pipelines:
            try:
                self._pipelines[model_id] = self._loader(model_id)
            except Exception as exc:
                raise AdapterError(f"cannot load {model_id!r}: {exc}") from exc
        return self._pipelines[model_id]

    def translate(self, text: str, src: str, tgt: str) -> str:
        if src == "en" and tgt in self.supported_pivots:
            model_id = OPUS_MT_FORWARD[tgt]
        elif src in self.supported_pivots and tgt == "en":
            model_id = OPUS_MT_BACKWARD[src]
        else:
            raise UnknownPivot(f"unsupported direction {src!r} -> {tgt!r}")
        out = self._pipeline(model_id)(text)
        return str(out[0]["translation_text"])


class StubEmbedder:
    """Deterministic offline embedder: one seeded unit vector per text.

    Vectors are a pure function of the NFC form of the text, so a store
    regenerates bit-identically on any machine.
    """

    model_id = "stub-embedder-32d"
    dim = 32

    def embed_batch(self, texts: Sequence[str]) -> list[tuple[float, ...]]:
        return [self._one(t) for t in texts]

    def _one(self, text: str) -> tuple[float, ...]:
        digest = hashlib.blake2b(
            unicodedata.normalize("NFC", text).encode("utf-8"), digest_size=8
        ).digest()
        rng = random.Random(int.from_bytes(digest, "big"))
        raw = [rng.uniform(-1.0, 1.0) for _ in range(self.dim)]
        norm = math.sqrt(math.fsum(x * x for x in raw))
        return tuple(x / norm for x in raw)


def _load_sentence_transformer(model_id: str) -> Any:
    from sentence_transformers import SentenceTransformer

    return SentenceTransformer(model_id)


class SentenceTransformerEmbedder:
    """Published sentence-embedding checkpoint, pinned by model id."""

    def __init__(
        self,
        model_id: str = SENTENCE_EMBEDDING_MODEL,
        loader: Callable[[str], Any] | None = None,
    ) -> None:
        self.model_id = model_id
        self._loader = loader or _load_sentence_transformer
        self._model: Any = None

    def embed_batch(self, texts: Sequence[str]) -> list[tuple[float, ...]]:
        if self._model is None:
            try:
                self._model = self._loader(self.model_id)
            except Exception as exc:
                raise AdapterError(f"cannot load {self.model_id!r}: {exc}") from exc
        vectors = self._model.encode(list(texts))
        return [tuple(float(x) for x in vec) for vec in vectors]


_TRANSLATORS: dict[str, Callable[[], TranslationBackend]] = {
    "stub": StubTranslator,
    "opus-mt": OpusMtTranslator,
}

_EMBEDDERS: dict[str, Callable[[], EmbeddingBackend]] = {
    "stub": StubEmbedder,
    "minilm": SentenceTransformerEmbedder,
}


def make_translator(name: str) -> TranslationBackend:
    try:
        return _TRANSLATORS[name]()
    except KeyError:
        raise AdapterError(f"unknown translation backend {name!r}") from None


def make_embedder(name: str) -> EmbeddingBackend:
    try:
        return _EMBEDDERS[name]()
    except KeyError:
        raise AdapterError(f"unknown embedding backend {name!r}") from None
