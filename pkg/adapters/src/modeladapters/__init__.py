"""Adapters that run pretrained translation/embedding models and write
their outputs in the scoring pipeline's native file formats."""

from __future__ import annotations

from .backends import (
    OPUS_MT_BACKWARD,
    OPUS_MT_FORWARD,
    PIVOTS,
    SENTENCE_EMBEDDING_MODEL,
    EmbeddingBackend,
    OpusMtTranslator,
    SentenceTransformerEmbedder,
    StubEmbedder,
    StubTranslator,
    TranslationBackend,
    make_embedder,
    make_translator,
)
from .emit import emit_backtranslations, emit_embeddings
from .errors import AdapterError, UnknownPivot
from .service import create_app

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
    "emit_backtranslations",
    "emit_embeddings",
    "create_app",
    "AdapterError",
    "UnknownPivot",
]
