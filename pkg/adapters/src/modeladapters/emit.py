"""Materialize core file formats from a model backend.

Backtranslations land as candidate JSONL (one row per corpus question,
system "en-<pivot>", the producing model ids pinned in provenance);
embeddings land as the vector file store the scoring pipeline reads.
"""

from __future__ import annotations

import dataclasses
import json
import unicodedata
from pathlib import Path

from paraqa import corpus as corpus_io
from paraqa import paragen

from .backends import PIVOTS, EmbeddingBackend, StubEmbedder, StubTranslator, TranslationBackend
from .errors import UnknownPivot

__all__ = ["emit_backtranslations", "emit_embeddings"]


def emit_backtranslations(
    corpus_path: str | Path,
    pivot: str,
    out_path: str | Path,
    translator: TranslationBackend | None = None,
) -> int:
    """Round-trip every corpus question through the pivot language and
    write the resulting candidates; returns the row count."""
    if pivot not in PIVOTS:
        raise UnknownPivot(f"pivot {pivot!r} not in {list(PIVOTS)}")
    backend = translator or StubTranslator()
    corpus = corpus_io.load(corpus_path)
    provenance = backend.model_id_for(pivot)
    candidates = [
        dataclasses.replace(
            paragen.backtranslate(dp.question, pivot, backend, uid=dp.uid),
            provenance=provenance,
        )
        for dp in corpus
    ]
    paragen.save_candidates(candidates, Path(out_path))
    return len(candidates)


def emit_embeddings(
    texts_path: str | Path,
    out_path: str | Path,
    embedder: EmbeddingBackend | None = None,
) -> int:
    """Embed each distinct line of the texts file into a vector store.

    Lines are deduplicated by NFC form (the store's lookup key); blank
    lines are skipped.  Returns the number of rows written.
    """
    backend = embedder or StubEmbedder()
    texts: list[str] = []
    seen: set[str] = set()
    with open(texts_path, encoding="utf-8") as fh:
        for line in fh:
            text = line.rstrip("\n")
            key = unicodedata.normalize("NFC", text)
            if not text.strip() or key in seen:
                continue
            seen.add(key)
            texts.append(text)
    vectors = backend.embed_batch(texts) if texts else []
    with open(out_path, "w", encoding="utf-8") as fh:
        for text, vector in zip(texts, vectors):
            fh.write(
                json.dumps(
                    {"text": text, "vector": list(vector), "model_id": backend.model_id},
                    ensure_ascii=False,
                )
                + "\n"
            )
    return len(texts)
