"""Paraphrase candidates and where they come from.

Candidates are either loaded from files produced offline (one JSONL
row per candidate, tagged with the system that generated it) or
produced live by round-trip machine translation through a pivot
language.  Lexical paraphrasing draws on a PPDB-style flat file of
scored phrase pairs.
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections.abc import Collection, Iterable
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Protocol, runtime_checkable

import requests

from .errors import ParaqaError

__all__ = [
    "CandidateParaphrase",
    "CandidateLoad",
    "MalformedRow",
    "UnsupportedPivot",
    "TranslationService",
    "HttpTranslationService",
    "Relation",
    "PpdbEntry",
    "PpdbIndex",
    "MalformedLine",
    "load_candidates",
    "save_candidates",
    "backtranslate",
    "ppdb_load",
    "ppdb_paraphrase",
]


class MalformedRow(ParaqaError):
    """A candidate file row could not be parsed."""


class UnsupportedPivot(ParaqaError):
    """The translation service does not offer the requested pivot."""


class MalformedLine(ParaqaError):
    """A phrase-table line could not be parsed (reported, then skipped)."""


@dataclass(frozen=True)
class CandidateParaphrase:
    """One candidate paraphrase of the question identified by uid,
    produced by the named system."""

    uid: str
    system: str
    text: str
    provenance: str = "file"


@dataclass
class CandidateLoad:
    """Loaded candidates plus the uids that were not found in the
    corpus they are meant to be scored against (never dropped, only
    reported)."""

    items: list[CandidateParaphrase]
    unknown_uids: list[str] = field(default_factory=list)

    def by_system(self) -> dict[str, list[CandidateParaphrase]]:
        grouped: dict[str, list[CandidateParaphrase]] = {}
        for c in self.items:
            grouped.setdefault(c.system, []).append(c)
        return grouped


def load_candidates(
    path: str | Path, known_uids: Collection[str] | None = None
) -> CandidateLoad:
    """Read candidates from JSONL rows of {"uid", "system", "text"}.

    A row that is not an object with those three string fields raises
    MalformedRow naming the line.  When known_uids is given, uids
    outside it are collected into the warning list.
    """
    path = Path(path)
    items: list[CandidateParaphrase] = []
    unknown: list[str] = []
    seen_unknown: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRow(f"{path}:{line_no}: bad JSON: {exc}") from exc
            if not isinstance(row, dict):
                raise MalformedRow(f"{path}:{line_no}: row is not an object")
            try:
                uid, system, text = row["uid"], row["system"], row["text"]
            except KeyError as exc:
                raise MalformedRow(f"{path}:{line_no}: missing field {exc}") from exc
            if isinstance(uid, int) and not isinstance(uid, bool):
                uid = str(uid)
            if not isinstance(uid, str) or not isinstance(system, str) or not isinstance(text, str):
                raise MalformedRow(f"{path}:{line_no}: fields must be text")
            items.append(
                CandidateParaphrase(
                    uid=uid,
                    system=system,
                    text=text,
                    provenance=str(row.get("provenance", "file")),
                )
            )
            if known_uids is not None and uid not in known_uids:
                if uid not in seen_unknown:
                    unknown.append(uid)
                    seen_unknown.add(uid)
    return CandidateLoad(items=items, unknown_uids=unknown)


def save_candidates(candidates: Iterable[CandidateParaphrase], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in candidates:
            fh.write(
                json.dumps(
                    {
                        "uid": c.uid,
                        "system": c.system,
                        "text": c.text,
                        "provenance": c.provenance,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


@runtime_checkable
class TranslationService(Protocol):
    """Anything that can translate between language codes."""

    supported_pivots: frozenset[str]

    def translate(self, text: str, src: str, tgt: str) -> str: ...


class HttpTranslationService:
    """Client for a translation service.

    Contract: POST {base_url}/translate with {"text", "src", "tgt"}
    returns {"text": "..."}.  Non-200 or an unreachable host raises
    ParaqaError; the caller decides whether to retry.
    """

    def __init__(
        self,
        base_url: str,
        supported_pivots: Collection[str] = ("de", "fr", "hi", "ru", "zh"),
        timeout: float = 60.0,
    ) -> None:
        self._url = base_url.rstrip("/") + "/translate"
        self.supported_pivots = frozenset(supported_pivots)
        self._timeout = timeout

    def translate(self, text: str, src: str, tgt: str) -> str:
        try:
            resp = requests.post(
                self._url,
                json={"text": text, "src": src, "tgt": tgt},
                timeout=self._timeout,
            )
        except requests.RequestException as exc:
            raise ParaqaError(f"POST {self._url}: {exc}") from exc
        if resp.status_code != 200:
            raise ParaqaError(f"POST {self._url}: HTTP {resp.status_code}")
        try:
            return str(resp.json()["text"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ParaqaError(f"bad /translate payload: {exc}") from exc


def backtranslate(
    question: str,
    pivot: str,
    service: TranslationService,
    uid: str = "",
) -> CandidateParaphrase:
    """Round-trip question through the pivot language: en -> pivot -> en.

    Exactly two translation calls.  The resulting candidate is tagged
    with system "en-<pivot>" and provenance "live-service".
    """
    if pivot not in service.supported_pivots:
        raise UnsupportedPivot(
            f"pivot {pivot!r} not in {sorted(service.supported_pivots)}"
        )
    forward = service.translate(question, "en", pivot)
    back = service.translate(forward, pivot, "en")
    return CandidateParaphrase(
        uid=uid, system=f"en-{pivot}", text=back, provenance="live-service"
    )


class Relation(str, Enum):
    EQUIVALENCE = "Equivalence"
    FORWARD_ENTAILMENT = "ForwardEntailment"
    REVERSE_ENTAILMENT = "ReverseEntailment"
    EXCLUSION = "Exclusion"
    OTHER_RELATED = "OtherRelated"
    INDEPENDENT = "Independent"

    def __str__(self) -> str:  # pragma: no cover
        return self.value


@dataclass(frozen=True)
class PpdbEntry:
    phrase: str
    paraphrase: str
    score: float
    relation: Relation


def _norm_phrase(text: str) -> str:
    return unicodedata.normalize("NFC", text.strip().lower())


@dataclass
class PpdbIndex:
    """Phrase table keyed by lowercased NFC phrase, entries sorted by
    descending score.  skipped counts malformed input lines."""

    entries: dict[str, list[PpdbEntry]] = field(default_factory=dict)
    min_score: float = -math.inf
    relations: frozenset[Relation] = frozenset(Relation)
    skipped: int = 0

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def lookup(self, phrase: str, k: int | None = None) -> list[PpdbEntry]:
        found = self.entries.get(_norm_phrase(phrase), [])
        return found[:k] if k is not None else list(found)

    def save(self, path: str | Path) -> None:
        """Write the index back in the flat six-field format; loading
        the file again (with no extra filtering) restores the index."""
        with open(path, "w", encoding="utf-8") as fh:
            for key in sorted(self.entries):
                for e in self.entries[key]:
                    fh.write(
                        f"[X] ||| {e.phrase} ||| {e.paraphrase} ||| "
                        f"PPDB2.0Score={e.score!r} ||| - ||| {e.relation.value}\n"
                    )


def _parse_line(line: str, where: str) -> PpdbEntry:
    fields = [f.strip() for f in line.split("|||")]
    if len(fields) != 6:
        raise MalformedLine(f"{where}: expected 6 fields, got {len(fields)}")
    _, phrase, paraphrase, features, _, entailment = fields
    if not phrase or not paraphrase:
        raise MalformedLine(f"{where}: empty phrase field")
    score = None
    fallback = None
    for feat in features.split():
        name, _, value = feat.partition("=")
        if not value:
            continue
        try:
            number = float(value)
        except ValueError:
            continue
        if name == "PPDB2.0Score":
            score = number
            break
        if fallback is None:
            fallback = number
    if score is None:
        score = fallback
    if score is None:
        raise MalformedLine(f"{where}: no numeric feature to use as score")
    try:
        relation = Relation(entailment)
    except ValueError:
        raise MalformedLine(f"{where}: unknown relation {entailment!r}") from None
    return PpdbEntry(
        phrase=phrase, paraphrase=paraphrase, score=score, relation=relation
    )


def ppdb_load(
    path: str | Path,
    min_score: float = -math.inf,
    relations: Collection[Relation] = frozenset(Relation),
) -> PpdbIndex:
    """Load a flat phrase table: six |||-delimited fields per line
    (label, phrase, paraphrase, features, alignment, entailment).

    Lines failing the score or relation filters are dropped silently;
    lines that cannot be parsed at all are skipped and counted in
    index.skipped.
    """
    path = Path(path)
    index = PpdbIndex(min_score=min_score, relations=frozenset(relations))
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                entry = _parse_line(line, f"{path}:{line_no}")
            except MalformedLine:
                index.skipped += 1
                continue
            if entry.score < min_score or entry.relation not in index.relations:
                continue
            index.entries.setdefault(_norm_phrase(entry.phrase), []).append(entry)
    for key in index.entries:
        index.entries[key].sort(key=lambda e: (-e.score, e.paraphrase))
    return index


def ppdb_paraphrase(index: PpdbIndex, phrase: str, k: int = 5) -> list[PpdbEntry]:
    """Top-k entries for the phrase, best score first.  An unknown
    phrase yields [] (absence of evidence, not an error)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return index.lookup(phrase, k)
