"""Automatic lint checks for question-paraphrase datasets.

Five independent detectors cover the error classes that show up when
paraphrases are produced by crowdsourcing over templated questions:
leaked file names, empty or placeholder fields, accents dropped during
retyping, un-expanded template terms, and paraphrases identical to
their question.  scan() applies all of them and reports per-category
frequencies; filter_rejected() drops every flagged data point.
"""

from __future__ import annotations

import re
import unicodedata
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from .corpus import Corpus, DataPoint
from .metrics import tokenize

__all__ = [
    "CATEGORIES",
    "Locus",
    "ErrorFlag",
    "ScanConfig",
    "ErrorReport",
    "detect_file_extension",
    "detect_empty_or_na",
    "detect_missing_accents",
    "detect_template_terms",
    "detect_identical",
    "scan",
    "filter_rejected",
]

CATEGORIES = (
    "FileExtension",
    "EmptyField",
    "MissingAccents",
    "TemplateTerm",
    "IdenticalParaphrase",
)


class Locus(str, Enum):
    QUESTION = "Question"
    PARAPHRASE = "Paraphrase"
    BOTH = "Both"

    def __str__(self) -> str:  # pragma: no cover
        return self.value


@dataclass(frozen=True)
class ErrorFlag:
    category: str
    locus: Locus


@dataclass(frozen=True)
class ScanConfig:
    """Detector knobs: the extension list, the placeholder vocabulary,
    and the template delimiters."""

    extensions: frozenset[str] = frozenset(
        {"jpg", "jpeg", "png", "gif", "svg", "pdf", "tif", "tiff"}
    )
    na_values: frozenset[str] = frozenset({"n/a", "na", "none", "null", "nil", "-"})
    braces: str = "{}"


DEFAULT_CONFIG = ScanConfig()


@lru_cache(maxsize=None)
def _extension_re(extensions: frozenset[str]) -> re.Pattern:
    # longest first so ".tiff" is not cut short at ".tif"
    alts = "|".join(re.escape(e) for e in sorted(extensions, key=len, reverse=True))
    return re.compile(rf"\.(?:{alts})\b", re.IGNORECASE)


def detect_file_extension(text: str, config: ScanConfig = DEFAULT_CONFIG) -> bool:
    """True when the text contains a file extension such as ".jpg".

    Matches ".ext" at a word boundary, case-insensitively.  Decimal
    numbers like 3.5 do not match because the digits after the dot are
    not in the extension set.
    """
    return _extension_re(config.extensions).search(text) is not None


def detect_empty_or_na(text: str, config: ScanConfig = DEFAULT_CONFIG) -> bool:
    """True when the trimmed text is empty or a placeholder ("n/a",
    "none", ...).  Whole-string match only: "Nathan" is fine."""
    stripped = text.strip()
    return not stripped or stripped.lower() in config.na_values


def _strip_marks(token: str) -> str:
    decomposed = unicodedata.normalize("NFD", token)
    return unicodedata.normalize(
        "NFC", "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    )


def detect_missing_accents(question: str, paraphrase: str) -> bool:
    """True when a diacritic-bearing question token appears in the
    paraphrase only in stripped form.

    A token counts as diacritic-bearing when its canonical (NFD)
    decomposition contains a combining mark.  The stripped form must
    occur as a paraphrase token while the original does not; unrelated
    words that merely share the stripped spelling ("Josefa" for "José")
    do not trigger.
    """
    p_tokens = set(tokenize(paraphrase))
    for token in tokenize(question):
        stripped = _strip_marks(token)
        if stripped != token and stripped in p_tokens and token not in p_tokens:
            return True
    return False


def detect_template_terms(text: str, config: ScanConfig = DEFAULT_CONFIG) -> bool:
    """True when the text still contains a template delimiter."""
    return any(ch in text for ch in config.braces)


_WS_RUN = re.compile(r"\s+")


def _canonical(text: str) -> str:
    return unicodedata.normalize("NFC", _WS_RUN.sub(" ", text.strip()))


def detect_identical(question: str, paraphrase: str) -> bool:
    """True when question and paraphrase are equal after trimming,
    whitespace collapsing and NFC normalization.  Case matters: a
    case-only rewording is not flagged here."""
    return _canonical(question) == _canonical(paraphrase)


@dataclass
class ErrorReport:
    """Scan result: which uids were flagged, for what, and where."""

    size: int
    flags: dict[str, list[ErrorFlag]] = field(default_factory=dict)

    def category_uids(self, category: str) -> list[str]:
        return [
            uid
            for uid, fl in self.flags.items()
            if any(f.category == category for f in fl)
        ]

    def category_counts(self) -> dict[str, int]:
        return {c: len(self.category_uids(c)) for c in CATEGORIES}

    def category_percentages(self) -> dict[str, float]:
        if self.size == 0:
            return {c: 0.0 for c in CATEGORIES}
        return {
            c: round(100.0 * n / self.size, 1)
            for c, n in self.category_counts().items()
        }

    @property
    def rejected_uids(self) -> list[str]:
        return list(self.flags)

    def total_rejected_pct(self) -> float:
        if self.size == 0:
            return 0.0
        return round(100.0 * len(self.flags) / self.size, 1)

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "category_counts": self.category_counts(),
            "category_percentages": self.category_percentages(),
            "total_rejected": len(self.flags),
            "total_rejected_pct": self.total_rejected_pct(),
            "flags": {
                uid: [{"category": f.category, "locus": f.locus.value} for f in fl]
                for uid, fl in self.flags.items()
            },
        }


def _locus(in_question: bool, in_paraphrase: bool) -> Locus:
    if in_question and in_paraphrase:
        return Locus.BOTH
    return Locus.QUESTION if in_question else Locus.PARAPHRASE


def _flags_for(dp: DataPoint, config: ScanConfig) -> list[ErrorFlag]:
    flags = []
    q_ext = detect_file_extension(dp.question, config)
    p_ext = detect_file_extension(dp.paraphrase, config)
    if q_ext or p_ext:
        flags.append(ErrorFlag("FileExtension", _locus(q_ext, p_ext)))
    q_empty = detect_empty_or_na(dp.question, config)
    p_empty = detect_empty_or_na(dp.paraphrase, config)
    if q_empty or p_empty:
        flags.append(ErrorFlag("EmptyField", _locus(q_empty, p_empty)))
    if detect_missing_accents(dp.question, dp.paraphrase):
        flags.append(ErrorFlag("MissingAccents", Locus.PARAPHRASE))
    q_tmpl = detect_template_terms(dp.question, config)
    p_tmpl = detect_template_terms(dp.paraphrase, config)
    if q_tmpl or p_tmpl:
        flags.append(ErrorFlag("TemplateTerm", _locus(q_tmpl, p_tmpl)))
    if detect_identical(dp.question, dp.paraphrase):
        flags.append(ErrorFlag("IdenticalParaphrase", Locus.BOTH))
    return flags


def scan(corpus: Corpus | Iterable[DataPoint], config: ScanConfig = DEFAULT_CONFIG) -> ErrorReport:
    """Run every detector over every data point.

    A data point may be flagged in several categories, but counts once
    in the rejection total, so the total percentage never exceeds the
    sum of the per-category ones.
    """
    items = list(corpus)
    report = ErrorReport(size=len(items))
    for dp in items:
        flags = _flags_for(dp, config)
        if flags:
            report.flags[dp.uid] = flags
    return report


def filter_rejected(corpus: Corpus, report: ErrorReport) -> Corpus:
    """Corpus minus every flagged data point, order preserved."""
    kept = [dp for dp in corpus if dp.uid not in report.flags]
    return Corpus(items=kept, source=corpus.source, loaded_at=corpus.loaded_at)
