"""Surface metrics for paraphrase quality.

The textual side is sentence-level BLEU and its paraphrase-aware
variant iBLEU, which rewards agreement with a reference while
penalising copying of the source question.  The embedding side is
plain cosine similarity.  Spearman's rho summarises how well a metric
ranks systems against human adequacy judgements.
"""

from __future__ import annotations

import json
import math
import re
import unicodedata
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

from .errors import ParaqaError, UnknownUid

if TYPE_CHECKING:  # pragma: no cover
    from .corpus import Corpus
    from .embeddings import EmbeddingProvider
    from .paragen import CandidateParaphrase

__all__ = [
    "BleuConfig",
    "IbleuConfig",
    "MetricRow",
    "DimensionMismatch",
    "ZeroVector",
    "LengthMismatch",
    "DegenerateInput",
    "tokenize",
    "split_tokens",
    "bleu",
    "ibleu",
    "cosine_similarity",
    "spearman_rho",
    "score_candidates",
    "rows_to_jsonl",
    "rows_from_jsonl",
]


class DimensionMismatch(ParaqaError):
    """Vectors of different (or zero) length were compared."""


class ZeroVector(ParaqaError):
    """Cosine similarity is undefined for a zero-magnitude vector."""


class LengthMismatch(ParaqaError):
    """Paired sequences of different length were correlated."""


class DegenerateInput(ParaqaError):
    """Correlation input with fewer than two points or no variance."""


# Longest alternative first: decimals stay whole, letter runs stay
# whole, an apostrophe glues to the letters that follow it ("who's"
# -> who, 's), anything else is a single-character token.
_TOKEN_RE = re.compile(r"\d+(?:\.\d+)?|[^\W\d_]+|'[^\W\d_]+|\S")


def split_tokens(text: str) -> list[str]:
    """Tokenize preserving case: NFC-normalize, split on whitespace,
    and split punctuation into standalone tokens."""
    return _TOKEN_RE.findall(unicodedata.normalize("NFC", text))


def tokenize(text: str) -> list[str]:
    """Lowercased tokenization used by all textual metrics.

    "Who's there?" -> ["who", "'s", "there", "?"].  Whitespace-only
    input yields [].
    """
    return split_tokens(text.lower())


_TOKENIZERS = {"default": tokenize}


@dataclass(frozen=True)
class BleuConfig:
    """Sentence-level BLEU parameters.

    max_n: largest n-gram order, uniformly weighted.
    smoothing: "add-one" is the only scheme; a zero-count precision at
        order n >= 2 is replaced by (m + 1) / (M + 1) where m is the
        clipped match count and M the candidate n-gram count.  With no
        candidate n-grams at some order (short candidates) this yields
        1.0, so identical short pairs still score 1.0.  A zero count at
        n = 1 is not smoothed: no unigram overlap means BLEU 0.
    tokenizer: name of a registered tokenizer; only "default" ships.
    """

    max_n: int = 4
    smoothing: str = "add-one"
    tokenizer: str = "default"

    def tokenizer_fn(self):
        try:
            return _TOKENIZERS[self.tokenizer]
        except KeyError:
            raise ValueError(f"unknown tokenizer {self.tokenizer!r}") from None


@dataclass(frozen=True)
class IbleuConfig:
    """alpha weights the reference term; (1 - alpha) penalises source
    overlap.  Values toward 1.0 reward adequacy only."""

    alpha: float = 0.7
    bleu: BleuConfig = field(default_factory=BleuConfig)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str, config: BleuConfig | None = None) -> float:
    """Sentence-level BLEU of candidate against a single reference.

    Geometric mean of modified n-gram precisions for n = 1..max_n times
    the brevity penalty min(1, exp(1 - r_len / c_len)).  A candidate
    that is empty after tokenization scores 0.
    """
    cfg = config or BleuConfig()
    if cfg.max_n < 1:
        raise ValueError("max_n must be at least 1")
    if cfg.smoothing != "add-one":
        raise ValueError(f"unknown smoothing {cfg.smoothing!r}")
    tok = cfg.tokenizer_fn()
    cand = tok(candidate)
    ref = tok(reference)
    if not cand:
        return 0.0

    log_sum = 0.0
    for n in range(1, cfg.max_n + 1):
        cand_counts = _ngram_counts(cand, n)
        total = sum(cand_counts.values())
        ref_counts = _ngram_counts(ref, n)
        matched = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
        if matched > 0:
            p = matched / total
        elif n == 1:
            return 0.0
        else:
            p = 1.0 / (total + 1)
        log_sum += math.log(p)

    bp = min(1.0, math.exp(1.0 - len(ref) / len(cand)))
    return bp * math.exp(log_sum / cfg.max_n)


def ibleu(
    candidate: str,
    source: str,
    reference: str,
    config: IbleuConfig | None = None,
) -> float:
    """alpha * BLEU(candidate, reference) - (1 - alpha) * BLEU(candidate, source)."""
    cfg = config or IbleuConfig()
    if not 0.0 <= cfg.alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {cfg.alpha}")
    return cfg.alpha * bleu(candidate, reference, cfg.bleu) - (
        1.0 - cfg.alpha
    ) * bleu(candidate, source, cfg.bleu)


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine of the angle between two equal-dimension vectors."""
    if len(u) != len(v) or not u:
        raise DimensionMismatch(f"dimensions {len(u)} and {len(v)}")
    dot = math.fsum(a * b for a, b in zip(u, v))
    nu = math.sqrt(math.fsum(a * a for a in u))
    nv = math.sqrt(math.fsum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return dot / (nu * nv)


def _fractional_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; ties receive the mean of the ranks they span."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman_rho(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson correlation of fractional ranks.

    Raises LengthMismatch for unequal lengths and DegenerateInput when
    there are fewer than two points or either side is constant.
    """
    if len(xs) != len(ys):
        raise LengthMismatch(f"lengths {len(xs)} and {len(ys)}")
    n = len(xs)
    if n < 2:
        raise DegenerateInput("need at least two points")
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        raise DegenerateInput("constant input has no rank ordering")
    rx = _fractional_ranks(xs)
    ry = _fractional_ranks(ys)
    mx = math.fsum(rx) / n
    my = math.fsum(ry) / n
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = math.fsum((a - mx) ** 2 for a in rx)
    vy = math.fsum((b - my) ** 2 for b in ry)
    return cov / math.sqrt(vx * vy)


@dataclass(frozen=True)
class MetricRow:
    """One scored candidate: textual metrics always, cosine only when an
    embedding provider was available."""

    uid: str
    system: str
    bleu_cr: float
    bleu_cs: float
    ibleu: float
    cosine_cs: float | None = None


def score_candidates(
    corpus: "Corpus",
    candidates: Iterable["CandidateParaphrase"],
    config: IbleuConfig | None = None,
    provider: "EmbeddingProvider | None" = None,
) -> list[MetricRow]:
    """Score each candidate against its corpus entry.

    bleu_cr compares the candidate to the dataset paraphrase (the
    reference), bleu_cs to the source question.  Candidates whose uid is
    not in the corpus raise UnknownUid.
    """
    cfg = config or IbleuConfig()
    rows: list[MetricRow] = []
    for cand in candidates:
        dp = corpus.by_uid.get(cand.uid)
        if dp is None:
            raise UnknownUid(cand.uid)
        b_cr = bleu(cand.text, dp.paraphrase, cfg.bleu)
        b_cs = bleu(cand.text, dp.question, cfg.bleu)
        cos: float | None = None
        if provider is not None:
            from .embeddings import similarity_cs

            cos = similarity_cs(cand.text, dp.question, provider)
        rows.append(
            MetricRow(
                uid=cand.uid,
                system=cand.system,
                bleu_cr=b_cr,
                bleu_cs=b_cs,
                ibleu=cfg.alpha * b_cr - (1.0 - cfg.alpha) * b_cs,
                cosine_cs=cos,
            )
        )
    return rows


def rows_to_jsonl(rows: Iterable[MetricRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(
                json.dumps(
                    {
                        "uid": r.uid,
                        "system": r.system,
                        "bleu_cr": r.bleu_cr,
                        "bleu_cs": r.bleu_cs,
                        "ibleu": r.ibleu,
                        "cosine_cs": r.cosine_cs,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def rows_from_jsonl(path: str | Path) -> list[MetricRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rows.append(
                    MetricRow(
                        uid=str(obj["uid"]),
                        system=str(obj["system"]),
                        bleu_cr=float(obj["bleu_cr"]),
                        bleu_cs=float(obj["bleu_cs"]),
                        ibleu=float(obj["ibleu"]),
                        cosine_cs=None
                        if obj.get("cosine_cs") is None
                        else float(obj["cosine_cs"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParaqaError(f"{path}:{line_no}: bad metric row: {exc}") from exc
    return rows
