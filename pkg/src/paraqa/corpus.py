"""Question-paraphrase corpus handling.

A corpus is an ordered list of data points, each a question paired with
one paraphrase plus optional SPARQL strings and free-form metadata.
Question types are assigned at load time from an ordered rule table;
the rules are data, not code, so new datasets can remap types without
touching the package.
"""

from __future__ import annotations

import json
import re
import sys
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import ParaqaError
from .rng import sample_indices

__all__ = [
    "QuestionType",
    "DataPoint",
    "FieldMap",
    "TypeRule",
    "RuleTable",
    "Corpus",
    "MalformedRecord",
    "DuplicateUid",
    "InsufficientItems",
    "load",
    "save",
    "classify_question_type",
    "sample",
]


class MalformedRecord(ParaqaError):
    """A record is missing a required field or is not an object."""


class DuplicateUid(ParaqaError):
    """Two records in one corpus share a uid."""


class InsufficientItems(ParaqaError):
    """A sample was requested that exceeds the pool for its type."""


class QuestionType(str, Enum):
    SINGLE_FACT = "SingleFact"
    TWO_INTENTION = "TwoIntention"
    RANKING = "Ranking"
    BOOLEAN = "Boolean"
    COUNTING = "Counting"
    OTHER = "Other"

    def __str__(self) -> str:  # pragma: no cover
        return self.value


@dataclass
class DataPoint:
    """One corpus row.  Text fields are stored verbatim as loaded; a
    JSON null in a text field is read as the empty string so that the
    error scanner can see and flag it."""

    uid: str
    question: str
    paraphrase: str
    sparql_wikidata: str = ""
    sparql_dbpedia: str = ""
    metadata: dict[str, str] = field(default_factory=dict)
    qtype: QuestionType = QuestionType.OTHER
    raw_subtype: str = ""


@dataclass(frozen=True)
class FieldMap:
    """Names of the source-file keys holding each core field.

    Keys of a record not claimed by the map are preserved in
    DataPoint.metadata with stringified values.
    """

    uid: str = "uid"
    question: str = "question"
    paraphrase: str = "paraphrase"
    sparql_wikidata: str = "sparql_wikidata"
    sparql_dbpedia: str = "sparql_dbpedia"

    @classmethod
    def lcquad(cls) -> "FieldMap":
        """Mapping for LC-QuAD 2.0 style files, where the paraphrase
        lives under "paraphrased_question"."""
        return cls(paraphrase="paraphrased_question")

    @classmethod
    def from_file(cls, path: str | Path) -> "FieldMap":
        """Read a field map from a JSON or TOML file of key = name pairs."""
        path = Path(path)
        if path.suffix.lower() == ".toml":
            if sys.version_info >= (3, 11):
                import tomllib as toml_mod
            else:
                import tomli as toml_mod
            data = toml_mod.loads(path.read_text(encoding="utf-8"))
        else:
            data = json.loads(path.read_text(encoding="utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ParaqaError(f"unknown field-map keys: {sorted(unknown)}")
        return cls(**{k: str(v) for k, v in data.items()})


@dataclass(frozen=True)
class TypeRule:
    """One classification rule: a metadata substring test or a question
    regex.  Exactly one of the two triggers is set."""

    qtype: QuestionType
    metadata_key: str | None = None
    metadata_contains: str | None = None
    question_pattern: str | None = None

    def matches(self, dp: DataPoint) -> bool:
        if self.metadata_key is not None:
            value = dp.metadata.get(self.metadata_key, "")
            return (self.metadata_contains or "").lower() in value.lower() and bool(
                value
            )
        if self.question_pattern is not None:
            return re.search(self.question_pattern, dp.question) is not None
        return False


@dataclass
class RuleTable:
    """Ordered classification rules; the first matching rule wins.

    subtype_key names the metadata field recorded as the raw subtype of
    every data point (used to keep original dataset labels visible when
    a question falls through to Other).
    """

    rules: list[TypeRule]
    subtype_key: str = "subgraph"

    @classmethod
    def from_dict(cls, data: Mapping) -> "RuleTable":
        rules = []
        for i, raw in enumerate(data.get("rules", [])):
            try:
                qtype = QuestionType(raw["qtype"])
            except (KeyError, ValueError) as exc:
                raise ParaqaError(f"rule {i}: bad qtype: {exc}") from exc
            meta = raw.get("metadata")
            pattern = raw.get("question")
            if (meta is None) == (pattern is None):
                raise ParaqaError(
                    f"rule {i}: need exactly one of 'metadata' or 'question'"
                )
            if meta is not None:
                rules.append(
                    TypeRule(
                        qtype=qtype,
                        metadata_key=str(meta["key"]),
                        metadata_contains=str(meta["contains"]),
                    )
                )
            else:
                re.compile(pattern)  # fail fast on bad regex
                rules.append(TypeRule(qtype=qtype, question_pattern=pattern))
        return cls(rules=rules, subtype_key=str(data.get("subtype_key", "subgraph")))

    @classmethod
    def load(cls, path: str | Path) -> "RuleTable":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def default(cls) -> "RuleTable":
        text = (
            resources.files("paraqa").joinpath("data/type_rules.json").read_text("utf-8")
        )
        return cls.from_dict(json.loads(text))


def classify_question_type(dp: DataPoint, rules: RuleTable) -> QuestionType:
    """First matching rule wins; no match falls through to Other."""
    for rule in rules.rules:
        if rule.matches(dp):
            return rule.qtype
    return QuestionType.OTHER


@dataclass
class Corpus:
    """Ordered collection of DataPoints with load provenance."""

    items: list[DataPoint]
    source: str = ""
    loaded_at: str = ""
    by_uid: dict[str, DataPoint] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.by_uid = {}
        for dp in self.items:
            if dp.uid in self.by_uid:
                raise DuplicateUid(f"duplicate uid {dp.uid!r}")
            self.by_uid[dp.uid] = dp

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[DataPoint]:
        return iter(self.items)

    def type_counts(self) -> dict[QuestionType, int]:
        counts = {qt: 0 for qt in QuestionType}
        for dp in self.items:
            counts[dp.qtype] += 1
        return {qt: n for qt, n in counts.items() if n}


def _text_field(record: Mapping, key: str, where: str) -> str:
    if key not in record:
        raise MalformedRecord(f"{where}: missing field {key!r}")
    value = record[key]
    if value is None:
        return ""
    if not isinstance(value, str):
        raise MalformedRecord(f"{where}: field {key!r} is not text")
    return value


def _stringify(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return json.dumps(value, sort_keys=True, ensure_ascii=False)


def _record_to_datapoint(record: object, where: str, fmap: FieldMap) -> DataPoint:
    if not isinstance(record, Mapping):
        raise MalformedRecord(f"{where}: record is not an object")
    if fmap.uid not in record:
        raise MalformedRecord(f"{where}: missing field {fmap.uid!r}")
    uid_val = record[fmap.uid]
    if uid_val is None or isinstance(uid_val, (list, dict)):
        raise MalformedRecord(f"{where}: field {fmap.uid!r} is not a scalar")
    uid = str(uid_val)

    question = _text_field(record, fmap.question, where)
    paraphrase = _text_field(record, fmap.paraphrase, where)
    claimed = {fmap.uid, fmap.question, fmap.paraphrase}
    sparql_wd = sparql_db = ""
    if fmap.sparql_wikidata in record:
        sparql_wd = _text_field(record, fmap.sparql_wikidata, where)
        claimed.add(fmap.sparql_wikidata)
    if fmap.sparql_dbpedia in record:
        sparql_db = _text_field(record, fmap.sparql_dbpedia, where)
        claimed.add(fmap.sparql_dbpedia)

    metadata: dict[str, str] = {}
    for key, value in record.items():
        if key in claimed:
            continue
        if key == "metadata" and isinstance(value, Mapping):
            for mk, mv in value.items():
                metadata[str(mk)] = _stringify(mv)
            continue
        metadata[str(key)] = _stringify(value)

    return DataPoint(
        uid=uid,
        question=question,
        paraphrase=paraphrase,
        sparql_wikidata=sparql_wd,
        sparql_dbpedia=sparql_db,
        metadata=metadata,
    )


def _read_records(path: Path, fmt: str) -> list[tuple[str, object]]:
    if fmt == "auto":
        if path.suffix.lower() == ".jsonl":
            fmt = "jsonl"
        elif path.suffix.lower() == ".json":
            fmt = "json-array"
        else:
            head = ""
            with open(path, encoding="utf-8") as fh:
                while True:
                    ch = fh.read(1)
                    if not ch or not ch.isspace():
                        head = ch
                        break
            fmt = "json-array" if head == "[" else "jsonl"
    if fmt == "json-array":
        data = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise MalformedRecord(f"{path}: top-level JSON value is not an array")
        return [(f"{path}[{i}]", rec) for i, rec in enumerate(data)]
    if fmt == "jsonl":
        records = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    records.append((f"{path}:{line_no}", json.loads(line)))
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(f"{path}:{line_no}: bad JSON: {exc}") from exc
        return records
    raise ValueError(f"unknown format {fmt!r}")


def load(
    path: str | Path,
    format: str = "auto",
    field_map: FieldMap | None = None,
    rules: RuleTable | None = None,
) -> Corpus:
    """Load a corpus from a JSON array or JSONL file.

    Every record must carry uid, question and paraphrase under the
    names given by the field map; uids must be unique.  Each data point
    is classified with the rule table (the bundled default if none is
    given).
    """
    path = Path(path)
    fmap = field_map or FieldMap()
    table = rules or RuleTable.default()
    items = []
    for where, record in _read_records(path, format):
        dp = _record_to_datapoint(record, where, fmap)
        dp.raw_subtype = dp.metadata.get(table.subtype_key, "")
        dp.qtype = classify_question_type(dp, table)
        items.append(dp)
    return Corpus(
        items=items,
        source=str(path),
        loaded_at=datetime.now(timezone.utc).isoformat(),
    )


def save(corpus: Corpus, path: str | Path) -> None:
    """Write the canonical JSONL form: one object per data point with
    the core fields under their canonical names.  Reloading the file
    with the default field map reproduces the data points."""
    with open(path, "w", encoding="utf-8") as fh:
        for dp in corpus:
            fh.write(
                json.dumps(
                    {
                        "uid": dp.uid,
                        "question": dp.question,
                        "paraphrase": dp.paraphrase,
                        "sparql_wikidata": dp.sparql_wikidata,
                        "sparql_dbpedia": dp.sparql_dbpedia,
                        "metadata": dp.metadata,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def sample(corpus: Corpus, qtype: QuestionType, n: int, seed: int) -> list[DataPoint]:
    """Draw n distinct data points of one type, deterministically in
    (corpus order, seed).  See paraqa.rng for the exact algorithm."""
    pool = [dp for dp in corpus if dp.qtype == qtype]
    if n > len(pool):
        raise InsufficientItems(
            f"requested {n} of type {qtype.value}, pool has {len(pool)}"
        )
    return [pool[i] for i in sample_indices(len(pool), n, seed)]
