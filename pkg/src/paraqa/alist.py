"""Attribute-list question representation and a template-based parser.

A question is represented as an attribute map (an "alist") over six
keys: s (subject), p (property), o (object), t (time), h (a
higher-order function from a closed set) and v (the projection
variable).  "What will the population of France be in 2028?" becomes

    {s: "France", p: "population", o: ?y0, t: 2028, h: "value", v: ?y0}

Parsing is driven by a plain-text template file, so extending coverage
means editing data, not code.  Each template block gives a pattern
line with <slot> markers and a skeleton of `key = value` lines:

    template value-future
    qtype SingleFact
    pattern What will the <p> of <s> be in <t> ?
    s = <s>
    p = <p>
    o = ?y0
    t = <t>
    h = value
    v = ?y0

Blocks are separated by blank lines; `#` starts a comment line.
Matching aligns pattern tokens with question tokens: literals compare
case-insensitively, a slot captures one or more consecutive tokens
(shortest capture first) and never captures across a punctuation
token, so multi-word subjects work while sentence structure still
anchors the match.  A value bound to the t key must be a four-digit
year.

Template-set validation rejects duplicate ids and cross-matching
patterns: for every template, a canonical example question (slots
filled with fresh tokens) is built and tried against every other
pattern.  This catches duplicated and subsumed patterns; adversarial
slot fillers that quote another template's keywords can still force an
overlap in principle, so parsing resolves any residue deterministically
by file order (first match wins).
"""

from __future__ import annotations

import json
import re
import unicodedata
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .corpus import QuestionType
from .errors import ParaqaError
from .metrics import split_tokens
from .paragen import PpdbIndex

__all__ = [
    "ATTRS",
    "HIGHER_ORDER_FUNCTIONS",
    "Variable",
    "Alist",
    "ParseError",
    "Slot",
    "Template",
    "MalformedTemplate",
    "AmbiguousTemplates",
    "UnificationFailure",
    "InvalidCase",
    "RecoveryCase",
    "CaseOutcome",
    "RecoveryReport",
    "load_templates",
    "bundled_templates",
    "parse_question",
    "render_question",
    "alist_equivalent",
    "paraphrase_property",
    "load_recovery_cases",
    "bundled_recovery_cases",
    "recovery_experiment",
]

ATTRS = ("s", "p", "o", "t", "h", "v")
HIGHER_ORDER_FUNCTIONS = ("value", "max", "min", "count", "comp", "regress")

_VAR_RE = re.compile(r"\?[a-z][a-z0-9]*\Z")


class MalformedTemplate(ParaqaError):
    """A template block violates the file format."""


class AmbiguousTemplates(ParaqaError):
    """Two templates in one set can match the same question."""

    def __init__(self, ids: tuple[str, str]) -> None:
        self.ids = ids
        super().__init__(f"templates {ids[0]!r} and {ids[1]!r} overlap")


class UnificationFailure(ParaqaError):
    """An alist does not fit the skeleton of the template it should
    render through."""


class InvalidCase(ParaqaError):
    """A recovery case fails its own preconditions."""


@dataclass(frozen=True)
class Variable:
    """A variable reference such as ?y0."""

    name: str

    def __post_init__(self) -> None:
        if not _VAR_RE.match(self.name):
            raise ValueError(f"bad variable name {self.name!r}")

    def __str__(self) -> str:  # pragma: no cover
        return self.name


# An alist value is a str, an int/float, or a Variable.


def _value_to_json(value):
    return value.name if isinstance(value, Variable) else value


def _value_from_json(value):
    if isinstance(value, str) and value.startswith("?"):
        return Variable(value)
    if isinstance(value, bool) or value is None:
        raise ValueError(f"bad alist value {value!r}")
    if not isinstance(value, (str, int, float)):
        raise ValueError(f"bad alist value {value!r}")
    return value


@dataclass(frozen=True)
class Alist:
    """Attribute map for one question.  Absent attributes are None and
    stay out of the serialized form; h is mandatory and must name one
    of the closed set of higher-order functions."""

    s: "str | int | float | Variable | None" = None
    p: "str | int | float | Variable | None" = None
    o: "str | int | float | Variable | None" = None
    t: "str | int | float | Variable | None" = None
    h: "str | None" = None
    v: "str | int | float | Variable | None" = None

    def __post_init__(self) -> None:
        if self.h not in HIGHER_ORDER_FUNCTIONS:
            raise ValueError(
                f"h must be one of {HIGHER_ORDER_FUNCTIONS}, got {self.h!r}"
            )

    def attributes(self) -> dict[str, "str | int | float | Variable"]:
        return {k: getattr(self, k) for k in ATTRS if getattr(self, k) is not None}

    def to_dict(self) -> dict:
        return {k: _value_to_json(v) for k, v in self.attributes().items()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Alist":
        unknown = set(data) - set(ATTRS)
        if unknown:
            raise ValueError(f"unknown alist keys: {sorted(unknown)}")
        return cls(**{k: _value_from_json(v) for k, v in data.items()})

    def __str__(self) -> str:
        parts = ", ".join(f"{k}: {v}" for k, v in self.to_dict().items())
        return "{" + parts + "}"


@dataclass(frozen=True)
class ParseError:
    """Returned (not raised) when a question has no template reading.

    reason is "NoTemplate" when nothing matched structurally and
    "BadTime" when a template matched but its time slot held something
    other than a four-digit year.
    """

    reason: str
    question: str
    detail: str = ""


def _canonical_text(text: str) -> str:
    return re.sub(r"\s+", " ", unicodedata.normalize("NFC", text).strip()).lower()


def _canonical_variables(alist: Alist) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for key in ATTRS:
        value = getattr(alist, key)
        if isinstance(value, Variable) and value.name not in mapping:
            mapping[value.name] = f"?y{len(mapping)}"
    return mapping


def alist_equivalent(a: Alist, b: Alist) -> bool:
    """Structural equality up to variable renaming; variables are
    canonicalized by first appearance in s, p, o, t, h, v order,
    strings compare case-insensitively, numbers numerically."""
    map_a = _canonical_variables(a)
    map_b = _canonical_variables(b)
    attrs_a = a.attributes()
    attrs_b = b.attributes()
    if set(attrs_a) != set(attrs_b):
        return False
    for key, va in attrs_a.items():
        vb = attrs_b[key]
        if isinstance(va, Variable) or isinstance(vb, Variable):
            if not (isinstance(va, Variable) and isinstance(vb, Variable)):
                return False
            if map_a[va.name] != map_b[vb.name]:
                return False
        elif isinstance(va, (int, float)) and isinstance(vb, (int, float)):
            if float(va) != float(vb):
                return False
        elif isinstance(va, str) and isinstance(vb, str):
            if _canonical_text(va) != _canonical_text(vb):
                return False
        else:
            return False
    return True


@dataclass(frozen=True)
class Slot:
    """A capture marker in a pattern, written <name>."""

    name: str


@dataclass(frozen=True)
class Template:
    id: str
    qtype: QuestionType
    pattern: tuple  # of str (cased literal token) and Slot
    skeleton: tuple  # of (attr, str | int | Variable | Slot) pairs
    pattern_text: str = ""

    def skeleton_map(self) -> dict:
        return dict(self.skeleton)

    def pattern_slots(self) -> set[str]:
        return {tok.name for tok in self.pattern if isinstance(tok, Slot)}


def _is_boundary(token: str) -> bool:
    """Pure-punctuation tokens separate slot captures."""
    return all(unicodedata.category(ch).startswith("P") for ch in token)


def _literal_eq(pattern_token: str, question_token: str) -> bool:
    return pattern_token.lower() == question_token.lower()


def _match_bindings(
    pattern: Sequence, tokens: Sequence[str], i: int = 0, j: int = 0,
    bound: dict | None = None,
) -> Iterator[dict[str, str]]:
    """Yield every slot binding that aligns pattern with tokens,
    shortest captures first."""
    if bound is None:
        bound = {}
    if i == len(pattern):
        if j == len(tokens):
            yield dict(bound)
        return
    tok = pattern[i]
    if isinstance(tok, Slot):
        for end in range(j + 1, len(tokens) + 1):
            if _is_boundary(tokens[end - 1]):
                break
            bound[tok.name] = " ".join(tokens[j:end])
            yield from _match_bindings(pattern, tokens, i + 1, end, bound)
        bound.pop(tok.name, None)
    else:
        if j < len(tokens) and _literal_eq(tok, tokens[j]):
            yield from _match_bindings(pattern, tokens, i + 1, j + 1, bound)


_SLOT_MARK_RE = re.compile(r"(<[a-z][a-z0-9_]*>)")
_YEAR_RE = re.compile(r"\d{4}\Z")


def _parse_pattern(text: str, where: str) -> tuple:
    out: list = []
    for chunk in text.split():
        for piece in _SLOT_MARK_RE.split(chunk):
            if not piece:
                continue
            if piece.startswith("<") and piece.endswith(">") and _SLOT_MARK_RE.fullmatch(piece):
                out.append(Slot(piece[1:-1]))
            elif "<" in piece or ">" in piece:
                raise MalformedTemplate(f"{where}: stray slot delimiter in {chunk!r}")
            else:
                out.extend(split_tokens(piece))
    if not out:
        raise MalformedTemplate(f"{where}: empty pattern")
    slot_names = [tok.name for tok in out if isinstance(tok, Slot)]
    if len(slot_names) != len(set(slot_names)):
        raise MalformedTemplate(f"{where}: repeated slot in pattern")
    return tuple(out)


def _parse_skeleton_value(raw: str, where: str):
    raw = raw.strip()
    if not raw:
        raise MalformedTemplate(f"{where}: empty skeleton value")
    m = _SLOT_MARK_RE.fullmatch(raw)
    if m:
        return Slot(raw[1:-1])
    if raw.startswith("?"):
        try:
            return Variable(raw)
        except ValueError as exc:
            raise MalformedTemplate(f"{where}: {exc}") from exc
    if re.fullmatch(r"-?\d+", raw):
        return int(raw)
    return raw


_ATTR_LINE_RE = re.compile(r"\s*([a-z]+)\s*=(.*)\Z")


def _parse_block(lines: list[tuple[int, str]], path: str) -> Template:
    where = f"{path}:{lines[0][0]}"
    header: dict[str, str] = {}
    skeleton: list = []
    for line_no, line in lines:
        attr = _ATTR_LINE_RE.match(line)
        if attr:
            key = attr.group(1)
            if key not in ATTRS:
                raise MalformedTemplate(f"{path}:{line_no}: unknown attribute {key!r}")
            if any(k == key for k, _ in skeleton):
                raise MalformedTemplate(f"{path}:{line_no}: duplicate attribute {key!r}")
            skeleton.append((key, _parse_skeleton_value(attr.group(2), f"{path}:{line_no}")))
            continue
        word, _, rest = line.strip().partition(" ")
        if word not in ("template", "qtype", "pattern"):
            raise MalformedTemplate(f"{path}:{line_no}: cannot read {line.strip()!r}")
        if word in header:
            raise MalformedTemplate(f"{path}:{line_no}: repeated {word} line")
        header[word] = rest.strip()

    for required in ("template", "qtype", "pattern"):
        if not header.get(required):
            raise MalformedTemplate(f"{where}: missing {required} line")
    try:
        qtype = QuestionType(header["qtype"])
    except ValueError as exc:
        raise MalformedTemplate(f"{where}: {exc}") from exc
    pattern = _parse_pattern(header["pattern"], where)

    skel_map = dict(skeleton)
    h = skel_map.get("h")
    if not isinstance(h, str) or h not in HIGHER_ORDER_FUNCTIONS:
        raise MalformedTemplate(
            f"{where}: skeleton must fix h to one of {HIGHER_ORDER_FUNCTIONS}"
        )
    pattern_slots = {tok.name for tok in pattern if isinstance(tok, Slot)}
    for key, value in skeleton:
        if isinstance(value, Slot) and value.name not in pattern_slots:
            raise MalformedTemplate(
                f"{where}: skeleton slot <{value.name}> not in pattern"
            )
    return Template(
        id=header["template"],
        qtype=qtype,
        pattern=pattern,
        skeleton=tuple(skeleton),
        pattern_text=header["pattern"],
    )


def _fresh_tokens(avoid: set[str]) -> Iterator[str]:
    i = 0
    while True:
        tok = f"fill{i}"
        if tok.lower() not in avoid:
            yield tok
        i += 1


def _check_ambiguity(templates: Sequence[Template]) -> None:
    literals = {
        tok.lower()
        for t in templates
        for tok in t.pattern
        if not isinstance(tok, Slot)
    }
    for probe in templates:
        fresh = _fresh_tokens(literals)
        example = [
            next(fresh) if isinstance(tok, Slot) else tok for tok in probe.pattern
        ]
        for other in templates:
            if other.id == probe.id:
                continue
            if next(_match_bindings(other.pattern, example), None) is not None:
                raise AmbiguousTemplates(tuple(sorted((probe.id, other.id))))


def load_templates(path: str | Path) -> list[Template]:
    """Parse a template file; see the module docstring for the format.

    Raises MalformedTemplate for format violations and
    AmbiguousTemplates when two patterns can take the same question.
    """
    return _load_template_text(Path(path).read_text(encoding="utf-8"), str(path))


def _load_template_text(text: str, path: str) -> list[Template]:
    blocks: list[list[tuple[int, str]]] = []
    current: list[tuple[int, str]] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            continue
        if not stripped:
            if current:
                blocks.append(current)
                current = []
            continue
        current.append((line_no, line))
    if current:
        blocks.append(current)
    if not blocks:
        raise MalformedTemplate(f"{path}: no templates found")

    templates = [_parse_block(block, path) for block in blocks]
    ids = [t.id for t in templates]
    for tid in ids:
        if ids.count(tid) > 1:
            raise MalformedTemplate(f"{path}: duplicate template id {tid!r}")
    _check_ambiguity(templates)
    return templates


def bundled_templates() -> list[Template]:
    """The template set shipped with the package."""
    text = resources.files("paraqa").joinpath("data/templates.txt").read_text("utf-8")
    return _load_template_text(text, "paraqa/data/templates.txt")


_BAD_TIME = object()


def _instantiate(template: Template, bindings: Mapping[str, str]):
    values: dict = {}
    for key, skel_value in template.skeleton:
        if isinstance(skel_value, Slot):
            raw = bindings[skel_value.name]
            if key == "t":
                if not _YEAR_RE.fullmatch(raw):
                    return _BAD_TIME
                values[key] = int(raw)
            else:
                values[key] = raw
        else:
            values[key] = skel_value
    return Alist(**values)


def parse_question(question: str, templates: Sequence[Template]) -> "Alist | ParseError":
    """Parse a question against the template set, first match winning.

    Unparsable questions are data, not exceptions: the result is a
    ParseError value carrying the reason.
    """
    tokens = split_tokens(question)
    saw_bad_time = False
    for template in templates:
        for bindings in _match_bindings(template.pattern, tokens):
            result = _instantiate(template, bindings)
            if result is _BAD_TIME:
                saw_bad_time = True
                continue
            return result
    if saw_bad_time:
        return ParseError("BadTime", question, "time slot is not a four-digit year")
    return ParseError("NoTemplate", question)


_NO_SPACE_BEFORE = set("'?.!,;:")


def _detokenize(parts: Sequence[str]) -> str:
    out = ""
    for part in parts:
        if out and part and part[0] not in _NO_SPACE_BEFORE:
            out += " "
        out += part
    return out


def render_question(alist: Alist, template: Template) -> str:
    """Realize the alist as text through the template.

    The skeleton must unify with the alist: fixed skeleton values must
    equal the alist's (strings case-insensitively, numbers
    numerically, variables up to a consistent renaming), slots take
    their values from the alist, and the alist may not carry
    attributes the skeleton lacks.  Raises UnificationFailure
    otherwise.
    """
    attrs = alist.attributes()
    skel = template.skeleton_map()
    if set(attrs) != set(skel):
        raise UnificationFailure(
            f"template {template.id}: attributes {sorted(attrs)} != {sorted(skel)}"
        )
    bindings: dict[str, str] = {}
    var_fwd: dict[str, str] = {}
    var_rev: dict[str, str] = {}
    for key, skel_value in template.skeleton:
        value = attrs[key]
        if isinstance(skel_value, Slot):
            if isinstance(value, Variable):
                raise UnificationFailure(
                    f"template {template.id}: {key} must be concrete, got {value}"
                )
            bindings[skel_value.name] = str(value)
        elif isinstance(skel_value, Variable):
            if not isinstance(value, Variable):
                raise UnificationFailure(
                    f"template {template.id}: {key} must be a variable"
                )
            if var_fwd.setdefault(skel_value.name, value.name) != value.name:
                raise UnificationFailure(f"template {template.id}: variable clash on {key}")
            if var_rev.setdefault(value.name, skel_value.name) != skel_value.name:
                raise UnificationFailure(f"template {template.id}: variable clash on {key}")
        elif isinstance(skel_value, (int, float)) and isinstance(value, (int, float)):
            if float(skel_value) != float(value):
                raise UnificationFailure(f"template {template.id}: {key} differs")
        elif isinstance(skel_value, str) and isinstance(value, str):
            if _canonical_text(skel_value) != _canonical_text(value):
                raise UnificationFailure(f"template {template.id}: {key} differs")
        else:
            raise UnificationFailure(f"template {template.id}: {key} differs in kind")

    parts = []
    for tok in template.pattern:
        if isinstance(tok, Slot):
            if tok.name not in bindings:
                raise UnificationFailure(
                    f"template {template.id}: pattern slot <{tok.name}> "
                    "is not determined by the alist"
                )
            parts.append(bindings[tok.name])
        else:
            parts.append(tok)
    return _detokenize(parts)


def paraphrase_property(alist: Alist, index: PpdbIndex, k: int = 5) -> list[Alist]:
    """Up to k copies of the alist with p replaced by its best-scored
    phrase-table paraphrases, the original excluded."""
    if not isinstance(alist.p, str):
        raise ValueError("paraphrase_property needs a string-valued p")
    canon_p = _canonical_text(alist.p)
    variants: list[Alist] = []
    for entry in index.lookup(alist.p):
        if _canonical_text(entry.paraphrase) == canon_p:
            continue
        variants.append(replace(alist, p=entry.paraphrase))
        if len(variants) == k:
            break
    return variants


@dataclass(frozen=True)
class RecoveryCase:
    """One experiment case: a parsable question with its gold alist and
    a paraphrase hard enough to defeat the templates."""

    uid: str
    question: str
    gold_alist: Alist
    hard_paraphrase: str


OUTCOMES = ("success", "parse-failed", "parsed-inequivalent")


@dataclass(frozen=True)
class CaseOutcome:
    uid: str
    outcome: str
    candidate: str


@dataclass
class RecoveryReport:
    outcomes: list[CaseOutcome] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.outcomes)

    def counts(self) -> dict[str, int]:
        counts = {o: 0 for o in OUTCOMES}
        for case in self.outcomes:
            counts[case.outcome] += 1
        return counts

    @property
    def successes(self) -> int:
        return self.counts()["success"]

    @property
    def recovery_rate(self) -> float:
        return self.successes / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "successes": self.successes,
            "recovery_rate": self.recovery_rate,
            "counts": self.counts(),
            "cases": [
                {"uid": c.uid, "outcome": c.outcome, "candidate": c.candidate}
                for c in self.outcomes
            ],
        }

    def format_text(self) -> str:
        width = max((len(c.uid) for c in self.outcomes), default=3)
        lines = [f"{c.uid:<{width}}  {c.outcome}" for c in self.outcomes]
        lines.append(
            f"recovered {self.successes}/{self.total} "
            f"({100.0 * self.recovery_rate:.1f}%)"
        )
        return "\n".join(lines) + "\n"


def load_recovery_cases(path: str | Path) -> list[RecoveryCase]:
    """Read cases from JSONL rows of
    {"uid", "question", "gold_alist", "hard_paraphrase"}."""
    cases = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cases.append(_case_from_json(line, f"{path}:{line_no}"))
    return cases


def _case_from_json(line: str, where: str) -> RecoveryCase:
    try:
        row = json.loads(line)
        return RecoveryCase(
            uid=str(row["uid"]),
            question=str(row["question"]),
            gold_alist=Alist.from_dict(row["gold_alist"]),
            hard_paraphrase=str(row["hard_paraphrase"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidCase(f"{where}: {exc}") from exc


def bundled_recovery_cases() -> list[RecoveryCase]:
    text = resources.files("paraqa").joinpath("data/recovery_cases.jsonl").read_text("utf-8")
    cases = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            cases.append(_case_from_json(line, f"paraqa/data/recovery_cases.jsonl:{line_no}"))
    return cases


def recovery_experiment(
    cases: Iterable[RecoveryCase],
    paraphraser: Callable[[str], str],
    templates: Sequence[Template],
) -> RecoveryReport:
    """Measure how often paraphrasing recovers parsability.

    Preconditions are checked first for every case: the question must
    parse to something equivalent to its gold alist and the hard
    paraphrase must not parse at all (InvalidCase otherwise).  Then for
    each case the paraphraser rewrites the hard paraphrase, the rewrite
    is parsed, and the outcome is one of success (parses, equivalent to
    gold), parse-failed, or parsed-inequivalent.
    """
    case_list = list(cases)
    for case in case_list:
        parsed = parse_question(case.question, templates)
        if isinstance(parsed, ParseError):
            raise InvalidCase(f"{case.uid}: question does not parse ({parsed.reason})")
        if not alist_equivalent(parsed, case.gold_alist):
            raise InvalidCase(f"{case.uid}: question parses to {parsed}, not its gold alist")
        hard = parse_question(case.hard_paraphrase, templates)
        if not isinstance(hard, ParseError):
            raise InvalidCase(f"{case.uid}: hard paraphrase already parses")

    report = RecoveryReport()
    for case in case_list:
        candidate = paraphraser(case.hard_paraphrase)
        parsed = parse_question(candidate, templates)
        if isinstance(parsed, ParseError):
            outcome = "parse-failed"
        elif alist_equivalent(parsed, case.gold_alist):
            outcome = "success"
        else:
            outcome = "parsed-inequivalent"
        report.outcomes.append(CaseOutcome(uid=case.uid, outcome=outcome, candidate=candidate))
    return report
