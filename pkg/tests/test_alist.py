from __future__ import annotations

import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paraqa.alist import (
    Alist,
    AmbiguousTemplates,
    InvalidCase,
    MalformedTemplate,
    ParseError,
    RecoveryCase,
    Template,
    UnificationFailure,
    Variable,
    alist_equivalent,
    bundled_recovery_cases,
    bundled_templates,
    load_recovery_cases,
    load_templates,
    paraphrase_property,
    parse_question,
    recovery_experiment,
    render_question,
)
from paraqa.corpus import QuestionType
from paraqa.paragen import ppdb_load

# ---------------------------------------------------------------------------
# Alist and Variable basics


def test_variable_name_validation() -> None:
    assert Variable("?y0").name == "?y0"
    assert Variable("?x").name == "?x"
    for bad in ("y0", "?Y0", "?0", "?", "?y_0"):
        with pytest.raises(ValueError):
            Variable(bad)


def test_alist_requires_known_h() -> None:
    for h in ("value", "max", "min", "count", "comp", "regress"):
        assert Alist(h=h).h == h
    with pytest.raises(ValueError):
        Alist(h="sum")
    with pytest.raises(ValueError):
        Alist(s="France")  # h missing


def test_alist_dict_round_trip() -> None:
    alist = Alist(s="France", p="population", o=Variable("?y0"), t=2028, h="value", v=Variable("?y0"))
    data = alist.to_dict()
    assert data == {"s": "France", "p": "population", "o": "?y0", "t": 2028, "h": "value", "v": "?y0"}
    assert Alist.from_dict(data) == alist
    with pytest.raises(ValueError):
        Alist.from_dict({"h": "value", "z": 1})


def test_alist_str_is_compact() -> None:
    alist = Alist(s="France", h="value", v=Variable("?y0"))
    assert str(alist) == "{s: France, h: value, v: ?y0}"


# ---------------------------------------------------------------------------
# Equivalence


GOLD = Alist(s="France", p="population", o=Variable("?y0"), t=2028, h="value", v=Variable("?y0"))


def test_equivalence_up_to_variable_renaming() -> None:
    renamed = Alist(s="France", p="population", o=Variable("?ans"), t=2028, h="value", v=Variable("?ans"))
    assert alist_equivalent(GOLD, renamed)


def test_equivalence_detects_variable_structure() -> None:
    # o and v bound to *different* variables is a different shape
    split = Alist(s="France", p="population", o=Variable("?a"), t=2028, h="value", v=Variable("?b"))
    assert not alist_equivalent(GOLD, split)


def test_equivalence_is_case_and_whitespace_insensitive() -> None:
    loose = Alist(s="  FRANCE ", p="Population", o=Variable("?y0"), t=2028, h="value", v=Variable("?y0"))
    assert alist_equivalent(GOLD, loose)


def test_equivalence_compares_numbers_numerically() -> None:
    floaty = Alist(s="France", p="population", o=Variable("?y0"), t=2028.0, h="value", v=Variable("?y0"))
    assert alist_equivalent(GOLD, floaty)
    # a numeric string is not a number
    stringy = Alist(s="France", p="population", o=Variable("?y0"), t="2028", h="value", v=Variable("?y0"))
    assert not alist_equivalent(GOLD, stringy)


def test_equivalence_requires_same_attributes() -> None:
    missing_t = Alist(s="France", p="population", o=Variable("?y0"), h="value", v=Variable("?y0"))
    assert not alist_equivalent(GOLD, missing_t)
    different_value = Alist(s="Germany", p="population", o=Variable("?y0"), t=2028, h="value", v=Variable("?y0"))
    assert not alist_equivalent(GOLD, different_value)


@given(
    name_a=st.from_regex(r"\?[a-z][a-z0-9]{0,3}", fullmatch=True),
    name_b=st.from_regex(r"\?[a-z][a-z0-9]{0,3}", fullmatch=True),
    upper=st.booleans(),
)
def test_equivalence_invariance_property(name_a: str, name_b: str, upper: bool) -> None:
    subject = "South America"
    a = Alist(s=subject, p="area", o=Variable(name_a), h="max", v=Variable(name_a))
    b = Alist(
        s=subject.upper() if upper else subject,
        p="area",
        o=Variable(name_b),
        h="max",
        v=Variable(name_b),
    )
    assert alist_equivalent(a, b)
    assert alist_equivalent(b, a)


# ---------------------------------------------------------------------------
# Template loading


def test_bundled_templates_load_and_validate() -> None:
    templates = bundled_templates()
    assert [t.id for t in templates] == [
        "value-simple",
        "value-future",
        "count-border",
        "rank-lowest",
        "rank-highest",
        "bool-exceed",
        "nested-compare",
    ]
    assert {t.qtype for t in templates} == {
        QuestionType.SINGLE_FACT,
        QuestionType.COUNTING,
        QuestionType.RANKING,
        QuestionType.BOOLEAN,
        QuestionType.TWO_INTENTION,
    }


def load_text(tmp_path: Path, text: str) -> list[Template]:
    path = tmp_path / "templates.txt"
    path.write_text(text, encoding="utf-8")
    return load_templates(path)


VALID_BLOCK = """\
template value-simple
qtype SingleFact
pattern What is the <p> of <s> ?
s = <s>
p = <p>
o = ?y0
h = value
v = ?y0
"""


def test_load_templates_minimal_file(tmp_path: Path) -> None:
    [template] = load_text(tmp_path, VALID_BLOCK)
    assert template.id == "value-simple"
    assert template.qtype is QuestionType.SINGLE_FACT
    assert template.pattern_slots() == {"p", "s"}
    assert template.skeleton_map()["h"] == "value"


@pytest.mark.parametrize(
    "mutation, message_part",
    [
        (lambda t: t.replace("qtype SingleFact\n", ""), "missing qtype"),
        (lambda t: t.replace("pattern What is the <p> of <s> ?\n", ""), "missing pattern"),
        (lambda t: t.replace("template value-simple\n", ""), "missing template"),
        (lambda t: t.replace("qtype SingleFact", "qtype Nonsense"), "Nonsense"),
        (lambda t: t.replace("h = value\n", ""), "skeleton must fix h"),
        (lambda t: t.replace("h = value", "h = sum"), "skeleton must fix h"),
        (lambda t: t + "z = 3\n", "unknown attribute"),
        (lambda t: t + "s = again\n", "duplicate attribute"),
        (lambda t: t.replace("of <s>", "of <p>"), "repeated slot"),
        (lambda t: t.replace("pattern What is the <p> of <s> ?",
                             "pattern What is the <p> ?"), "not in pattern"),
        (lambda t: t.replace("of <s>", "of <s"), "stray slot delimiter"),
        (lambda t: t.replace("o = ?y0", "o = ?Y0"), "bad variable"),
    ],
)
def test_load_templates_format_errors(tmp_path: Path, mutation, message_part: str) -> None:
    with pytest.raises(MalformedTemplate) as exc_info:
        load_text(tmp_path, mutation(VALID_BLOCK))
    assert message_part in str(exc_info.value)


def test_load_templates_duplicate_id(tmp_path: Path) -> None:
    other = VALID_BLOCK.replace("What is the <p> of <s> ?", "Name the <p> of <s>")
    with pytest.raises(MalformedTemplate) as exc_info:
        load_text(tmp_path, VALID_BLOCK + "\n" + other)
    assert "duplicate template id" in str(exc_info.value)


def test_load_templates_empty_file(tmp_path: Path) -> None:
    with pytest.raises(MalformedTemplate):
        load_text(tmp_path, "# only a comment\n\n")


def test_identical_patterns_are_ambiguous(tmp_path: Path) -> None:
    other = """\
template value-copy
qtype SingleFact
pattern What is the <a> of <b> ?
s = <b>
p = <a>
o = ?y0
h = value
v = ?y0
"""
    with pytest.raises(AmbiguousTemplates) as exc_info:
        load_text(tmp_path, VALID_BLOCK + "\n" + other)
    assert exc_info.value.ids == ("value-copy", "value-simple")


def test_subsumed_pattern_is_ambiguous(tmp_path: Path) -> None:
    catch_all = """\
template what-anything
qtype SingleFact
pattern What is <x> ?
s = <x>
o = ?y0
h = value
v = ?y0
"""
    with pytest.raises(AmbiguousTemplates):
        load_text(tmp_path, VALID_BLOCK + "\n" + catch_all)


def test_distinct_anchors_are_not_ambiguous(tmp_path: Path) -> None:
    other = """\
template name-simple
qtype SingleFact
pattern Name the <p> of <s>
s = <s>
p = <p>
o = ?y0
h = value
v = ?y0
"""
    templates = load_text(tmp_path, VALID_BLOCK + "\n" + other)
    assert len(templates) == 2


# ---------------------------------------------------------------------------
# Parsing


@pytest.fixture(scope="module")
def templates() -> list[Template]:
    return bundled_templates()


def test_parse_future_value_question(templates) -> None:
    got = parse_question("What will the population of France be in 2028?", templates)
    assert isinstance(got, Alist)
    assert got.s == "France"
    assert got.p == "population"
    assert got.o == Variable("?y0")
    assert got.t == 2028
    assert got.h == "value"
    assert got.v == Variable("?y0")
    assert alist_equivalent(got, GOLD)


def test_parse_multi_token_slots(templates) -> None:
    got = parse_question("What is the official language of New Zealand?", templates)
    assert isinstance(got, Alist)
    assert got.p == "official language"
    assert got.s == "New Zealand"


def test_parse_counting_question(templates) -> None:
    got = parse_question("How many countries border Mexico?", templates)
    assert isinstance(got, Alist)
    assert got.s == "Mexico"
    assert got.p == "border"
    assert got.h == "count"
    assert got.o == got.v == Variable("?y0")


def test_parse_ranking_questions(templates) -> None:
    low = parse_question("Which country in Africa has the lowest urban population?", templates)
    assert isinstance(low, Alist)
    assert (low.s, low.p, low.h) == ("Africa", "urban population", "min")
    high = parse_question("Which country in Europe has the highest GDP?", templates)
    assert isinstance(high, Alist)
    assert (high.s, high.p, high.h) == ("Europe", "GDP", "max")


def test_parse_boolean_question(templates) -> None:
    got = parse_question("Did Australia's GDP exceed 400 billion in 2012?", templates)
    assert isinstance(got, Alist)
    assert got.s == "Australia"
    assert got.p == "GDP"
    assert got.o == "400 billion"
    assert got.t == 2012
    assert got.h == "comp"


def test_parse_nested_comparison_keeps_subquestion_opaque(templates) -> None:
    question = (
        "Was the population of France in 2012 greater than the population of Germany in 2009?"
    )
    got = parse_question(question, templates)
    assert isinstance(got, Alist)
    assert got.s == "France"
    assert got.p == "population"
    assert got.t == 2012
    assert got.o == "the population of Germany in 2009"
    assert got.h == "comp"


def test_parse_is_case_insensitive_on_literals(templates) -> None:
    got = parse_question("what IS the CAPITAL of Peru?", templates)
    assert isinstance(got, Alist)
    assert got.p == "CAPITAL"  # slot values keep their surface case
    assert got.s == "Peru"


def test_parse_preserves_slot_case(templates) -> None:
    got = parse_question("What is the GDP of Ethiopia?", templates)
    assert isinstance(got, Alist)
    assert got.p == "GDP"
    assert got.s == "Ethiopia"


def test_parse_no_template(templates) -> None:
    got = parse_question("Please list every ocean on the planet.", templates)
    assert isinstance(got, ParseError)
    assert got.reason == "NoTemplate"
    assert got.question == "Please list every ocean on the planet."


def test_parse_bad_time(templates) -> None:
    got = parse_question("What will the population of France be in March?", templates)
    assert isinstance(got, ParseError)
    assert got.reason == "BadTime"
    got = parse_question("What will the population of France be in 20288?", templates)
    assert isinstance(got, ParseError)
    assert got.reason == "BadTime"


def test_parse_slots_do_not_cross_punctuation(templates) -> None:
    # the comma blocks the subject capture, so nothing matches
    got = parse_question("What is the size, roughly, of France?", templates)
    assert isinstance(got, ParseError)
    assert got.reason == "NoTemplate"


def test_parse_empty_question(templates) -> None:
    got = parse_question("", templates)
    assert isinstance(got, ParseError)
    assert got.reason == "NoTemplate"


def test_parse_first_template_in_file_order_wins(templates) -> None:
    # adversarial fillers can straddle the two ranking templates; the
    # earlier block (rank-lowest) takes the question
    question = "Which country in X has the lowest thing has the highest thing?"
    got = parse_question(question, templates)
    assert isinstance(got, Alist)
    assert got.h == "min"
    assert got.s == "X"
    assert got.p == "thing has the highest thing"


# ---------------------------------------------------------------------------
# Rendering


def template_by_id(templates, tid: str) -> Template:
    return next(t for t in templates if t.id == tid)


ROUND_TRIP_QUESTIONS = [
    ("value-simple", "What is the population of France?"),
    ("value-simple", "What is the official language of New Zealand?"),
    ("value-future", "What will the population of France be in 2028?"),
    ("value-future", "What will the GDP of Ethiopia be in 2030?"),
    ("count-border", "How many countries border Mexico?"),
    ("count-border", "How many countries border the Russian Federation?"),
    ("rank-lowest", "Which country in Africa has the lowest urban population?"),
    ("rank-highest", "Which country in Europe has the highest GDP?"),
    ("bool-exceed", "Did Australia's GDP exceed 400 billion in 2012?"),
    ("bool-exceed", "Did France's exports exceed imports in 1999?"),
    (
        "nested-compare",
        "Was the population of France in 2012 greater than the population of Germany in 2009?",
    ),
    (
        "nested-compare",
        "Was the GDP of Australia in 2012 greater than the GDP of Canada in 2009?",
    ),
]


@pytest.mark.parametrize("tid, question", ROUND_TRIP_QUESTIONS)
def test_parse_render_round_trip_is_byte_exact(templates, tid: str, question: str) -> None:
    alist = parse_question(question, templates)
    assert isinstance(alist, Alist), question
    template = template_by_id(templates, tid)
    assert render_question(alist, template) == question


def test_render_requires_matching_attributes(templates) -> None:
    template = template_by_id(templates, "value-future")  # needs t
    alist = Alist(s="France", p="population", o=Variable("?y0"), h="value", v=Variable("?y0"))
    with pytest.raises(UnificationFailure):
        render_question(alist, template)


def test_render_requires_matching_h(templates) -> None:
    alist = parse_question("Which country in Africa has the lowest urban population?", templates)
    assert isinstance(alist, Alist)
    with pytest.raises(UnificationFailure):
        # rank-highest fixes h = max, the alist has h = min
        render_question(alist, template_by_id(templates, "rank-highest"))


def test_render_rejects_fixed_literal_mismatch(templates) -> None:
    template = template_by_id(templates, "count-border")
    alist = Alist(s="Mexico", p="adjoin", o=Variable("?y0"), h="count", v=Variable("?y0"))
    with pytest.raises(UnificationFailure):
        render_question(alist, template)


def test_render_accepts_variable_renaming(templates) -> None:
    template = template_by_id(templates, "value-simple")
    alist = Alist(s="France", p="population", o=Variable("?ans"), h="value", v=Variable("?ans"))
    assert render_question(alist, template) == "What is the population of France?"


def test_render_rejects_inconsistent_variable_identity(templates) -> None:
    template = template_by_id(templates, "value-simple")
    # skeleton binds o and v to the same ?y0; the alist splits them
    alist = Alist(s="France", p="population", o=Variable("?a"), h="value", v=Variable("?b"))
    with pytest.raises(UnificationFailure):
        render_question(alist, template)


def test_render_rejects_variable_in_concrete_slot(templates) -> None:
    template = template_by_id(templates, "value-simple")
    alist = Alist(s=Variable("?who"), p="population", o=Variable("?y0"), h="value", v=Variable("?y0"))
    with pytest.raises(UnificationFailure):
        render_question(alist, template)


# ---------------------------------------------------------------------------
# Property paraphrasing against the phrase table


def test_paraphrase_property_substitutes_p(templates, data_dir: Path) -> None:
    index = ppdb_load(data_dir / "ppdb_small.txt")
    alist = parse_question("What is the population of France?", templates)
    assert isinstance(alist, Alist)
    variants = paraphrase_property(alist, index)
    assert [v.p for v in variants] == ["number of people", "people count", "populace"]
    for variant in variants:
        assert variant.s == alist.s
        assert variant.h == alist.h
        assert variant.o == alist.o


def test_paraphrase_property_excludes_original(tmp_path: Path, templates) -> None:
    table = tmp_path / "table.txt"
    table.write_text(
        "[NN] ||| population ||| Population ||| PPDB2.0Score=9.0 ||| 0-0 ||| Equivalence\n"
        "[NN] ||| population ||| inhabitants ||| PPDB2.0Score=3.0 ||| 0-0 ||| Equivalence\n",
        encoding="utf-8",
    )
    index = ppdb_load(table)
    alist = parse_question("What is the population of France?", templates)
    assert isinstance(alist, Alist)
    variants = paraphrase_property(alist, index)
    # the case-insensitive copy of the original is skipped
    assert [v.p for v in variants] == ["inhabitants"]


def test_paraphrase_property_respects_k(data_dir: Path, templates) -> None:
    index = ppdb_load(data_dir / "ppdb_small.txt")
    alist = parse_question("What is the size of France?", templates)
    assert isinstance(alist, Alist)
    assert len(paraphrase_property(alist, index, k=2)) == 2


def test_paraphrase_property_requires_string_p(data_dir: Path) -> None:
    index = ppdb_load(data_dir / "ppdb_small.txt")
    with pytest.raises(ValueError):
        paraphrase_property(Alist(h="value", v=Variable("?y0")), index)


def test_paraphrased_alists_render_to_new_questions(templates, data_dir: Path) -> None:
    index = ppdb_load(data_dir / "ppdb_small.txt")
    alist = parse_question("What is the population of France?", templates)
    assert isinstance(alist, Alist)
    template = template_by_id(templates, "value-simple")
    rendered = [render_question(v, template) for v in paraphrase_property(alist, index, k=1)]
    assert rendered == ["What is the number of people of France?"]


# ---------------------------------------------------------------------------
# Recovery experiment


def test_bundled_cases_with_identity_paraphraser_recover_nothing(templates) -> None:
    cases = bundled_recovery_cases()
    assert len(cases) == 20
    report = recovery_experiment(cases, lambda text: text, templates)
    assert report.total == 20
    assert report.successes == 0
    assert report.recovery_rate == 0.0
    assert report.counts() == {"success": 0, "parse-failed": 20, "parsed-inequivalent": 0}


def test_bundled_cases_with_oracle_paraphraser_recover_everything(templates) -> None:
    cases = bundled_recovery_cases()
    table = {c.hard_paraphrase: c.question for c in cases}
    report = recovery_experiment(cases, lambda text: table[text], templates)
    assert report.successes == report.total == 20
    assert report.recovery_rate == 1.0


def test_recovery_outcome_parsed_inequivalent(templates) -> None:
    case = RecoveryCase(
        uid="c1",
        question="What is the population of France?",
        gold_alist=Alist(s="France", p="population", o=Variable("?y0"), h="value", v=Variable("?y0")),
        hard_paraphrase="Roughly how big is France, people-wise?",
    )
    report = recovery_experiment(
        [case], lambda text: "What is the population of Mexico?", bundled_templates()
    )
    [outcome] = report.outcomes
    assert outcome.outcome == "parsed-inequivalent"
    assert outcome.candidate == "What is the population of Mexico?"
    assert report.recovery_rate == 0.0


def test_recovery_report_shapes(templates) -> None:
    cases = bundled_recovery_cases()[:3]
    table = {c.hard_paraphrase: c.question for c in cases}
    report = recovery_experiment(cases, lambda text: table[text], templates)
    payload = report.to_dict()
    assert payload["total"] == 3
    assert payload["successes"] == 3
    assert payload["recovery_rate"] == 1.0
    assert [c["outcome"] for c in payload["cases"]] == ["success"] * 3
    text = report.format_text()
    assert "recovered 3/3 (100.0%)" in text


def test_recovery_precondition_question_must_parse(templates) -> None:
    case = RecoveryCase(
        uid="bad-q",
        question="This cannot be parsed at all.",
        gold_alist=Alist(h="value"),
        hard_paraphrase="Neither can this.",
    )
    with pytest.raises(InvalidCase) as exc_info:
        recovery_experiment([case], lambda text: text, templates)
    assert "bad-q" in str(exc_info.value)


def test_recovery_precondition_gold_must_match(templates) -> None:
    case = RecoveryCase(
        uid="bad-gold",
        question="What is the population of France?",
        gold_alist=Alist(s="Germany", p="population", o=Variable("?y0"), h="value", v=Variable("?y0")),
        hard_paraphrase="Unparsable by design, population-wise.",
    )
    with pytest.raises(InvalidCase) as exc_info:
        recovery_experiment([case], lambda text: text, templates)
    assert "bad-gold" in str(exc_info.value)


def test_recovery_precondition_hard_paraphrase_must_not_parse(templates) -> None:
    case = RecoveryCase(
        uid="too-easy",
        question="What is the population of France?",
        gold_alist=Alist(s="France", p="population", o=Variable("?y0"), h="value", v=Variable("?y0")),
        hard_paraphrase="What is the population of France?",
    )
    with pytest.raises(InvalidCase) as exc_info:
        recovery_experiment([case], lambda text: text, templates)
    assert "too-easy" in str(exc_info.value)


def test_recovery_cases_file_round_trip(tmp_path: Path) -> None:
    cases = bundled_recovery_cases()[:2]
    path = tmp_path / "cases.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(
                json.dumps(
                    {
                        "uid": case.uid,
                        "question": case.question,
                        "gold_alist": case.gold_alist.to_dict(),
                        "hard_paraphrase": case.hard_paraphrase,
                    }
                )
                + "\n"
            )
    assert load_recovery_cases(path) == cases


def test_recovery_cases_bad_rows_are_invalid(tmp_path: Path) -> None:
    path = tmp_path / "cases.jsonl"
    path.write_text(json.dumps({"uid": "x", "question": "q"}) + "\n", encoding="utf-8")
    with pytest.raises(InvalidCase) as exc_info:
        load_recovery_cases(path)
    assert ":1" in str(exc_info.value)
