"""Regenerate tests/data/corpus60.jsonl and its manifest.

The fixture is checked in; rerun this only when the planted cases change.
The script fails loudly if the corpus stops exhibiting the documented
type counts or planted error flags.
"""

from __future__ import annotations

import json
from pathlib import Path

from paraqa.corpus import load
from paraqa.errscan import scan

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "tests" / "data"

# (uid, question, paraphrase, subgraph-metadata-or-None, sparql-or-None)
ROWS: list[tuple[str, str, str, str | None, str | None]] = [
    # --- single-fact -----------------------------------------------------
    ("q-sf-001", "What is the GDP of Ethiopia?",
     "How large is the Ethiopian economy in GDP terms?", "simple question left", None),
    ("q-sf-002", "What is the capital of Ghana?",
     "Name the capital city of Ghana.", None,
     "SELECT ?ans WHERE { wd:Q117 wdt:P36 ?ans }"),
    ("q-sf-003", "Who wrote the novel Things Fall Apart?",
     "The novel Things Fall Apart was written by which author?", "statement_property", None),
    ("q-sf-004", "When did the Berlin Wall fall?",
     "In which year did the Berlin Wall come down?", None, None),
    ("q-sf-005", "What is the official language of Brazil?",
     "Which language is official in Brazil?", "simple question right", None),
    ("q-sf-006", "Where is the headquarters of UNESCO?",
     "In which city is UNESCO based?", None, None),
    ("q-sf-007", "Which company does this logo represent?",
     "Which company is shown in the logo.svg?", None, None),
    ("q-sf-008", "What is the boiling point of water at sea level?",
     "At sea level, at what temperature does water boil?", "simple question left", None),
    ("q-sf-009", "Who painted The Starry Night?",
     "The Starry Night was painted by whom?", None, None),
    ("q-sf-010", "What is the currency of Switzerland?",
     "Which currency is used in Switzerland?", "statement_property",
     "SELECT ?ans WHERE { wd:Q39 wdt:P38 ?ans }"),
    ("q-sf-011", "When was the United Nations founded?",
     "In what year was the UN established?", None, None),
    ("q-sf-012", "What is the national currency of Japan?",
     "N/A", "simple question right", None),
    ("q-sf-013", "Who is the author of One Hundred Years of Solitude?",
     "One Hundred Years of Solitude was authored by which writer?", None, None),
    ("q-sf-014", "What is the chemical symbol for gold?",
     "In chemistry, which symbol denotes gold?", "simple question left", None),
    ("q-sf-015", "What is the population of Lübeck?",
     "What is Lubeck's population?", None, None),
    ("q-sf-016", "Where was José Saramago born?",
     "What is the birthplace of José Saramago?", None, None),
    ("q-sf-017", "What is the national flower of Japan?",
     "Which flower represents Japan nationally?", "simple question right", None),
    ("q-sf-018", "Who discovered penicillin?",
     "Penicillin was discovered by which scientist?", None, None),
    ("q-sf-019", "What is the length of the Danube?",
     "How long is the Danube river?", "statement_property", None),
    ("q-sf-020", "When did Finland join the European Union?",
     "In which year did Finland become an EU member?", None, None),
    # --- two-intention ----------------------------------------------------
    ("q-ti-021", "Was the population of France in 2012 greater than the population of Germany in 2009?",
     "Did France in 2012 have a bigger population than Germany had in 2009?",
     "two intentions right subgraph", None),
    ("q-ti-022", "Was the GDP of Australia in 2012 greater than the GDP of Canada in 2009?",
     "Did Australia's 2012 GDP outstrip Canada's 2009 GDP?", None, None),
    ("q-ti-023", "Is the Amazon longer than the Nile?",
     "Does the Amazon exceed the Nile in length?", None, None),
    ("q-ti-024", "Is the population of India larger than the population of China?",
     "Does India have a bigger population compared with China?",
     "two intentions right subgraph", None),
    ("q-ti-025", "Was the Eiffel Tower built earlier than the Empire State Building?",
     "Did construction of the Eiffel Tower finish before the Empire State Building went up?",
     None, None),
    ("q-ti-026", "What is the capital of Peru and who is its president?",
     "Name Peru's capital city and its current president.",
     "two intentions right subgraph", None),
    ("q-ti-027", "Who founded Apple and when was the company founded?",
     "Name the founder of Apple along with the founding year.", None, None),
    ("q-ti-028", "Is the Atlantic Ocean smaller than the Pacific Ocean?",
     "Compared with the Pacific, is the Atlantic the lesser ocean in area?",
     "two intentions right subgraph", None),
    ("q-ti-029", "Was the 2008 Summer Olympics attendance higher than the 2012 attendance?",
     "Did more spectators attend the 2008 Summer Olympics compared with 2012?", None, None),
    ("q-ti-030", "Which river is longer, the Danube or the Volga, and which is wider?",
     "Of the Danube and the Volga, state the longer river and the wider one.", None, None),
    # --- boolean ----------------------------------------------------------
    ("q-bool-031", "Did Australia's GDP exceed £400 billion in 2012?",
     "In 2012, was the Australian GDP above £400 billion?", "boolean", None),
    ("q-bool-032", "Is Berlin the capital of Germany?",
     "Does Berlin serve as Germany's capital city?", None,
     "ASK WHERE { wd:Q183 wdt:P36 wd:Q64 }"),
    ("q-bool-033", "Did the {chancellor} of Germany resign in 2004?",
     "Did the German chancellor step down in 2004?", "boolean", None),
    ("q-bool-034", "Was Napoleon born on Corsica?",
     "Is Corsica the birthplace of Napoleon?", None, None),
    ("q-bool-035", "Does the Rhine flow through Basel?",
     "Is Basel on the Rhine river?", "boolean", None),
    ("q-bool-036", "Does light travel at 299792.458 kilometres per second in a vacuum?",
     "Is the speed of light in a vacuum equal to 299792.458 kilometres per second?", None, None),
    ("q-bool-037", "Can penguins fly?",
     "Are penguins capable of flight?", "boolean", None),
    ("q-bool-038", "Is the Great Barrier Reef off the coast of Queensland?",
     "Does the Great Barrier Reef lie near Queensland?", None, None),
    ("q-bool-039", "Was the printing press invented in the fifteenth century?",
     "Did the invention of the printing press happen in the fifteenth century?", "boolean", None),
    ("q-bool-040", "Did Iceland host the 1986 Reagan-Gorbachev summit?",
     "Was the 1986 summit between Reagan and Gorbachev held in Iceland?", None, None),
    # --- counting ---------------------------------------------------------
    ("q-cnt-041", "How many countries border Mexico?",
     "With how many countries does Mexico share a border?", "count", None),
    ("q-cnt-042", "How many official languages does South Africa have?",
     "What is the count of South Africa's official languages?", None, None),
    ("q-cnt-043", "How many moons does Mars have?",
     "What is the number of Martian moons?", "count", None),
    ("q-cnt-044", "How many bones are in the adult human body?",
     "The adult human skeleton contains what number of bones?", None, None),
    ("q-cnt-045", "How many states make up the United States?",
     "What is the total of states forming the United States?", "count", None),
    ("q-cnt-046", "How many players are on a standard soccer team?",
     "A standard soccer team fields what number of players?", None, None),
    ("q-cnt-047", "How many symphonies did Beethoven compose?",
     "What is the tally of symphonies Beethoven wrote?", "count", None),
    ("q-cnt-048", "How many moons does Jupiter have?",
     "How many moons does Jupiter have?", None, None),
    ("q-cnt-049", "How many time zones does Russia span?",
     "Russia stretches across what number of time zones?", "count", None),
    ("q-cnt-050", "How many chambers does the human heart have?",
     "The human heart is divided into what number of chambers?", None, None),
    # --- ranking ----------------------------------------------------------
    ("q-rk-051", "Which country in Africa has the lowest urban population?",
     "Name the African country whose urban population is the smallest.", "rank", None),
    ("q-rk-052", "Which country in Europe has the highest GDP?",
     "Name the European country topping the GDP table.", None, None),
    ("q-rk-053", "What is the tallest mountain in Japan?",
     "Name Japan's loftiest peak.", "rank", None),
    ("q-rk-054", "Which planet in the solar system has the most moons?",
     "Name the planet with the greatest moon count in the solar system.", None, None),
    ("q-rk-055", "Which country in {continent} has the highest literacy rate?",
     "Which country in {continent} has the highest literacy rate?", None, None),
    ("q-rk-056", "What is the longest river in Asia?",
     "Name Asia's river of greatest length.", "rank", None),
    ("q-rk-057", "Which element has the smallest atomic radius?",
     "Name the element whose atomic radius is least.", None, None),
    ("q-rk-058", "What is the oldest university in the world?",
     "Name the university regarded as the world's earliest founded.", "rank", None),
    ("q-rk-059", "Which ocean is the deepest?",
     "Name the ocean with the greatest depth.", None, None),
    ("q-rk-060", "Which city has the largest population in South America?",
     "Name South America's city ranked first by population.", "rank", None),
]

EXPECTED_TYPES = {
    "SingleFact": 20,
    "TwoIntention": 10,
    "Boolean": 10,
    "Counting": 10,
    "Ranking": 10,
}

# uid -> (categories, locus) for every planted lint error
PLANTED = {
    "q-sf-007": {"FileExtension": "Paraphrase"},
    "q-sf-012": {"EmptyField": "Paraphrase"},
    "q-sf-015": {"MissingAccents": "Paraphrase"},
    "q-bool-033": {"TemplateTerm": "Question"},
    "q-cnt-048": {"IdenticalParaphrase": "Both"},
    "q-rk-055": {"TemplateTerm": "Both", "IdenticalParaphrase": "Both"},
}


def build() -> None:
    records = []
    for uid, question, paraphrase, subgraph, sparql in ROWS:
        rec: dict[str, object] = {"uid": uid, "question": question, "paraphrase": paraphrase}
        if subgraph is not None:
            rec["subgraph"] = subgraph
        if sparql is not None:
            rec["sparql"] = sparql
        records.append(rec)

    OUT.mkdir(parents=True, exist_ok=True)
    corpus_path = OUT / "corpus60.jsonl"
    with corpus_path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    corpus = load(corpus_path)
    assert len(corpus) == 60, len(corpus)

    counts: dict[str, int] = {}
    for point in corpus:
        counts[point.qtype.value] = counts.get(point.qtype.value, 0) + 1
    assert counts == EXPECTED_TYPES, counts

    report = scan(corpus)
    flagged = {
        uid: {f.category: f.locus.value for f in fl}
        for uid, fl in report.flags.items()
    }
    assert flagged == PLANTED, flagged
    assert report.total_rejected_pct() == 10.0, report.total_rejected_pct()

    manifest = {
        "total": 60,
        "type_counts": EXPECTED_TYPES,
        "planted_errors": {uid: PLANTED[uid] for uid in sorted(PLANTED)},
        "category_counts": dict(sorted(report.category_counts().items())),
        "rejected_uids": sorted(flagged),
        "total_rejected_pct": report.total_rejected_pct(),
    }
    manifest_path = OUT / "corpus60_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {corpus_path} and {manifest_path}")
    print(json.dumps(manifest, indent=2, ensure_ascii=False))


if __name__ == "__main__":
    build()
