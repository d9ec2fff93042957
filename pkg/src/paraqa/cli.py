"""Command-line interface.

Subcommands mirror the package's workflow: load and inspect a corpus,
scan it for dataset errors, score candidate paraphrases, query a
phrase table, run the recovery experiment, emit the standard reports,
and serve the annotation backend.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import alist as alist_mod
from . import corpus as corpus_mod
from . import errscan, harness, metrics, paragen
from .errors import ParaqaError


def _fail(exc: Exception) -> "click.ClickException":
    return click.ClickException(str(exc))


def _load_corpus(path: str, fmt: str, field_map: str | None, rules: str | None = None):
    fmap = corpus_mod.FieldMap.from_file(field_map) if field_map else None
    table = corpus_mod.RuleTable.load(rules) if rules else None
    return corpus_mod.load(path, format=fmt, field_map=fmap, rules=table)


@click.group()
@click.version_option(package_name="paraqa")
def main() -> None:
    """Paraphrase quality toolkit for question-answering corpora."""


@main.group()
def corpus() -> None:
    """Corpus loading and inspection."""


@corpus.command("load")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", default="auto", type=click.Choice(["auto", "json-array", "jsonl"]))
@click.option("--field-map", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON or TOML file remapping source keys.")
@click.option("--rules", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Question-type rule table (JSON); default is bundled.")
@click.option("--stats", is_flag=True, help="Print per-type counts.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the canonical JSONL form here.")
def corpus_load(path: str, fmt: str, field_map: str | None, rules: str | None,
                stats: bool, out: str | None) -> None:
    """Load a corpus, report its size, optionally reserialize it."""
    try:
        corp = _load_corpus(path, fmt, field_map, rules)
    except ParaqaError as exc:
        raise _fail(exc) from exc
    click.echo(f"loaded {len(corp)} data points from {path}")
    if stats:
        for qtype, count in sorted(corp.type_counts().items(), key=lambda kv: kv[0].value):
            click.echo(f"{qtype.value:<14} {count}")
    if out:
        corpus_mod.save(corp, out)
        click.echo(f"wrote canonical form to {out}")


@main.command("scan")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", default="auto", type=click.Choice(["auto", "json-array", "jsonl"]))
@click.option("--field-map", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None,
              help="Write the full JSON report here.")
@click.option("--filtered", type=click.Path(dir_okay=False), default=None,
              help="Write the corpus minus flagged items here (JSONL).")
def scan_cmd(path: str, fmt: str, field_map: str | None,
             report_path: str | None, filtered: str | None) -> None:
    """Scan a corpus for the five automatic error classes."""
    try:
        corp = _load_corpus(path, fmt, field_map)
    except ParaqaError as exc:
        raise _fail(exc) from exc
    report = errscan.scan(corp)
    pcts = report.category_percentages()
    for category in errscan.CATEGORIES:
        count = len(report.category_uids(category))
        click.echo(f"{category:<20} {count:>6}  {pcts[category]:>5.1f}%")
    click.echo(
        f"{'Total rejected':<20} {len(report.flags):>6}  {report.total_rejected_pct():>5.1f}%"
    )
    if report_path:
        Path(report_path).write_text(harness.report_json(report.to_dict()), encoding="utf-8")
        click.echo(f"wrote report to {report_path}")
    if filtered:
        corpus_mod.save(errscan.filter_rejected(corp, report), filtered)
        click.echo(f"wrote filtered corpus to {filtered}")


@main.command("score")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--candidates", "candidates_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", default=0.7, show_default=True, type=float)
@click.option("--embeddings", "embeddings_uri", default=None,
              help='Provider URI ("file:<path>" or "http://..."); '
                   "defaults to PARAQA_EMBED_URI, else cosine is skipped.")
@click.option("--field-map", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def score_cmd(corpus_path: str, candidates_path: str, alpha: float,
              embeddings_uri: str | None, field_map: str | None, out: str) -> None:
    """Score candidate paraphrases against their corpus entries."""
    import os

    from . import embeddings as embeddings_mod

    try:
        corp = _load_corpus(corpus_path, "auto", field_map)
        loaded = paragen.load_candidates(candidates_path, known_uids=corp.by_uid.keys())
        for uid in loaded.unknown_uids:
            click.echo(f"warning: candidate uid {uid!r} not in corpus", err=True)
        provider = None
        if embeddings_uri or os.environ.get(embeddings_mod.ENV_URI):
            provider = embeddings_mod.provider_from_uri(embeddings_uri)
        known = [c for c in loaded.items if c.uid in corp.by_uid]
        rows = metrics.score_candidates(
            corp,
            known,
            config=metrics.IbleuConfig(alpha=alpha),
            provider=provider,
        )
        metrics.rows_to_jsonl(rows, out)
    except ParaqaError as exc:
        raise _fail(exc) from exc
    click.echo(f"scored {len(rows)} candidates -> {out}")


@main.group("ppdb")
def ppdb_group() -> None:
    """Phrase-table operations."""


@ppdb_group.command("query")
@click.argument("index_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("phrase")
@click.option("-k", default=5, show_default=True, type=int)
@click.option("--min-score", default=None, type=float,
              help="Drop entries scoring below this while loading.")
@click.option("--relations", default="Equivalence", show_default=True,
              help="Comma-separated relation filter; 'all' keeps everything.")
def ppdb_query(index_path: str, phrase: str, k: int,
               min_score: float | None, relations: str) -> None:
    """Print the top-k paraphrases for a phrase."""
    try:
        if relations.strip().lower() == "all":
            allowed = frozenset(paragen.Relation)
        else:
            allowed = frozenset(
                paragen.Relation(r.strip()) for r in relations.split(",") if r.strip()
            )
    except ValueError as exc:
        raise _fail(exc) from exc
    kwargs = {"relations": allowed}
    if min_score is not None:
        kwargs["min_score"] = min_score
    index = paragen.ppdb_load(index_path, **kwargs)
    if index.skipped:
        click.echo(f"warning: skipped {index.skipped} malformed line(s)", err=True)
    entries = paragen.ppdb_paraphrase(index, phrase, k)
    if not entries:
        click.echo(f"no paraphrases for {phrase!r}")
        return
    for e in entries:
        click.echo(f"{e.score:8.3f}  {e.relation.value:<18} {e.paraphrase}")


@main.command("recover")
@click.option("--cases", "cases_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Recovery cases (JSONL); default is the bundled set.")
@click.option("--paraphraser", default="identity", show_default=True,
              help='"identity", "oracle", or "file:<mapping.jsonl>" with '
                   '{"text", "paraphrase"} rows.')
@click.option("--templates", "templates_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Template file; default is the bundled set.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON report here.")
def recover_cmd(cases_path: str | None, paraphraser: str,
                templates_path: str | None, out: str | None) -> None:
    """Run the paraphrase-recovery experiment."""
    try:
        cases = (
            alist_mod.load_recovery_cases(cases_path)
            if cases_path
            else alist_mod.bundled_recovery_cases()
        )
        templates = (
            alist_mod.load_templates(templates_path)
            if templates_path
            else alist_mod.bundled_templates()
        )
        fn = _build_paraphraser(paraphraser, cases)
        report = alist_mod.recovery_experiment(cases, fn, templates)
    except ParaqaError as exc:
        raise _fail(exc) from exc
    click.echo(report.format_text(), nl=False)
    if out:
        Path(out).write_text(harness.report_json(report.to_dict()), encoding="utf-8")


def _build_paraphraser(spec: str, cases) -> "callable":
    if spec == "identity":
        return lambda text: text
    if spec == "oracle":
        # maps each hard paraphrase back to its case's question: the
        # upper bound any rewriting step could reach
        table = {c.hard_paraphrase: c.question for c in cases}
        return lambda text: table.get(text, text)
    if spec.startswith("file:"):
        mapping = {}
        with open(spec[len("file:"):], encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    mapping[str(row["text"])] = str(row["paraphrase"])
        return lambda text: mapping.get(text, text)
    raise ParaqaError(f"unknown paraphraser {spec!r}")


@main.group("report")
def report_group() -> None:
    """Emit the standard experiment reports."""


@report_group.command("aggregate")
@click.option("--rows", "rows_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="cosine_cs", show_default=True)
@click.option("--field-map", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--text", "as_text", is_flag=True, help="Print the aligned text table.")
def report_aggregate(rows_path: str, corpus_path: str, metric: str,
                  field_map: str | None, out: str | None, as_text: bool) -> None:
    """Per-system, per-type metric aggregate with weighted average."""
    try:
        corp = _load_corpus(corpus_path, "auto", field_map)
        rows = metrics.rows_from_jsonl(rows_path)
        agg = harness.aggregate_by_type(rows, corp, metric=metric)
    except (ParaqaError, ValueError) as exc:
        raise _fail(exc) from exc
    payload = harness.report_json(harness.aggregate_report(agg, metric))
    if as_text:
        click.echo(harness.format_aggregate_text(agg), nl=False)
    else:
        click.echo(payload, nl=False)
    if out:
        Path(out).write_text(payload, encoding="utf-8")


@report_group.command("correlation")
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rows", "rows_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", "metric_names", default="ibleu,cosine_cs", show_default=True)
@click.option("--field-map", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def report_correlation(labels_path: str, rows_path: str, corpus_path: str,
                  metric_names: str, field_map: str | None, out: str | None) -> None:
    """Adequacy-metric rank correlations per question type."""
    try:
        corp = _load_corpus(corpus_path, "auto", field_map)
        rows = metrics.rows_from_jsonl(rows_path)
        records = harness.adequacy_records_from_jsonl(labels_path)
        by_qtype: dict[str, list] = {}
        for rec in records:
            dp = corp.by_uid.get(rec.uid)
            if dp is None:
                raise ParaqaError(f"label uid {rec.uid!r} not in corpus")
            by_qtype.setdefault(dp.qtype.value, []).append(rec)
        cells = []
        for name in [m.strip() for m in metric_names.split(",") if m.strip()]:
            points = {
                qtype: harness.adequacy_vs_metric(recs, rows, metric=name)
                for qtype, recs in by_qtype.items()
            }
            cells.extend(harness.correlation_table(points, metric=name))
    except (ParaqaError, ValueError) as exc:
        raise _fail(exc) from exc
    payload = harness.report_json(
        {
            "cells": [
                {"qtype": c.qtype, "metric": c.metric, "rho": c.rho, "n_systems": c.n_systems}
                for c in cells
            ]
        }
    )
    click.echo(payload, nl=False)
    if out:
        Path(out).write_text(payload, encoding="utf-8")


@report_group.command("adequacy")
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rows", "rows_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="cosine_cs", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def report_adequacy(labels_path: str, rows_path: str, metric: str, out: str | None) -> None:
    """Scatter points: per-system adequacy share vs mean metric."""
    try:
        rows = metrics.rows_from_jsonl(rows_path)
        records = harness.adequacy_records_from_jsonl(labels_path)
        points = harness.adequacy_vs_metric(records, rows, metric=metric)
    except (ParaqaError, ValueError) as exc:
        raise _fail(exc) from exc
    payload = harness.points_to_csv(points)
    click.echo(payload, nl=False)
    if out:
        Path(out).write_text(payload, encoding="utf-8")


@report_group.command("error-effect")
@click.option("--clean", "clean_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--with-errors", "errors_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def report_error_effect(clean_path: str, errors_path: str, out: str | None) -> None:
    """Label frequency shift between clean and error-bearing slices."""
    try:
        effect = harness.error_effect(
            harness.adequacy_records_from_jsonl(clean_path),
            harness.adequacy_records_from_jsonl(errors_path),
        )
    except ParaqaError as exc:
        raise _fail(exc) from exc
    payload = harness.error_effect_to_csv(effect)
    click.echo(payload, nl=False)
    if out:
        Path(out).write_text(payload, encoding="utf-8")


@main.group("annotate")
def annotate_group() -> None:
    """Annotation service."""


@annotate_group.command("serve")
@click.option("--port", default=8710, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data", "data_dir", required=True, type=click.Path(file_okay=False))
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Validate item uids against this corpus.")
@click.option("--static", "static_dir", type=click.Path(file_okay=False, exists=True), default=None,
              help="Serve a built UI from this directory.")
def annotate_serve(port: int, host: str, data_dir: str,
                   corpus_path: str | None, static_dir: str | None) -> None:
    """Run the annotation backend (journal-backed, one JSONL per session)."""
    import uvicorn

    from .annosvc import create_app

    known_uids = None
    if corpus_path:
        known_uids = set(_load_corpus(corpus_path, "auto", None).by_uid)
    app = create_app(data_dir, known_uids=known_uids, static_dir=static_dir)
    click.echo(f"annotation service on http://{host}:{port} (data: {data_dir})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":  # pragma: no cover
    main(sys.argv[1:])
