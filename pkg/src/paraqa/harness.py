"""Experiment aggregation: turning scored rows and adequacy labels
into the standard report shapes.

Four products: per-system-per-type metric aggregates with a weighted
average column, per-system adequacy versus mean metric points,
rank-correlation cells between adequacy and each metric, and the label
frequency shift between a clean and an error-bearing corpus slice.
All emitters are deterministic: identical inputs give byte-identical
reports (rows sort by system, then question type).
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from .corpus import Corpus
from .errors import ParaqaError, UnknownUid
from .metrics import MetricRow, spearman_rho

__all__ = [
    "AVERAGE",
    "ADEQUACY_LABELS",
    "AggregateRow",
    "AdequacyRecord",
    "SystemPoint",
    "CorrelationCell",
    "ErrorEffect",
    "JoinFailure",
    "EmptySet",
    "aggregate_by_type",
    "adequacy_vs_metric",
    "correlation_table",
    "error_effect",
    "adequacy_records_from_jsonl",
    "aggregate_report",
    "format_aggregate_text",
    "points_to_csv",
    "error_effect_to_csv",
    "report_json",
]

AVERAGE = "Average"
ADEQUACY_LABELS = ("Adequate", "Inadequate", "Trivial")

_METRIC_FIELDS = ("bleu_cr", "bleu_cs", "ibleu", "cosine_cs")


class JoinFailure(ParaqaError):
    """An adequacy record has no scored row to pair with."""


class EmptySet(ParaqaError):
    """An aggregate was requested over zero records."""


@dataclass(frozen=True)
class AggregateRow:
    """Mean and population standard deviation of one metric for one
    system on one question type; qtype is "Average" for the pooled,
    n-weighted row.  best marks the top mean within the qtype."""

    system: str
    qtype: str
    mean: float
    std: float
    n: int
    best: bool = False


@dataclass(frozen=True)
class AdequacyRecord:
    uid: str
    system: str
    label: str
    annotator: str = ""
    timestamp: str = ""

    def __post_init__(self) -> None:
        if self.label not in ADEQUACY_LABELS:
            raise ValueError(f"bad adequacy label {self.label!r}")


@dataclass(frozen=True)
class SystemPoint:
    """One scatter point: a system's adequacy share over all its
    records against its mean metric over the non-trivial ones.
    mean_metric is None when every record was Trivial."""

    system: str
    adequate_pct: float
    mean_metric: float | None
    n_records: int
    n_scored: int


@dataclass(frozen=True)
class CorrelationCell:
    qtype: str
    metric: str
    rho: float
    n_systems: int


@dataclass(frozen=True)
class ErrorEffect:
    """Label frequencies (percent) on the clean and error slices."""

    clean: dict
    with_errors: dict


def _metric_value(row: MetricRow, metric: str) -> float | None:
    if metric not in _METRIC_FIELDS:
        raise ValueError(f"unknown metric {metric!r}, expected one of {_METRIC_FIELDS}")
    return getattr(row, metric)


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _pstd(values: Sequence[float], mean: float) -> float:
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def aggregate_by_type(
    rows: Iterable[MetricRow],
    corpus: Corpus,
    metric: str = "cosine_cs",
) -> list[AggregateRow]:
    """Group rows by (system, question type of the row's uid) and
    aggregate the chosen metric.

    Each system also gets an "Average" row pooling all its values,
    which equals the per-type means weighted by their n.  Rows sort by
    (system, qtype) with Average last; best flags the highest mean per
    qtype column.  Rows whose uid is missing from the corpus raise
    UnknownUid; rows lacking the metric (cosine without a provider)
    raise EmptySet naming the gap.
    """
    groups: dict[tuple[str, str], list[float]] = {}
    pooled: dict[str, list[float]] = {}
    for row in rows:
        dp = corpus.by_uid.get(row.uid)
        if dp is None:
            raise UnknownUid(row.uid)
        value = _metric_value(row, metric)
        if value is None:
            raise EmptySet(
                f"row ({row.uid}, {row.system}) has no {metric} value"
            )
        groups.setdefault((row.system, dp.qtype.value), []).append(value)
        pooled.setdefault(row.system, []).append(value)
    if not groups:
        raise EmptySet("no rows to aggregate")

    out: list[AggregateRow] = []
    for (system, qtype), values in groups.items():
        mean = _mean(values)
        out.append(
            AggregateRow(
                system=system,
                qtype=qtype,
                mean=mean,
                std=_pstd(values, mean),
                n=len(values),
                best=False,
            )
        )
    for system, values in pooled.items():
        mean = _mean(values)
        out.append(
            AggregateRow(
                system=system,
                qtype=AVERAGE,
                mean=mean,
                std=_pstd(values, mean),
                n=len(values),
                best=False,
            )
        )

    best_by_qtype: dict[str, float] = {}
    for row in out:
        cur = best_by_qtype.get(row.qtype)
        if cur is None or row.mean > cur:
            best_by_qtype[row.qtype] = row.mean
    flagged = [
        AggregateRow(
            system=r.system,
            qtype=r.qtype,
            mean=r.mean,
            std=r.std,
            n=r.n,
            best=(r.mean == best_by_qtype[r.qtype]),
        )
        for r in out
    ]
    flagged.sort(key=lambda r: (r.system, r.qtype == AVERAGE, r.qtype))
    return flagged


def adequacy_vs_metric(
    records: Iterable[AdequacyRecord],
    rows: Iterable[MetricRow],
    metric: str = "cosine_cs",
) -> list[SystemPoint]:
    """Per-system adequacy share against the mean metric.

    The adequate percentage is taken over ALL of a system's records;
    the metric mean only over non-trivial ones (Adequate or
    Inadequate), since trivial pairs measure nothing.  A record with no
    matching (uid, system) row raises JoinFailure.  A system whose
    records are all Trivial gets mean_metric None rather than a made-up
    zero.
    """
    record_list = list(records)
    if not record_list:
        raise EmptySet("no adequacy records")
    row_map = {(r.uid, r.system): r for r in rows}
    missing = [
        (rec.uid, rec.system)
        for rec in record_list
        if (rec.uid, rec.system) not in row_map
    ]
    if missing:
        raise JoinFailure(f"records without scored rows: {missing[:5]}"
                          + (" ..." if len(missing) > 5 else ""))

    by_system: dict[str, list[AdequacyRecord]] = {}
    for rec in record_list:
        by_system.setdefault(rec.system, []).append(rec)

    points = []
    for system in sorted(by_system):
        recs = by_system[system]
        adequate = sum(1 for r in recs if r.label == "Adequate")
        non_trivial = [r for r in recs if r.label != "Trivial"]
        values = []
        for rec in non_trivial:
            value = _metric_value(row_map[(rec.uid, rec.system)], metric)
            if value is None:
                raise EmptySet(f"row ({rec.uid}, {rec.system}) has no {metric} value")
            values.append(value)
        points.append(
            SystemPoint(
                system=system,
                adequate_pct=100.0 * adequate / len(recs),
                mean_metric=_mean(values) if values else None,
                n_records=len(recs),
                n_scored=len(values),
            )
        )
    return points


def correlation_table(
    points_by_qtype: Mapping[str, Sequence[SystemPoint]],
    metric: str,
) -> list[CorrelationCell]:
    """Spearman correlation between adequacy share and metric mean
    across systems, one cell per question type.

    Fewer than two systems with a metric mean in a cell raises
    DegenerateInput (via spearman_rho's own checks after filtering).
    """
    from .metrics import DegenerateInput

    cells = []
    for qtype in sorted(points_by_qtype):
        points = [p for p in points_by_qtype[qtype] if p.mean_metric is not None]
        if len(points) < 2:
            raise DegenerateInput(
                f"{qtype}: need at least two systems with metric means"
            )
        rho = spearman_rho(
            [p.adequate_pct for p in points],
            [p.mean_metric for p in points],
        )
        cells.append(
            CorrelationCell(qtype=qtype, metric=metric, rho=rho, n_systems=len(points))
        )
    return cells


def _label_pcts(records: Sequence[AdequacyRecord]) -> dict:
    return {
        label: 100.0 * sum(1 for r in records if r.label == label) / len(records)
        for label in ADEQUACY_LABELS
    }


def error_effect(
    clean: Iterable[AdequacyRecord],
    with_errors: Iterable[AdequacyRecord],
) -> ErrorEffect:
    """Label frequency triples for a clean and an error-bearing slice.

    Each triple sums to 100 (up to float rounding).  Either slice being
    empty raises EmptySet.
    """
    clean_list = list(clean)
    error_list = list(with_errors)
    if not clean_list or not error_list:
        raise EmptySet("both slices need at least one record")
    return ErrorEffect(
        clean=_label_pcts(clean_list),
        with_errors=_label_pcts(error_list),
    )


def adequacy_records_from_jsonl(path) -> list[AdequacyRecord]:
    """Read label records (uid, system, label [, annotator, timestamp])
    from JSONL, e.g. an annotation-session export."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                records.append(
                    AdequacyRecord(
                        uid=str(row["uid"]),
                        system=str(row.get("system", "")),
                        label=str(row["label"]),
                        annotator=str(row.get("annotator", "")),
                        timestamp=str(row.get("timestamp", "")),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParaqaError(f"{path}:{line_no}: bad label record: {exc}") from exc
    return records


def report_json(payload: object) -> str:
    """Canonical JSON: sorted keys, no trailing whitespace, newline at
    end.  Byte-identical for identical payloads."""
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def aggregate_report(rows: Sequence[AggregateRow], metric: str) -> dict:
    """Machine-readable aggregate table; the averaging policy is named
    so readers need not guess."""
    return {
        "metric": metric,
        "average_weighting": "weighted-by-n",
        "rows": [
            {
                "system": r.system,
                "qtype": r.qtype,
                "mean": r.mean,
                "std": r.std,
                "n": r.n,
                "best": r.best,
            }
            for r in rows
        ],
    }


def format_aggregate_text(rows: Sequence[AggregateRow]) -> str:
    """Aligned text table: systems as rows, question types as columns,
    cells "mean ± std", best cell per column starred."""
    systems = sorted({r.system for r in rows})
    qtypes = sorted({r.qtype for r in rows if r.qtype != AVERAGE})
    if any(r.qtype == AVERAGE for r in rows):
        qtypes.append(AVERAGE)
    cell: dict[tuple[str, str], str] = {}
    for r in rows:
        mark = "*" if r.best else " "
        cell[(r.system, r.qtype)] = f"{r.mean:.2f} ± {r.std:.2f}{mark}"
    width = max(
        [len(q) for q in qtypes]
        + [len(c) for c in cell.values()]
        + [1]
    )
    sys_width = max([len(s) for s in systems] + [len("system")])
    header = " | ".join(["system".ljust(sys_width)] + [q.ljust(width) for q in qtypes])
    sep = "-+-".join(["-" * sys_width] + ["-" * width for _ in qtypes])
    lines = [header, sep]
    for system in systems:
        row = [system.ljust(sys_width)]
        for q in qtypes:
            row.append(cell.get((system, q), "-").ljust(width))
        lines.append(" | ".join(row))
    return "\n".join(lines) + "\n"


def points_to_csv(points: Sequence[SystemPoint]) -> str:
    """Scatter-point CSV: system, adequate_pct, mean_metric, n."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["system", "adequate_pct", "mean_metric", "n_records", "n_scored"])
    for p in points:
        writer.writerow(
            [
                p.system,
                f"{p.adequate_pct:.6g}",
                "" if p.mean_metric is None else f"{p.mean_metric:.6g}",
                p.n_records,
                p.n_scored,
            ]
        )
    return buf.getvalue()


def error_effect_to_csv(effect: ErrorEffect) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["slice"] + [label.lower() for label in ADEQUACY_LABELS])
    for name, pcts in (("clean", effect.clean), ("with_errors", effect.with_errors)):
        writer.writerow([name] + [f"{pcts[label]:.6g}" for label in ADEQUACY_LABELS])
    return buf.getvalue()
