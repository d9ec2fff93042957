"""Regenerate tests/data/rows50.jsonl and the adequacy label fixtures.

The cosine values are designed so the per-type aggregates come out as
round numbers with closed-form population standard deviations; the
expected cells are frozen in tests/test_harness.py.  Rerun only when
the design changes, and update the frozen expectations to match.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "tests" / "data"

UIDS = {
    "SingleFact": ["q-sf-001", "q-sf-002", "q-sf-003", "q-sf-004", "q-sf-005"],
    "TwoIntention": ["q-ti-021", "q-ti-022", "q-ti-023", "q-ti-024", "q-ti-025"],
    "Boolean": ["q-bool-031", "q-bool-032", "q-bool-033", "q-bool-034", "q-bool-035"],
    "Counting": ["q-cnt-041", "q-cnt-042", "q-cnt-043", "q-cnt-044", "q-cnt-045"],
    "Ranking": ["q-rk-051", "q-rk-052", "q-rk-053", "q-rk-054", "q-rk-055"],
}

VALUES = {
    "sysA": {
        "SingleFact": [0.6, 0.7, 0.8, 0.9, 1.0],    # mean .80, pstd sqrt(.02)
        "TwoIntention": [0.4, 0.4, 0.5, 0.6, 0.6],  # mean .50, pstd sqrt(.008)
        "Boolean": [0.7, 0.75, 0.8, 0.85, 0.9],      # mean .80, pstd sqrt(.005)
        "Counting": [0.5, 0.6, 0.6, 0.6, 0.7],       # mean .60, pstd sqrt(.004)
        "Ranking": [0.2, 0.4, 0.6, 0.8, 1.0],        # mean .60, pstd sqrt(.08)
    },
    "sysB": {
        "SingleFact": [0.5, 0.6, 0.7, 0.8, 0.9],     # mean .70, pstd sqrt(.02)
        "TwoIntention": [0.5, 0.6, 0.7, 0.8, 0.9],   # mean .70, pstd sqrt(.02)
        "Boolean": [0.3, 0.3, 0.5, 0.7, 0.7],        # mean .50, pstd sqrt(.032)
        "Counting": [0.65, 0.7, 0.75, 0.8, 0.85],    # mean .75, pstd sqrt(.005)
        "Ranking": [0.8, 0.85, 0.9, 0.95, 1.0],      # mean .90, pstd sqrt(.005)
    },
}

# Label pattern per 5-value type block: indexes 0-1 Adequate, 2
# Inadequate, 3-4 Trivial.  Per system: 10 A / 5 I / 10 T.
LABELS = ["Adequate", "Adequate", "Inadequate", "Trivial", "Trivial"]


def build() -> None:
    rows = []
    clean_records = []
    for system, per_type in VALUES.items():
        for qtype, values in per_type.items():
            for i, value in enumerate(values):
                uid = UIDS[qtype][i]
                rows.append(
                    {
                        "uid": uid,
                        "system": system,
                        "bleu_cr": round(value * 0.9, 6),
                        "bleu_cs": round(1.0 - value * 0.5, 6),
                        "ibleu": round(0.7 * value * 0.9 - 0.3 * (1.0 - value * 0.5), 6),
                        "cosine_cs": value,
                    }
                )
                clean_records.append(
                    {"uid": uid, "system": system, "label": LABELS[i], "annotator": "ann-1"}
                )

    with (OUT / "rows50.jsonl").open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    with (OUT / "adequacy_clean.jsonl").open("w", encoding="utf-8") as fh:
        for rec in clean_records:
            fh.write(json.dumps(rec) + "\n")

    # Error-slice labels: 40% A / 50% I / 10% T over 50 records.  Only
    # the label frequencies matter for the clean-vs-error comparison,
    # so uids just cycle through the corpus.
    all_uids = [uid for uids in UIDS.values() for uid in uids]
    error_labels = ["Adequate"] * 20 + ["Inadequate"] * 25 + ["Trivial"] * 5
    with (OUT / "adequacy_errors.jsonl").open("w", encoding="utf-8") as fh:
        for i, label in enumerate(error_labels):
            rec = {
                "uid": all_uids[i % len(all_uids)],
                "system": "sysA" if i % 2 == 0 else "sysB",
                "label": label,
                "annotator": "ann-2",
            }
            fh.write(json.dumps(rec) + "\n")

    # Sanity-check the designed aggregates against closed forms.
    for system, per_type in VALUES.items():
        for qtype, values in per_type.items():
            mean = sum(values) / len(values)
            var = sum((v - mean) ** 2 for v in values) / len(values)
            print(f"{system:5s} {qtype:13s} mean={mean:.4f} pstd={math.sqrt(var):.16f}")
        pooled = [v for values in per_type.values() for v in values]
        p_mean = sum(pooled) / len(pooled)
        p_var = sum((v - p_mean) ** 2 for v in pooled) / len(pooled)
        print(f"{system:5s} {'Average':13s} mean={p_mean:.4f} pstd={math.sqrt(p_var):.16f}")
        non_trivial = [
            values[i] for values in per_type.values() for i in range(3)
        ]
        print(f"{system:5s} mean over non-trivial = {sum(non_trivial) / len(non_trivial)!r}")
    print("wrote rows50.jsonl, adequacy_clean.jsonl, adequacy_errors.jsonl")


if __name__ == "__main__":
    build()
