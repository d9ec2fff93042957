from __future__ import annotations

import json
from pathlib import Path

import pytest

from paraqa import corpus as corpus_mod

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def corpus60() -> corpus_mod.Corpus:
    return corpus_mod.load(DATA / "corpus60.jsonl")


@pytest.fixture(scope="session")
def corpus60_manifest() -> dict:
    return json.loads((DATA / "corpus60_manifest.json").read_text(encoding="utf-8"))
