"""Shared fixtures: toy vector tables, tiny corpora, file builders."""

from __future__ import annotations

import datetime as dt
import json

import pytest

from hsclassify.corpus import DecisionCase, ManualEntry, Origin, parse_hs_code
from hsclassify.textproc import IdfTable, WordVectorTable, compute_idf


@pytest.fixture
def toy_vectors() -> WordVectorTable:
    """3-dim table with orthogonal axes and a synonym pair (solar ~ sunlight)."""
    return WordVectorTable(
        {
            "solar": [1.0, 0.0, 0.0],
            "sunlight": [1.0, 0.0, 0.0],
            "panel": [0.0, 1.0, 0.0],
            "cell": [0.0, 0.0, 1.0],
            "glass": [1.0, 1.0, 0.0],
            "diode": [0.0, 1.0, 1.0],
        }
    )


@pytest.fixture
def toy_idf() -> IdfTable:
    docs = [
        ["solar", "panel", "cell"],
        ["solar", "glass"],
        ["panel", "diode"],
        ["solar", "panel"],
    ]
    return compute_idf(docs)


@pytest.fixture
def uniform_idf() -> IdfTable:
    """Every token unseen, so each gets idf = ln(4): equal positive weights."""
    return IdfTable(document_count=4, values={})


def make_case(
    case_id: str,
    description: str = "Photovoltaic cell panel",
    code: str = "854140",
    date: str = "2024-01-15",
    origin: Origin = Origin.INTERNATIONAL,
    gold_evidence: tuple[str, ...] | None = None,
) -> DecisionCase:
    return DecisionCase(
        id=case_id,
        description=description,
        label=parse_hs_code(code),
        decision_date=dt.date.fromisoformat(date),
        origin=origin,
        gold_evidence=gold_evidence,
    )


def make_manual_entry(heading: str, sentences: list[str]) -> ManualEntry:
    return ManualEntry(heading=heading, sentences=tuple(sentences))


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")
