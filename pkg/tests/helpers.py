"""Shared test utilities: synthetic documents and scripted backends."""

from __future__ import annotations

import random

from chunkcheck.backends import UnitRelevanceBackend
from chunkcheck.corpus import Document, Unit
from chunkcheck.scoring import BackendOutput, ScorerBackend


def make_doc(doc_id: str, n_units: int, words_per_unit: int = 3) -> Document:
    """Uniform-size document with unique, newline-free unit texts."""
    units = [
        Unit(index=i, text=" ".join(f"{doc_id}u{i}w{j}" for j in range(words_per_unit)))
        for i in range(n_units)
    ]
    return Document(id=doc_id, units=units)


def make_sized_doc(doc_id: str, unit_token_counts: list[int]) -> Document:
    """Document whose units have exactly the given whitespace token counts."""
    units = [
        Unit(index=i, text=" ".join(f"{doc_id}u{i}w{j}" for j in range(c)))
        for i, c in enumerate(unit_token_counts)
    ]
    return Document(id=doc_id, units=units)


def relevance_fixture(doc_id: str, base_scores: list[float], words_per_unit: int = 3):
    """(document, max-composable backend) for the given per-unit base scores."""
    doc = make_doc(doc_id, len(base_scores), words_per_unit)
    backend = UnitRelevanceBackend({doc_id: list(base_scores)}, [doc])
    return doc, backend


def random_scores(n: int, rng: random.Random) -> list[float]:
    return [round(rng.random(), 6) for _ in range(n)]


class ScriptedBackend(ScorerBackend):
    """Returns a fixed probability per premise; counts evaluate calls."""

    name = "scripted"

    def __init__(self, by_premise: dict[str, float], default: float | None = None):
        self.by_premise = dict(by_premise)
        self.default = default
        self.calls = 0

    def evaluate(self, premise, hypothesis):
        self.calls += 1
        if premise in self.by_premise:
            return BackendOutput(probability=self.by_premise[premise])
        if self.default is None:
            raise KeyError(f"unscripted premise: {premise!r}")
        return BackendOutput(probability=self.default)


class FlakyBackend(ScorerBackend):
    """Raises on hypotheses containing a marker; otherwise a fixed score."""

    name = "flaky"

    def __init__(self, marker: str = "BOOM", score: float = 0.5):
        self.marker = marker
        self.score = score
        self.calls = 0

    def evaluate(self, premise, hypothesis):
        self.calls += 1
        if self.marker in hypothesis or self.marker in premise:
            raise RuntimeError("scripted failure")
        return BackendOutput(probability=self.score)
