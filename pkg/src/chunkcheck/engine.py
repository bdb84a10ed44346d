"""Consistency scoring: a sentence's score is the maximum entailment
probability over all chunks of its source document.

A text-level aggregate (min or mean over sentence scores) is provided for
multi-sentence generations; min is the default on the grounds that a text
is only as consistent as its weakest sentence. The choice is a convention
of this artifact, not an empirical claim.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .chunking import Chunk, ChunkPlan, make_chunks
from .corpus import Claim, Document, GeneratedText, TokenCounter
from .errors import ScoringError, ValidationError
from .scoring import ScoreCache, ScorerBackend, score_batch

AGGREGATIONS = ("min", "mean")


@dataclass
class SentenceScore:
    claim_id: str
    score: float
    argmax_chunk: tuple[int, int]  # unit range of the first chunk attaining the max
    scorer_calls: int
    per_chunk: list[tuple[Chunk, float]] | None = None  # retained only when explaining
    elapsed_ms: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        out = {
            "claim_id": self.claim_id,
            "score": self.score,
            "argmax_chunk": list(self.argmax_chunk),
            "scorer_calls": self.scorer_calls,
        }
        if self.per_chunk is not None:
            out["per_chunk"] = [
                {"unit_range": [c.start, c.end], "probability": p} for c, p in self.per_chunk
            ]
        return out


@dataclass
class TextScore:
    doc_id: str
    sentence_scores: list[SentenceScore]
    aggregate: float
    aggregation: str

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "aggregate": self.aggregate,
            "aggregation": self.aggregation,
            "sentences": [s.to_dict() for s in self.sentence_scores],
        }


def _max_and_argmax(plan: ChunkPlan, probs: list[float]) -> tuple[float, tuple[int, int]]:
    best = probs[0]
    best_chunk = plan.chunks[0]
    for chunk, p in zip(plan.chunks[1:], probs[1:]):
        if p > best:  # strict: ties stay on the lowest chunk index
            best = p
            best_chunk = chunk
    return best, best_chunk.unit_range


def score_sentence(
    plan: ChunkPlan,
    claim: Claim,
    backend: ScorerBackend,
    cache: ScoreCache | None = None,
    max_workers: int = 1,
    explain: bool = False,
) -> SentenceScore:
    """Max entailment probability of the claim over the plan's chunks.

    Issues one scorer call per chunk (batched); any chunk failure after the
    backend's retries fails the sentence with partial results attached.
    """
    if plan.doc_id != claim.doc_id:
        raise ValidationError(
            f"chunk plan is for {plan.doc_id!r} but claim {claim.id!r} "
            f"targets {claim.doc_id!r}"
        )
    t0 = time.perf_counter()
    pairs = [(chunk.text, claim.text) for chunk in plan.chunks]
    batch = score_batch(backend, pairs, cache=cache, max_workers=max_workers)
    if not batch.ok:
        partial = [
            (chunk, s.probability if s is not None else None)
            for chunk, s in zip(plan.chunks, batch.scores)
        ]
        raise ScoringError(
            f"claim {claim.id!r}: {len(batch.failures)} of {len(plan.chunks)} chunk "
            f"scorings failed ({batch.failures[0].error})",
            claim_id=claim.id,
            partial=partial,
            failures=batch.failures,
        )
    probs = [s.probability for s in batch.scores]
    score, argmax = _max_and_argmax(plan, probs)
    return SentenceScore(
        claim_id=claim.id,
        score=score,
        argmax_chunk=argmax,
        scorer_calls=len(plan.chunks),
        per_chunk=list(zip(plan.chunks, probs)) if explain else None,
        elapsed_ms=(time.perf_counter() - t0) * 1000.0,
    )


def aggregate_scores(values: list[float], aggregation: str) -> float:
    if aggregation == "min":
        return min(values)
    if aggregation == "mean":
        return sum(values) / len(values)
    raise ValidationError(f"unknown aggregation {aggregation!r}; choose from {AGGREGATIONS}")


def score_text(
    doc: Document,
    text: GeneratedText,
    budget: int,
    backend: ScorerBackend,
    counter: TokenCounter,
    aggregation: str = "min",
    cache: ScoreCache | None = None,
    max_workers: int = 1,
    explain: bool = False,
    plan: ChunkPlan | None = None,
) -> TextScore:
    """Score every sentence of a generated text and aggregate."""
    if text.doc_id != doc.id:
        raise ValidationError(f"text targets {text.doc_id!r}, document is {doc.id!r}")
    text.validate()
    if plan is None:
        plan = make_chunks(doc, budget, counter)
    sentence_scores = [
        score_sentence(plan, claim, backend, cache=cache, max_workers=max_workers, explain=explain)
        for claim in text.sentences
    ]
    agg = aggregate_scores([s.score for s in sentence_scores], aggregation)
    return TextScore(
        doc_id=doc.id,
        sentence_scores=sentence_scores,
        aggregate=agg,
        aggregation=aggregation,
    )


def classify(score: float, threshold: float) -> bool:
    """Consistent iff score >= threshold."""
    if not (0.0 <= score <= 1.0):
        raise ValidationError(f"score {score} outside [0, 1]")
    if not (0.0 <= threshold <= 1.0):
        raise ValidationError(f"threshold {threshold} outside [0, 1]")
    return score >= threshold
