"""Locate the source unit that best supports a claim.

Greedy search-tree descent: split the current unit range into at most k
token-balanced parts, score each part against the claim, descend into the
best one, stop at a single unit. Needs O(log n) scorer calls where the
exhaustive baseline needs n.

Exactness caveat: descent is provably equal to the exhaustive argmax when
the scorer is max-composable (a range scores the max of its units), as the
UnitRelevanceBackend is by construction. Real entailment scorers are not,
so the greedy result can diverge; see the regression fixtures in tests.
Keeping several branches alive per level (a beam) would trade calls for
robustness against that, but the trace format and all defaults here are
single-branch greedy.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chunking import premise_text, split_range
from .corpus import Claim, Document, TokenCounter, WhitespaceCounter
from .errors import ScoringError, ValidationError
from .scoring import ScoreCache, ScorerBackend, score_batch


@dataclass
class TraceLevel:
    candidate_ranges: list[tuple[int, int]]
    scores: list[float]
    chosen: int  # index into candidate_ranges

    def to_dict(self) -> dict:
        return {
            "candidate_ranges": [list(r) for r in self.candidate_ranges],
            "scores": self.scores,
            "chosen": self.chosen,
        }


@dataclass
class RetrievalTrace:
    claim_id: str
    levels: list[TraceLevel]
    result_unit: int
    result_score: float
    scorer_calls: int

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "result_unit": self.result_unit,
            "result_score": self.result_score,
            "scorer_calls": self.scorer_calls,
            "levels": [lvl.to_dict() for lvl in self.levels],
        }


@dataclass
class BruteForceResult:
    unit: int
    score: float
    scorer_calls: int


def _pick_best(scores: list[float]) -> int:
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:  # ties keep the lowest start index
            best = i
    return best


def _score_ranges(doc, claim, backend, ranges, cache, max_workers, partial_levels):
    pairs = [(premise_text(doc, a, b), claim.text) for a, b in ranges]
    batch = score_batch(backend, pairs, cache=cache, max_workers=max_workers)
    if not batch.ok:
        raise ScoringError(
            f"claim {claim.id!r}: retrieval scoring failed at ranges {ranges} "
            f"({batch.failures[0].error})",
            claim_id=claim.id,
            partial=partial_levels,
            failures=batch.failures,
        )
    return [s.probability for s in batch.scores]


def retrieve(
    doc: Document,
    claim: Claim,
    backend: ScorerBackend,
    k: int = 2,
    budget: int | None = None,
    counter: TokenCounter | None = None,
    cache: ScoreCache | None = None,
    max_workers: int = 1,
) -> RetrievalTrace:
    """Greedy descent to the single best-supporting unit, with a full trace.

    ``budget`` (or the backend's own premise cap) bounds part sizes: when a
    multi-unit part would exceed it, the level's branching factor grows until
    every part fits, mirroring how one would split further to fit memory.
    """
    if not doc.units:
        raise ValidationError(f"document {doc.id!r} has no units")
    if k < 2:
        raise ValidationError(f"branching factor must be >= 2, got {k}")
    counter = counter or WhitespaceCounter()
    cap = _effective_cap(backend, budget)

    levels: list[TraceLevel] = []
    calls = 0
    start, end = 0, len(doc.units)
    if end - start == 1:
        # Degenerate descent: score the lone unit so the trace carries a score.
        scores = _score_ranges(doc, claim, backend, [(0, 1)], cache, max_workers, levels)
        levels.append(TraceLevel(candidate_ranges=[(0, 1)], scores=scores, chosen=0))
        return RetrievalTrace(
            claim_id=claim.id,
            levels=levels,
            result_unit=0,
            result_score=scores[0],
            scorer_calls=1,
        )

    while end - start > 1:
        parts = _split_under_cap(doc, start, end, k, counter, cap)
        scores = _score_ranges(doc, claim, backend, parts, cache, max_workers, levels)
        calls += len(parts)
        chosen = _pick_best(scores)
        levels.append(TraceLevel(candidate_ranges=parts, scores=scores, chosen=chosen))
        start, end = parts[chosen]

    last = levels[-1]
    return RetrievalTrace(
        claim_id=claim.id,
        levels=levels,
        result_unit=start,
        result_score=last.scores[last.chosen],
        scorer_calls=calls,
    )


def _effective_cap(backend: ScorerBackend, budget: int | None) -> int | None:
    caps = [c for c in (budget, backend.max_premise_tokens) if c is not None]
    return min(caps) if caps else None


def _split_under_cap(doc, start, end, k, counter, cap):
    """Split [start, end), widening k until every multi-unit part fits the cap."""
    parts = split_range(doc, start, end, k, counter)
    if cap is None:
        return parts
    counts = doc.unit_token_counts(counter)
    kk = k
    while kk < end - start:
        oversized = any(
            b - a > 1 and sum(counts[a:b]) > cap for a, b in parts
        )
        if not oversized:
            break
        kk += 1
        parts = split_range(doc, start, end, kk, counter)
    return parts


def brute_force_retrieve(
    doc: Document,
    claim: Claim,
    backend: ScorerBackend,
    cache: ScoreCache | None = None,
    max_workers: int = 1,
) -> BruteForceResult:
    """Score every unit individually; argmax with ties to the lowest index."""
    if not doc.units:
        raise ValidationError(f"document {doc.id!r} has no units")
    ranges = [(i, i + 1) for i in range(len(doc.units))]
    scores = _score_ranges(doc, claim, backend, ranges, cache, max_workers, [])
    best = _pick_best(scores)
    return BruteForceResult(unit=best, score=scores[best], scorer_calls=len(ranges))


def retrieval_hit(trace: RetrievalTrace, relevant_units: frozenset[int] | set[int]) -> bool:
    """Whether the retrieved unit belongs to the annotated relevant set."""
    if not relevant_units:
        raise ValidationError("relevant_units must be non-empty")
    return trace.result_unit in relevant_units


def call_count_bound(n: int, k: int) -> int:
    """Upper bound on greedy scorer calls: k * ceil(log_k n) + k."""
    depth = 0
    reach = 1
    while reach < n:  # ceil(log_k n) without float fuzz
        reach *= k
        depth += 1
    return k * depth + k


def verify_trace(
    doc: Document,
    claim: Claim,
    backend: ScorerBackend,
    trace: RetrievalTrace,
    cache: ScoreCache | None = None,
) -> None:
    """Replay a trace: re-score its recorded ranges and check every recorded
    score and choice reproduces. Raises ValidationError on any mismatch."""
    calls = 0
    for depth, level in enumerate(trace.levels):
        scores = _score_ranges(
            doc, claim, backend, level.candidate_ranges, cache, 1, trace.levels
        )
        calls += len(scores)
        if scores != level.scores:
            raise ValidationError(
                f"trace replay mismatch at level {depth}: {scores} != {level.scores}"
            )
        if _pick_best(scores) != level.chosen:
            raise ValidationError(f"trace replay picked a different branch at level {depth}")
    if calls != trace.scorer_calls:
        raise ValidationError(
            f"trace records {trace.scorer_calls} scorer calls, replay used {calls}"
        )
    last = trace.levels[-1]
    a, b = last.candidate_ranges[last.chosen]
    if (b - a) != 1 or a != trace.result_unit:
        raise ValidationError("trace does not terminate at its result unit")
