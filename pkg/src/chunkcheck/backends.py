"""Scorer backend implementations.

- LexicalOverlapBackend: dependency-free word-overlap oracle, handy for
  deterministic offline runs and as an independent reference in tests.
- UnitRelevanceBackend: diagnostic backend scoring a premise as the max of
  per-unit base relevance scores it contains. By construction a range's
  score equals the max over its units, which makes greedy descent provably
  agree with exhaustive search; retrieval verification relies on it.
- RemoteBackend: HTTP POST to an inference endpoint that returns yes/no
  logits or a ready probability, with retry and exponential backoff.
"""

from __future__ import annotations

import json
import re
import time
from pathlib import Path

import requests

from .corpus import Corpus, Document, format_unit
from .errors import BackendError, ValidationError
from .scoring import BackendOutput, ScorerBackend, build_prompt

_WORD = re.compile(r"[a-z0-9']+")


def _words(text: str) -> frozenset[str]:
    return frozenset(_WORD.findall(text.lower()))


class LexicalOverlapBackend(ScorerBackend):
    """probability = |hypothesis words ∩ premise words| / |hypothesis words|."""

    name = "overlap"

    def evaluate(self, premise: str, hypothesis: str) -> BackendOutput:
        hyp = _words(hypothesis)
        if not hyp:
            return BackendOutput(probability=0.0)
        prem = _words(premise)
        return BackendOutput(probability=len(hyp & prem) / len(hyp))


class UnitRelevanceBackend(ScorerBackend):
    """Max-composable mock: each source unit carries a base relevance score in
    [0, 1]; a premise scores the max over the units it is built from.

    Premises must be newline-joined formatted unit lines (the chunker's
    format); unknown lines raise, which catches formatting drift early.
    """

    name = "unit-relevance"

    def __init__(self, scores_by_doc: dict[str, list[float]], documents: list[Document]):
        self._line_scores: dict[str, float] = {}
        docs = {d.id: d for d in documents}
        for doc_id, scores in scores_by_doc.items():
            doc = docs.get(doc_id)
            if doc is None:
                raise ValidationError(f"relevance scores for unknown document {doc_id!r}")
            if len(scores) != len(doc.units):
                raise ValidationError(
                    f"document {doc_id!r}: {len(scores)} scores for {len(doc.units)} units"
                )
            for unit, s in zip(doc.units, scores):
                if not (0.0 <= s <= 1.0):
                    raise ValidationError(f"relevance score {s} outside [0, 1]")
                line = format_unit(unit)
                if "\n" in line:
                    raise ValidationError(
                        f"document {doc_id!r} unit {unit.index}: text contains a newline"
                    )
                prev = self._line_scores.get(line)
                self._line_scores[line] = s if prev is None else max(prev, s)

    @classmethod
    def from_file(cls, path: str | Path, corpus: Corpus) -> "UnitRelevanceBackend":
        """Load a JSON mapping {doc_id: [unit scores]}."""
        with Path(path).open(encoding="utf-8") as fh:
            scores_by_doc = json.load(fh)
        return cls(scores_by_doc, corpus.documents)

    def evaluate(self, premise: str, hypothesis: str) -> BackendOutput:
        best = 0.0
        for line in premise.split("\n"):
            score = self._line_scores.get(line)
            if score is None:
                raise BackendError(f"premise line not in relevance table: {line!r}")
            if score > best:
                best = score
        return BackendOutput(probability=best)


class RemoteBackend(ScorerBackend):
    """Scores pairs against an HTTP endpoint.

    Request:  POST {"prompt": str, "target_tokens": ["Yes", "No"]}
    Response: {"logits": [yes, no]} or {"probability": p}

    Transient failures (connection errors, timeouts, 5xx) are retried with
    exponential backoff; client errors and malformed responses are fatal.
    """

    def __init__(
        self,
        endpoint: str,
        auth_header: str | None = None,
        timeout: float = 10.0,
        max_retries: int = 3,
        backoff_base: float = 0.25,
        max_premise_tokens: int | None = None,
        session: requests.Session | None = None,
    ):
        if not endpoint:
            raise ValidationError("remote backend requires an endpoint URL")
        self.endpoint = endpoint
        self.name = f"remote:{endpoint}"
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.max_premise_tokens = max_premise_tokens
        self._session = session or requests.Session()
        self._headers = {"Content-Type": "application/json"}
        if auth_header:
            if ":" not in auth_header:
                raise ValidationError("auth header must look like 'Name: value'")
            name, value = auth_header.split(":", 1)
            self._headers[name.strip()] = value.strip()

    def evaluate(self, premise: str, hypothesis: str) -> BackendOutput:
        payload = {
            "prompt": build_prompt(premise, hypothesis),
            "target_tokens": ["Yes", "No"],
        }
        attempts = 0
        last_error = "no attempt made"
        while attempts <= self.max_retries:
            if attempts:
                time.sleep(self.backoff_base * 2 ** (attempts - 1))
            attempts += 1
            try:
                resp = self._session.post(
                    self.endpoint, json=payload, headers=self._headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
                continue
            if resp.status_code >= 500:
                last_error = f"server error HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise BackendError(
                    f"endpoint {self.endpoint} answered HTTP {resp.status_code}",
                    attempts=attempts,
                    endpoint=self.endpoint,
                )
            return self._parse(resp, attempts)
        raise BackendError(
            f"endpoint {self.endpoint} unreachable after {attempts} attempts: {last_error}",
            attempts=attempts,
            endpoint=self.endpoint,
        )

    def _parse(self, resp, attempts: int) -> BackendOutput:
        try:
            body = resp.json()
        except ValueError as exc:
            raise BackendError(
                f"endpoint {self.endpoint} returned invalid JSON: {exc}",
                attempts=attempts,
                endpoint=self.endpoint,
            ) from exc
        if isinstance(body, dict) and "logits" in body:
            logits = body["logits"]
            if not (isinstance(logits, list) and len(logits) == 2):
                raise BackendError(
                    f"expected two logits, got {logits!r}", attempts=attempts,
                    endpoint=self.endpoint,
                )
            return BackendOutput(logits=(float(logits[0]), float(logits[1])))
        if isinstance(body, dict) and "probability" in body:
            return BackendOutput(probability=float(body["probability"]))
        raise BackendError(
            f"response missing 'logits' or 'probability': {body!r}",
            attempts=attempts,
            endpoint=self.endpoint,
        )
