"""Data model and ingestion for source documents, claims, and annotations.

A document is an ordered list of atomic units: one sentence for prose, one
speaker turn for dialogue (granularity is a per-document property, inferred
at ingestion from the presence of speakers). A claim is a single generated
sentence to be verified against one document; it may carry a gold
consistency label and the set of source-unit indices annotated as relevant
evidence.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusError, ValidationError

# ---------------------------------------------------------------------------
# Token counting


class TokenCounter:
    """Counts tokens for chunk budgets.

    Implementations must be deterministic, count("") == 0, and at most one
    extra token may appear when two texts are joined with a separator.
    """

    name: str = "abstract"

    def count(self, text: str) -> int:
        raise NotImplementedError


class WhitespaceCounter(TokenCounter):
    """Zero-dependency approximation: one token per whitespace-separated word."""

    name = "whitespace"

    def count(self, text: str) -> int:
        return len(text.split())


class VocabCounter(TokenCounter):
    """Greedy longest-match subword counter over a plain-text vocabulary file.

    One piece per line; continuation pieces start with ``##``. A word that
    cannot be fully tokenized counts as a single unknown token. Matching is
    case-insensitive unless ``lowercase=False``.
    """

    def __init__(self, vocab_path: str | Path, lowercase: bool = True):
        path = Path(vocab_path)
        pieces = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
        if not pieces:
            raise ValidationError(f"empty vocabulary file: {path}")
        self._starts = frozenset(p for p in pieces if not p.startswith("##"))
        self._continuations = frozenset(p[2:] for p in pieces if p.startswith("##"))
        self._max_piece = max(len(p) for p in self._starts | self._continuations)
        self.lowercase = lowercase
        self.name = f"vocab:{path.name}"

    def _word_tokens(self, word: str) -> int:
        n = 0
        i = 0
        table = self._starts
        while i < len(word):
            for j in range(min(len(word), i + self._max_piece), i, -1):
                if word[i:j] in table:
                    n += 1
                    i = j
                    table = self._continuations
                    break
            else:
                return 1  # untokenizable word counts as one unknown token
        return n

    def count(self, text: str) -> int:
        if self.lowercase:
            text = text.lower()
        return sum(self._word_tokens(w) for w in text.split())


def make_counter(kind: str) -> TokenCounter:
    """Build a counter from a config string: ``whitespace`` or ``vocab:<path>``."""
    if kind == "whitespace":
        return WhitespaceCounter()
    if kind.startswith("vocab:"):
        return VocabCounter(kind.split(":", 1)[1])
    raise ValidationError(f"unknown token counter {kind!r}; use 'whitespace' or 'vocab:<path>'")


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class Unit:
    """One atomic unit of a document: a sentence or a speaker turn."""

    index: int
    text: str
    speaker: str | None = None
    extra: dict = field(default_factory=dict, compare=True)

    def validate(self) -> None:
        if not self.text.strip():
            raise ValidationError(f"unit {self.index} has empty text")
        if self.index < 0:
            raise ValidationError(f"unit index must be >= 0, got {self.index}")


def format_unit(unit: Unit) -> str:
    """Render a unit as one premise line; speakers stay attached to their turns."""
    if unit.speaker:
        return f"{unit.speaker}: {unit.text}"
    return unit.text


@dataclass
class Document:
    id: str
    units: list[Unit]
    extra: dict = field(default_factory=dict)
    _token_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def validate(self) -> None:
        if not self.id:
            raise ValidationError("document id must be non-empty")
        if not self.units:
            raise ValidationError(f"document {self.id!r} has no units")
        for pos, unit in enumerate(self.units):
            unit.validate()
            if unit.index != pos:
                raise ValidationError(
                    f"document {self.id!r}: unit index {unit.index} at position {pos}"
                )

    @property
    def granularity(self) -> str:
        return "utterance" if any(u.speaker for u in self.units) else "sentence"

    def unit_token_counts(self, counter: TokenCounter) -> list[int]:
        """Per-unit token counts of the formatted premise lines, cached per counter."""
        cached = self._token_cache.get(counter.name)
        if cached is None:
            cached = [counter.count(format_unit(u)) for u in self.units]
            self._token_cache[counter.name] = cached
        return cached

    def total_tokens(self, counter: TokenCounter) -> int:
        return sum(self.unit_token_counts(counter))


@dataclass
class Claim:
    """One generated sentence to verify against its source document."""

    id: str
    doc_id: str
    text: str
    gold_label: bool | None = None
    relevant_units: frozenset[int] | None = None
    extra: dict = field(default_factory=dict)

    def validate(self, document: Document | None = None) -> None:
        if not self.id:
            raise ValidationError("claim id must be non-empty")
        if not self.text.strip():
            raise ValidationError(f"claim {self.id!r} has empty text")
        if document is not None and self.relevant_units:
            n = len(document.units)
            bad = sorted(i for i in self.relevant_units if i < 0 or i >= n)
            if bad:
                raise ValidationError(
                    f"claim {self.id!r}: relevant unit indices {bad} out of range "
                    f"for document {document.id!r} with {n} units"
                )


@dataclass
class GeneratedText:
    """An ordered group of claims produced for one document."""

    doc_id: str
    sentences: list[Claim]

    def validate(self) -> None:
        if not self.sentences:
            raise ValidationError(f"generated text for {self.doc_id!r} has no sentences")
        for c in self.sentences:
            if c.doc_id != self.doc_id:
                raise ValidationError(
                    f"claim {c.id!r} targets {c.doc_id!r}, not {self.doc_id!r}"
                )


@dataclass(frozen=True)
class CorpusStats:
    n_documents: int
    n_claims: int
    n_units: int
    mean_units_per_doc: float
    mean_tokens_per_doc: float
    counter: str


@dataclass
class Corpus:
    documents: list[Document]
    claims: list[Claim]

    def validate(self) -> None:
        seen = set()
        for doc in self.documents:
            doc.validate()
            if doc.id in seen:
                raise ValidationError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
        by_id = {d.id: d for d in self.documents}
        for claim in self.claims:
            if claim.doc_id not in by_id:
                raise CorpusError(
                    f"claim {claim.id!r} references unknown document {claim.doc_id!r}"
                )
            claim.validate(by_id[claim.doc_id])

    def document(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise ValidationError(f"no document with id {doc_id!r}")

    def claims_for(self, doc_id: str) -> list[Claim]:
        return [c for c in self.claims if c.doc_id == doc_id]

    def grouped_texts(self) -> list[GeneratedText]:
        """Claims grouped per document, in file order."""
        groups: dict[str, list[Claim]] = {}
        for claim in self.claims:
            groups.setdefault(claim.doc_id, []).append(claim)
        return [GeneratedText(doc_id, claims) for doc_id, claims in groups.items()]

    def stats(self, counter: TokenCounter) -> CorpusStats:
        n_docs = len(self.documents)
        n_units = sum(len(d.units) for d in self.documents)
        total_tokens = sum(d.total_tokens(counter) for d in self.documents)
        return CorpusStats(
            n_documents=n_docs,
            n_claims=len(self.claims),
            n_units=n_units,
            mean_units_per_doc=n_units / n_docs if n_docs else 0.0,
            mean_tokens_per_doc=total_tokens / n_docs if n_docs else 0.0,
            counter=counter.name,
        )

    def content_hash(self) -> str:
        """sha256 over the canonical serialized corpus; stable across runs."""
        payload = {
            "documents": [document_to_record(d) for d in self.documents],
            "claims": [claim_to_record(c) for c in self.claims],
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# JSONL serialization (unknown fields are preserved on round-trip)

_UNIT_KEYS = {"speaker", "text"}
_DOC_KEYS = {"id", "units"}
_CLAIM_KEYS = {"id", "doc_id", "text", "label", "relevant_units"}


def _unit_from_record(rec: dict, pos: int) -> Unit:
    extra = {k: v for k, v in rec.items() if k not in _UNIT_KEYS}
    return Unit(index=pos, text=rec["text"], speaker=rec.get("speaker"), extra=extra)


def document_from_record(rec: dict) -> Document:
    units = [_unit_from_record(u, i) for i, u in enumerate(rec["units"])]
    extra = {k: v for k, v in rec.items() if k not in _DOC_KEYS}
    return Document(id=rec["id"], units=units, extra=extra)


def document_to_record(doc: Document) -> dict:
    units = []
    for u in doc.units:
        rec = {"speaker": u.speaker, "text": u.text}
        rec.update(u.extra)
        units.append(rec)
    out = {"id": doc.id, "units": units}
    out.update(doc.extra)
    return out


def claim_from_record(rec: dict) -> Claim:
    relevant = rec.get("relevant_units")
    extra = {k: v for k, v in rec.items() if k not in _CLAIM_KEYS}
    return Claim(
        id=rec["id"],
        doc_id=rec["doc_id"],
        text=rec["text"],
        gold_label=rec.get("label"),
        relevant_units=None if relevant is None else frozenset(relevant),
        extra=extra,
    )


def claim_to_record(claim: Claim) -> dict:
    out = {
        "id": claim.id,
        "doc_id": claim.doc_id,
        "text": claim.text,
        "label": claim.gold_label,
        "relevant_units": None
        if claim.relevant_units is None
        else sorted(claim.relevant_units),
    }
    out.update(claim.extra)
    return out


def _read_jsonl(path: str | Path, build, required: set[str]):
    out = []
    path = Path(path)
    if not path.exists():
        raise CorpusError("file not found", path=str(path))
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON ({exc.msg})", path=str(path), line=lineno) from exc
            if not isinstance(rec, dict):
                raise CorpusError("record is not an object", path=str(path), line=lineno)
            missing = required - rec.keys()
            if missing:
                raise CorpusError(
                    f"missing required fields {sorted(missing)}", path=str(path), line=lineno
                )
            try:
                out.append(build(rec))
            except (TypeError, ValueError, ValidationError) as exc:
                raise CorpusError(str(exc), path=str(path), line=lineno) from exc
    return out


def read_documents_jsonl(path: str | Path) -> list[Document]:
    return _read_jsonl(path, document_from_record, {"id", "units"})


def read_claims_jsonl(path: str | Path) -> list[Claim]:
    return _read_jsonl(path, claim_from_record, {"id", "doc_id", "text"})


def write_documents_jsonl(documents: list[Document], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in documents:
            fh.write(json.dumps(document_to_record(doc), ensure_ascii=False) + "\n")


def write_claims_jsonl(claims: list[Claim], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for claim in claims:
            fh.write(json.dumps(claim_to_record(claim), ensure_ascii=False) + "\n")


def load_corpus(documents_path: str | Path, claims_path: str | Path) -> Corpus:
    """Load and cross-validate a documents file plus a claims file.

    Raises CorpusError with the offending line number for malformed records,
    dangling doc_id references, or out-of-range relevant-unit indices.
    """
    corpus = Corpus(
        documents=read_documents_jsonl(documents_path),
        claims=read_claims_jsonl(claims_path),
    )
    corpus.validate()
    return corpus


# ---------------------------------------------------------------------------
# Sentence segmentation

# Words that end with a period without ending a sentence. Compared lowercase,
# with the final period stripped.
_ABBREVIATIONS = {
    "dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "vs", "etc",
    "e.g", "i.e", "cf", "al", "inc", "ltd", "co", "corp", "dept",
    "approx", "fig", "figs", "eq", "eqs", "sec", "ch", "vol", "pp",
    "capt", "gen", "sen", "rep", "rev", "hon", "gov", "pres",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
    "a.m", "p.m", "u.s", "u.k", "u.n",
}

_BOUNDARY = re.compile(r"[.?!]+[\"')\]]*\s+")


def _is_abbreviation(word: str) -> bool:
    return word.rstrip(".?!\"')]").lower() in _ABBREVIATIONS


def split_sentences(text: str) -> list[str]:
    """Split text on terminal punctuation, keeping known abbreviations intact.

    Joining the result with single spaces and collapsing whitespace always
    reproduces the whitespace-collapsed input.
    """
    sentences = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        if "." in m.group(0):
            prev = text[start : m.end()].split()
            if prev and _is_abbreviation(prev[-1]):
                continue
        nxt = text[m.end() : m.end() + 1]
        if nxt and nxt.islower():
            continue  # lowercase continuation: treat as mid-sentence punctuation
        piece = text[start : m.end()].strip()
        if piece:
            sentences.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def text_to_claims(doc_id: str, text: str, id_prefix: str = "s") -> GeneratedText:
    """Segment a raw generated text into one claim per sentence."""
    sentences = split_sentences(text)
    claims = [
        Claim(id=f"{id_prefix}{i}", doc_id=doc_id, text=s) for i, s in enumerate(sentences)
    ]
    gt = GeneratedText(doc_id=doc_id, sentences=claims)
    gt.validate()
    return gt
