"""Command-line surface: score, retrieve, evaluate, calibrate, bench.

Reports are JSON with sorted keys. Everything nondeterministic (timestamps,
wall-clock timings) lives under the top-level "meta" key so that the rest of
the report is byte-identical across runs; golden comparisons drop "meta".

Exit codes: 0 success, 1 validation error, 2 backend/transport error,
3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .chunking import make_chunks
from .config import RunConfig, build_backend, build_cache, build_counter, resolve_config
from .corpus import Corpus, load_corpus
from .engine import score_text
from .errors import BackendError, ChunkcheckError, ScoringError, ValidationError
from .metrics import calibration_curve, ece, evaluate_scores, retrieval_recall, roc_auc
from .retrieval import brute_force_retrieve, retrieval_hit, retrieve


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--documents", required=True, help="documents JSONL path")
    p.add_argument("--claims", required=True, help="claims JSONL path")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--backend", choices=("overlap", "remote", "unit-relevance"))
    p.add_argument("--endpoint", help="remote backend URL (or $CHUNKCHECK_ENDPOINT)")
    p.add_argument("--auth-header", dest="auth_header", help="'Name: value' forwarded verbatim")
    p.add_argument("--relevance-file", dest="relevance_file", help="unit relevance JSON")
    p.add_argument("--counter", help="'whitespace' or 'vocab:<path>'")
    p.add_argument("--budget", type=int, help="chunk token budget (default 512)")
    p.add_argument("--k", type=int, help="retrieval branching factor (default 2)")
    p.add_argument("--aggregation", choices=("min", "mean"))
    p.add_argument("--ece-bins", dest="ece_bins", type=int)
    p.add_argument("--decision-threshold", dest="decision_threshold", type=float)
    p.add_argument("--concurrency", type=int)
    p.add_argument("--cache-size", dest="cache_size", type=int)
    p.add_argument("--premise-cap", dest="premise_cap", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--retries", type=int)
    p.add_argument("--backoff", type=float)
    p.add_argument("--seed", type=int)


_CONFIG_KEYS = (
    "backend", "endpoint", "auth_header", "relevance_file", "counter", "budget", "k",
    "aggregation", "ece_bins", "decision_threshold", "concurrency", "cache_size",
    "premise_cap", "timeout", "retries", "backoff", "seed",
)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    return resolve_config(getattr(args, "config", None), overrides)


def _load(args: argparse.Namespace) -> Corpus:
    return load_corpus(args.documents, args.claims)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _report(command: str, config: RunConfig, corpus: Corpus, results: dict, meta: dict) -> dict:
    meta = dict(meta)
    meta["created_at"] = datetime.now(timezone.utc).isoformat()
    return {
        "version": __version__,
        "command": command,
        "config": config.to_dict(),
        "corpus_hash": corpus.content_hash(),
        "results": results,
        "meta": meta,
    }


def _score_corpus(corpus, config, counter, backend, cache, budget=None, explain=False):
    """Score every claim; returns (text_scores, claim order preserved)."""
    budget = budget if budget is not None else config.budget
    text_scores = []
    for text in corpus.grouped_texts():
        doc = corpus.document(text.doc_id)
        plan = make_chunks(doc, budget, counter)
        text_scores.append(
            score_text(
                doc,
                text,
                budget,
                backend,
                counter,
                aggregation=config.aggregation,
                cache=cache,
                max_workers=config.concurrency,
                explain=explain,
                plan=plan,
            )
        )
    return text_scores


def _flatten_sentences(corpus: Corpus, text_scores) -> list:
    by_claim = {}
    for ts in text_scores:
        for s in ts.sentence_scores:
            by_claim[s.claim_id] = s
    return [by_claim[c.id] for c in corpus.claims]


def cmd_score(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    corpus = _load(args)
    counter = build_counter(config)
    backend = build_backend(config, corpus)
    cache = build_cache(config)
    t0 = time.perf_counter()
    text_scores = _score_corpus(corpus, config, counter, backend, cache, explain=args.explain)
    wall = time.perf_counter() - t0
    sentences = _flatten_sentences(corpus, text_scores)
    results = {
        "claims": [s.to_dict() for s in sentences],
        "texts": [ts.to_dict() for ts in text_scores],
        "scorer_calls_total": sum(s.scorer_calls for s in sentences),
    }
    if args.dump_chunks:
        results["chunk_plans"] = [
            make_chunks(doc, config.budget, counter).to_dict() for doc in corpus.documents
        ]
    meta = {
        "wall_clock_s": wall,
        "claim_ms": {s.claim_id: s.elapsed_ms for s in sentences},
    }
    _emit(_report("score", config, corpus, results, meta), args.out)
    return 0


def cmd_retrieve(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    corpus = _load(args)
    counter = build_counter(config)
    backend = build_backend(config, corpus)
    cache = build_cache(config)
    t0 = time.perf_counter()
    entries = []
    for claim in corpus.claims:
        doc = corpus.document(claim.doc_id)
        trace = retrieve(
            doc,
            claim,
            backend,
            k=config.k,
            budget=config.premise_cap,
            counter=counter,
            cache=cache,
            max_workers=config.concurrency,
        )
        entry = {
            "claim_id": claim.id,
            "result_unit": trace.result_unit,
            "result_score": trace.result_score,
            "scorer_calls": trace.scorer_calls,
        }
        if args.trace:
            entry["trace"] = trace.to_dict()["levels"]
        if args.brute_force:
            bf = brute_force_retrieve(doc, claim, backend, cache=None)
            entry["brute_force"] = {
                "unit": bf.unit,
                "score": bf.score,
                "scorer_calls": bf.scorer_calls,
                "agrees": bf.unit == trace.result_unit,
            }
        if claim.relevant_units:
            entry["hit"] = retrieval_hit(trace, claim.relevant_units)
        entries.append(entry)
    results = {"retrievals": entries}
    meta = {"wall_clock_s": time.perf_counter() - t0}
    _emit(_report("retrieve", config, corpus, results, meta), args.out)
    return 0


def _require_labels(corpus: Corpus) -> list[bool]:
    missing = [c.id for c in corpus.claims if c.gold_label is None]
    if missing:
        raise ValidationError(
            f"{len(missing)} claims have no gold label (first: {missing[0]!r}); "
            "evaluation needs 'label' set on every claim"
        )
    return [bool(c.gold_label) for c in corpus.claims]


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    corpus = _load(args)
    labels = _require_labels(corpus)
    counter = build_counter(config)
    backend = build_backend(config, corpus)
    cache = build_cache(config)
    t0 = time.perf_counter()
    text_scores = _score_corpus(corpus, config, counter, backend, cache)
    sentences = _flatten_sentences(corpus, text_scores)
    wall = time.perf_counter() - t0
    scores = [s.score for s in sentences]
    report = evaluate_scores(
        scores,
        labels,
        wall_clock_s=wall,
        scorer_calls_total=sum(s.scorer_calls for s in sentences),
    )
    results = {
        "n": report.n,
        "roc_auc": report.roc_auc,
        "pearson": report.pearson,
        "kendall_tau": report.kendall_tau,
        "f1_macro": report.f1_macro,
        "optimal_threshold": report.optimal_threshold,
        "scorer_calls_total": report.scorer_calls_total,
        "claims": [
            {"claim_id": c.id, "score": s.score, "label": bool(c.gold_label)}
            for c, s in zip(corpus.claims, sentences)
        ],
    }
    meta = {"wall_clock_s": wall}
    if args.retrieval_recall:
        annotated = [c for c in corpus.claims if c.relevant_units]
        if not annotated:
            raise ValidationError("no claims carry relevant_units annotations")
        r0 = time.perf_counter()
        hits = []
        calls = 0
        for claim in annotated:
            doc = corpus.document(claim.doc_id)
            trace = retrieve(
                doc, claim, backend, k=config.k, budget=config.premise_cap,
                counter=counter, cache=cache, max_workers=config.concurrency,
            )
            hits.append(retrieval_hit(trace, claim.relevant_units))
            calls += trace.scorer_calls
        results["retrieval"] = {
            "n": len(hits),
            "recall": retrieval_recall(hits),
            "scorer_calls": calls,
        }
        meta["retrieval_wall_clock_s"] = time.perf_counter() - r0
    _emit(_report("evaluate", config, corpus, results, meta), args.out)
    return 0


def _parse_budgets(raw: str) -> list[int]:
    try:
        budgets = [int(tok) for tok in raw.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError(f"bad --budgets value {raw!r}: {exc}") from exc
    if not budgets or any(b < 1 for b in budgets):
        raise ValidationError(f"budgets must be positive integers, got {raw!r}")
    return budgets


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    corpus = _load(args)
    labels = _require_labels(corpus)
    counter = build_counter(config)
    backend = build_backend(config, corpus)
    budgets = _parse_budgets(args.budgets)
    sweep = []
    rows = []
    for budget in budgets:
        cache = build_cache(config)  # fresh per budget: no cross-budget reuse
        text_scores = _score_corpus(corpus, config, counter, backend, cache, budget=budget)
        sentences = _flatten_sentences(corpus, text_scores)
        probs = [s.score for s in sentences]
        calls = sum(s.scorer_calls for s in sentences)
        cal = ece(probs, labels, bins=config.ece_bins,
                  decision_threshold=config.decision_threshold)
        sweep.append({"budget": budget, "ece": cal.ece, "scorer_calls": calls,
                      "calibration": cal.to_dict()})
        rows.append([budget, cal.ece, calls])
    if args.csv:
        _write_csv(args.csv, ["budget", "ece", "scorer_calls"], rows)
    if args.curve_csv:
        cache = build_cache(config)
        text_scores = _score_corpus(corpus, config, counter, backend, cache)
        probs = [s.score for s in _flatten_sentences(corpus, text_scores)]
        points = calibration_curve(probs, labels, bins=config.ece_bins)
        _write_csv(
            args.curve_csv,
            ["x", "y", "bin_size"],
            [[p.mean_prob, p.frac_positive, p.size] for p in points],
        )
    results = {"sweep": sweep, "budgets": budgets}
    _emit(_report("calibrate", config, corpus, results, {}), args.out)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    corpus = _load(args)
    labels = _require_labels(corpus)
    counter = build_counter(config)
    backend = build_backend(config, corpus)
    budgets = _parse_budgets(args.budgets)
    sweep = []
    rows = []
    timing = {}
    for budget in budgets:
        cache = build_cache(config)
        t0 = time.perf_counter()
        text_scores = _score_corpus(corpus, config, counter, backend, cache, budget=budget)
        wall = time.perf_counter() - t0
        sentences = _flatten_sentences(corpus, text_scores)
        auc = roc_auc([s.score for s in sentences], labels)
        calls = sum(s.scorer_calls for s in sentences)
        sweep.append({"budget": budget, "roc_auc": auc, "scorer_calls": calls})
        timing[str(budget)] = wall
        rows.append([budget, auc, wall, calls])
    if args.csv:
        _write_csv(args.csv, ["budget", "roc_auc", "wall_clock_s", "scorer_calls"], rows)
    results = {"sweep": sweep, "budgets": budgets}
    meta = {"wall_clock_s_by_budget": timing}
    _emit(_report("bench", config, corpus, results, meta), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chunkcheck",
        description="Factual-consistency scoring over chunked long documents",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score every claim against its source document")
    _common_flags(p)
    p.add_argument("--explain", action="store_true", help="retain per-chunk probabilities")
    p.add_argument("--dump-chunks", dest="dump_chunks", action="store_true",
                   help="embed chunk plans in the report")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("retrieve", help="find the best-supporting unit per claim")
    _common_flags(p)
    p.add_argument("--trace", action="store_true", help="include full descent traces")
    p.add_argument("--brute-force", dest="brute_force", action="store_true",
                   help="also run the exhaustive baseline and report agreement")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("evaluate", help="accuracy metrics against gold labels")
    _common_flags(p)
    p.add_argument("--retrieval-recall", dest="retrieval_recall", action="store_true",
                   help="also compute retrieval recall on annotated claims")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="ECE across a chunk-budget sweep")
    _common_flags(p)
    p.add_argument("--budgets", required=True, help="comma-separated budgets, e.g. 64,128,512")
    p.add_argument("--csv", help="write budget,ece,scorer_calls rows")
    p.add_argument("--curve-csv", dest="curve_csv",
                   help="write the calibration curve (x,y,bin_size) at the configured budget")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bench", help="ROC-AUC and wall clock across a chunk-budget sweep")
    _common_flags(p)
    p.add_argument("--budgets", required=True, help="comma-separated budgets, e.g. 64,128,512")
    p.add_argument("--csv", help="write budget,roc_auc,wall_clock_s,scorer_calls rows")
    p.set_defaults(func=cmd_bench)

    return parser


def _error_report(kind: str, message: str) -> None:
    sys.stderr.write(
        json.dumps({"error": {"type": kind, "message": message}}, sort_keys=True) + "\n"
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; that slot is reserved for
        # backend/transport failures here.
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (BackendError,) as exc:
        _error_report("backend", str(exc))
        return 2
    except (ScoringError,) as exc:
        _error_report("scoring", str(exc))
        return 2
    except (ValidationError,) as exc:
        _error_report("validation", str(exc))
        return 1
    except ChunkcheckError as exc:
        _error_report("internal", str(exc))
        return 3
    except Exception as exc:  # pragma: no cover - last resort
        _error_report("internal", f"{type(exc).__name__}: {exc}")
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
