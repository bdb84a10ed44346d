#!/usr/bin/env python3
"""Score and evaluate the bundled fixture corpus with the offline overlap
backend, writing the full report set under an output directory.

Usage: python scripts/run_fixture_eval.py [--out-dir out]
"""

import argparse
import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from chunkcheck.cli import main as cli_main  # noqa: E402

FIXTURE = REPO / "data" / "fixture"


def run(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    base = [
        "--documents", str(FIXTURE / "documents.jsonl"),
        "--claims", str(FIXTURE / "claims.jsonl"),
    ]
    jobs = [
        (["score", *base, "--explain", "--out", str(out_dir / "score.json")], "score.json"),
        (
            ["evaluate", *base, "--retrieval-recall", "--out", str(out_dir / "evaluate.json")],
            "evaluate.json",
        ),
        (
            [
                "retrieve", *base,
                "--backend", "unit-relevance",
                "--relevance-file", str(FIXTURE / "relevance.json"),
                "--trace", "--brute-force",
                "--out", str(out_dir / "retrieve.json"),
            ],
            "retrieve.json",
        ),
    ]
    for argv, name in jobs:
        code = cli_main(argv)
        if code != 0:
            raise SystemExit(f"{argv[0]} failed with exit code {code}")
        print(f"wrote {out_dir / name}")

    results = json.loads((out_dir / "evaluate.json").read_text())["results"]
    print(
        f"n={results['n']}  roc_auc={results['roc_auc']:.4f}  "
        f"pearson={results['pearson']:.4f}  kendall_tau={results['kendall_tau']:.4f}  "
        f"f1_macro={results['f1_macro']:.4f} @ threshold {results['optimal_threshold']:.4f}"
    )
    if "retrieval" in results:
        r = results["retrieval"]
        print(f"retrieval recall={r['recall']:.3f} over {r['n']} annotated claims")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out", type=Path)
    run(parser.parse_args().out_dir)
