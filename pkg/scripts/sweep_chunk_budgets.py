#!/usr/bin/env python3
"""Chunk-budget sweep on the fixture corpus: calibration error, ROC-AUC,
wall clock, and scorer-call totals per budget, as CSV + JSON.

Shows the typical trade-off: smaller budgets mean more chunks, hence more
scorer calls; the max-aggregated scores (and the metrics on them) shift as
evidence gets split across chunk boundaries.

Usage: python scripts/sweep_chunk_budgets.py [--out-dir out] [--budgets ...]
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from chunkcheck.cli import main as cli_main  # noqa: E402

FIXTURE = REPO / "data" / "fixture"
DEFAULT_BUDGETS = [8, 16, 32, 64, 128, 256, 512]


def run(out_dir: Path, budgets: list[int]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    base = [
        "--documents", str(FIXTURE / "documents.jsonl"),
        "--claims", str(FIXTURE / "claims.jsonl"),
        "--budgets", ",".join(str(b) for b in budgets),
    ]
    for cmd, outputs in (
        ("bench", ["--csv", str(out_dir / "bench.csv"), "--out", str(out_dir / "bench.json")]),
        (
            "calibrate",
            [
                "--csv", str(out_dir / "calibrate.csv"),
                "--curve-csv", str(out_dir / "calibration_curve.csv"),
                "--out", str(out_dir / "calibrate.json"),
            ],
        ),
    ):
        code = cli_main([cmd, *base, *outputs])
        if code != 0:
            raise SystemExit(f"{cmd} failed with exit code {code}")
    print((out_dir / "bench.csv").read_text())
    print((out_dir / "calibrate.csv").read_text())


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out", type=Path)
    parser.add_argument("--budgets", type=int, nargs="+", default=DEFAULT_BUDGETS)
    args = parser.parse_args()
    run(args.out_dir, args.budgets)
