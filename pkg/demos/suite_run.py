#!/usr/bin/env python3
"""Run the benchmark CLI over a throwaway suite directory.

Writes three small .smt2 files (one of them unsatisfiable), runs the
suite at two coverage targets, and prints the per-run records and the
aggregate table the CLI leaves behind. Everything happens in a temp
directory; nothing in the repo is touched.

    python3 demos/suite_run.py
"""

import tempfile
from pathlib import Path

from pansampler.cli import main

BENCHES = {
    "range.smt2": (
        "(set-logic QF_BV)\n"
        "(declare-const x (_ BitVec 4))\n"
        "(assert (bvult x #xC))\n"
    ),
    "pair.smt2": (
        "(declare-const a (_ BitVec 3))\n"
        "(declare-const b (_ BitVec 3))\n"
        "(assert (distinct a b))\n"
    ),
    "empty.smt2": (
        "(declare-const p Bool)\n"
        "(assert (and p (not p)))\n"
    ),
}


def run() -> None:
    with tempfile.TemporaryDirectory() as td:
        root = Path(td)
        for name, text in BENCHES.items():
            (root / name).write_text(text)
        code = main([str(root), "--targets", "0.8,0.95", "--lambda", "8",
                     "--seed", "1", "--deterministic-timing"])
        print(f"\nexit code: {code}")
        print("\n--- suite_records.csv ---")
        print((root / "suite_records.csv").read_text(), end="")
        print("--- suite_aggregate.csv ---")
        print((root / "suite_aggregate.csv").read_text(), end="")
        samples = sorted(p.name for p in root.glob("*.samples.smt2"))
        print(f"sample artifacts: {samples}")


if __name__ == "__main__":
    run()
