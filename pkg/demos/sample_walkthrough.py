#!/usr/bin/env python3
"""Walk one formula through the sampler in every mode.

Parses a small mixed Bool/BitVec formula, samples it with the full
method and the three ablations, and prints the coverage trace plus the
final solution set for each. Run from the repo root:

    python3 demos/sample_walkthrough.py
"""

from pansampler.parser import parse_formula
from pansampler.printer import print_models
from pansampler.sampler import Mode, SamplerConfig, sample

TEXT = """
(set-logic QF_BV)
(declare-const x (_ BitVec 16))
(declare-const y (_ BitVec 16))
(declare-const b Bool)
(assert (bvule x y))
(assert (or b (bvult x #x8000)))
"""


def main() -> None:
    f = parse_formula(TEXT)
    print("formula:", len(f.assertions), "assertions,",
          len(f.decls), "declarations")
    for mode in Mode:
        cfg = SamplerConfig(target_coverage=0.97, lam=3, max_solutions=50,
                            seed=7, mode=mode)
        res = sample(f, cfg)
        cov = res.coverage["coverage_star"]
        print(f"\n--- mode {mode.value} ---")
        print(f"solutions: {len(res.solutions)}  coverage*: {cov:.4f}  "
              f"reason: {res.reason}  iterations: {res.iterations}")
        trace = ", ".join(f"{c:.3f}" for c in res.coverage_star_trace)
        print(f"trace: [{trace}]")
    print("\nfull-method models:")
    cfg = SamplerConfig(target_coverage=0.97, lam=3, max_solutions=50, seed=7)
    print(print_models(f, sample(f, cfg).solutions), end="")


if __name__ == "__main__":
    main()
