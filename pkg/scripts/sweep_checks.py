"""Run the randomized theorem checks across network sizes and print one summary row per size.

    python scripts/sweep_checks.py --trials 50 --seed 42
"""

import argparse
import time

from gibmap.oracle import CHECKS, RandomNetSpec, check_theorems


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--sizes", type=int, nargs="+", default=[3, 4, 5, 6])
    args = ap.parse_args()

    print(f"{'nodes':>5} " + " ".join(f"{k:>10}" for k in CHECKS) + f" {'delta':>9} {'secs':>6}")
    for n in args.sizes:
        t0 = time.perf_counter()
        r = check_theorems(RandomNetSpec(node_count=n, max_parents=min(2, n - 1), seed=args.seed), args.trials)
        cells = " ".join(f"{r.passed[k]:>6}/{r.failed[k]:<3}" for k in CHECKS)
        print(f"{n:>5} {cells} {r.delta_agree:>4}/{r.delta_disagree:<4} {time.perf_counter() - t0:6.1f}")
        for k, detail in sorted(r.counterexample.items()):
            print(f"      ({k}) {detail}")


if __name__ == "__main__":
    main()
