"""Compare the two flow solvers against the exhaustive oracle on random small instances."""

import argparse
import time

from covbal.balance2 import solve_maxflow_counts, solve_mcnf_counts
from covbal.core import index_levels, intersection_counts
from covbal.oracle import exact_min_imbalance, random_instance
from covbal.rng import SplitMix64


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--max-control", type=int, default=12)
    ap.add_argument("--max-k", type=int, default=4)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = SplitMix64(args.seed)
    timers = {"mcnf": 0.0, "maxflow": 0.0, "oracle": 0.0}
    disagree = 0
    for j in range(args.trials):
        n = 1 + rng.below(args.max_n)
        n_control = n + rng.below(args.max_control - n + 1)
        k = (1 + rng.below(args.max_k), 1 + rng.below(args.max_k))
        ds = random_instance(2, n, n_control, k, args.seed * 100_003 + j)
        idx = index_levels(ds)
        cells = intersection_counts(ds, idx)
        got = {}
        for name, solve in (("mcnf", lambda: solve_mcnf_counts(idx, cells, n)),
                            ("maxflow", lambda: solve_maxflow_counts(idx, cells, n)),
                            ("oracle", lambda: exact_min_imbalance(ds, n))):
            t0 = time.perf_counter()
            got[name] = solve().objective
            timers[name] += time.perf_counter() - t0
        if len(set(got.values())) != 1:
            disagree += 1
            print(f"trial {j}: {got}")
    for name, t in timers.items():
        print(f"{name:8s} {t * 1000 / args.trials:8.3f} ms/instance")
    print(f"{args.trials} trials, {disagree} disagreements")
    return 1 if disagree else 0


if __name__ == "__main__":
    raise SystemExit(main())
