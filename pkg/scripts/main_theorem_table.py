"""Norm and degree of Ind theta~ for the generic characters of each configuration.

    python3 scripts/main_theorem_table.py [--mode both] [--cache-dir .cache]
"""

import argparse
import time
from collections import Counter

from higherdl.experiments import RunConfig, run

CONFIGS = [(2, 2, 1, 2, ""), (2, 3, 1, 2, ""), (2, 2, 2, 2, ""), (2, 5, 1, 2, ""),
           (3, 2, 1, 2, ""), (2, 2, 1, 4, ""), (3, 2, 1, 2, "2,1"), (2, 2, 1, 2, "1,1")]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mode", default="exact", choices=("exact", "numeric", "both"))
    ap.add_argument("--cache-dir", default=None)
    args = ap.parse_args()
    for n, p, m, r, torus in CONFIGS:
        t0 = time.perf_counter()
        out = run(RunConfig("verify-main", p=p, m=m, n=n, r=r, torus=torus, mode=args.mode,
                            cache_dir=args.cache_dir))
        rows = [it for it in out.items if it["kind"] == "induced"]
        norms = Counter(f"{a}/{b}" if b != 1 else str(a) for a, b in (it["norm"] for it in rows))
        label = f"n={n} q={p**m} r={r} torus={torus or n}"
        print(f"{label:<28} {out.status:<10} generic={out.summary['generic_count']:<4} "
              f"target={out.summary['target_degree'][0]:<4} norms={dict(norms)} "
              f"({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
