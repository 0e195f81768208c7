"""Regular / general-position / stabilizer counts for every torus of GL_n, n <= 3.

Coxeter tori are where the equivalence is asserted; the other cycle types are
printed for comparison.

    python3 scripts/prop35_table.py [--q 2 3 4] [--json out.json]
"""

import argparse
import json

import sympy

from higherdl.experiments import RunConfig, run
from higherdl.liealg import _partitions


def prime_power(q):
    (p, m), = sympy.factorint(q).items()
    return p, m


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--q", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    rows = []
    print(f"{'n':>2} {'q':>2} {'torus':>6} {'chars':>6} {'reg':>5} {'gp':>5} {'stab':>5} "
          f"{'stab=reg':>8} {'reg<=gp':>7}")
    for n in args.n:
        for q in args.q:
            p, m = prime_power(q)
            for ctype in _partitions(n):
                torus = ",".join(map(str, ctype))
                try:
                    s = run(RunConfig("prop35", p=p, m=m, n=n, r=2, torus=torus)).summary
                except Exception as exc:          # resource caps on the larger tori
                    print(f"{n:>2} {q:>2} {torus:>6}  skipped: {exc}")
                    continue
                rows.append({"n": n, "q": q, "torus": torus, **{k: s[k] for k in (
                    "characters", "regular", "general_position", "stabilizer",
                    "stabilizer_equals_regular", "regular_in_general_position", "coxeter")}})
                print(f"{n:>2} {q:>2} {torus:>6} {s['characters']:>6} {s['regular']:>5} "
                      f"{s['general_position']:>5} {s['stabilizer']:>5} "
                      f"{str(s['stabilizer_equals_regular']):>8} {str(s['regular_in_general_position']):>7}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
