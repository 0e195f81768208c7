"""Pairings of every invariant character of gl_n(F_q) with its witness.

    python3 scripts/letellier_report.py [--cases 2,2 2,3 3,2]
"""

import argparse

from higherdl.liealg import multiplicative_scan, verify_letellier


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cases", nargs="+", default=["2,2", "2,3", "3,2"])
    ap.add_argument("--scan", action="store_true", help="also try every multiplicative part")
    args = ap.parse_args()
    for case in args.cases:
        n, p = map(int, case.split(","))
        rep = verify_letellier(n, p)
        print(f"\nM_{n}(F_{p}): {len(rep.rows)} invariant characters, "
              f"{rep.class_count_bruteforce} classes by brute force, passed={rep.passed}")
        print(f"  {'beta type':<24} {'|O|':>4} {'torus':>7} {'witness':>10}  pairing")
        for row in rep.rows:
            rat = row.pairing.rational()
            val = str(rat) if rat is not None else "irrational"
            cyc = "+".join(map(str, row.torus_cycles))
            print(f"  {row.beta_type:<24} {row.orbit_size:>4} {cyc:>7} {row.witness:>10}  {val}")
        if args.scan:
            for name, hits, tried in multiplicative_scan(n, p):
                print(f"  scan {name:<24} nonzero for {hits}/{tried} multiplicative parts")


if __name__ == "__main__":
    main()
