"""Acceptance criteria, one test each.

Every criterion prints a single ``CRITERION k: PASS|FAIL`` line; the lines are
repeated in the pytest terminal summary.  Run directly with
``python tests/test_acceptance.py`` for the report alone.
"""

import sys
import time

import pytest

from higherdl.experiments import RunConfig, run

# (n, p, m, r) with the Coxeter torus
COXETER = [(2, 2, 1, 2), (2, 3, 1, 2), (2, 2, 2, 2), (2, 5, 1, 2), (3, 2, 1, 2), (2, 2, 1, 4)]
RESULTS: dict[int, str] = {}


def cfg(command, n, p, m, r, torus="", **kw):
    return RunConfig(command, p=p, m=m, n=n, r=r, torus=torus, **kw)


def tag(n, p, m, r, torus=""):
    return f"(n={n},q={p**m},r={r}{',' + torus if torus else ''})"


def report(k: int, ok: bool, detail: str):
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)
    assert ok, line


def test_criterion_1_main_theorem_coxeter():
    bad, parts = [], []
    for key in COXETER:
        out = run(cfg("verify-main", *key, theta="generic", mode="exact"))
        rows = [it for it in out.items if it["kind"] == "induced"]
        ok = (out.status == "pass" and rows and len(rows) == out.summary["generic_count"]
              and all(it["norm"] == [1, 1] and it["degree"] == it["target_degree"] for it in rows))
        parts.append(f"{tag(*key)} {len(rows)} generic, deg {out.summary['target_degree'][0]}")
        if not ok:
            bad.append(tag(*key))
    report(1, not bad, "; ".join(parts) + (f"; failing: {bad}" if bad else ""))


def test_criterion_2_mixed_torus():
    out = run(cfg("verify-main", 3, 2, 1, 2, torus="2,1", theta="generic"))
    rows = [it for it in out.items if it["kind"] == "induced"]
    if out.status == "no_generic":
        report(2, True, "no generic theta for cycle type (2,1); reported explicitly")
        return
    ok = out.status == "pass" and all(it["norm"] == [1, 1] and it["degree_ok"] for it in rows)
    report(2, ok, f"{len(rows)} generic theta at (n=3,q=2,r=2,2+1), norm 1, degree "
                  f"{out.summary['target_degree'][0]}")


def test_criterion_3_prop35_equivalence():
    parts, ok = [], True
    for n, p, m in [(2, 2, 1), (2, 3, 1), (2, 2, 2), (3, 2, 1)]:
        s = run(cfg("prop35", n, p, m, 2)).summary
        good = s["stabilizer_equals_regular"] and s["regular_in_general_position"] and s["exceptions"] == 0
        ok &= good
        parts.append(f"(n={n},q={p**m}) stab=reg={s['regular']}<=gp={s['general_position']}/{s['characters']}")
    report(3, ok, "; ".join(parts) + "; 0 exceptions" * ok)


def test_criterion_4_letellier():
    parts, ok = [], True
    for n, p in [(2, 2), (2, 3), (3, 2)]:
        out = run(cfg("letellier", n, p, 1, 2))
        s = out.summary
        counts = {s["orbit_count"], s["class_count_formula"], s["class_count_invariants"],
                  s["class_count_bruteforce"], s["invariant_characters"]}
        good = out.status == "pass" and s["all_nonzero"] and len(counts) == 1
        ok &= good
        parts.append(f"M_{n}(F_{p}): {s['invariant_characters']} invariant chars = "
                     f"{s['class_count_bruteforce']} classes, all pairings nonzero")
    report(4, ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_5_mackey_frobenius():
    parts, ok = [], True
    for key in COXETER:
        out = run(cfg("mackey-check", *key, theta="generic"))
        good = out.status == "pass" and all(
            it["mackey_agrees"] and it["frobenius_all_agree"] and it["exact_agrees"]
            and it["mackey_exact_agrees"] and it["frobenius_agrees"] for it in out.items)
        ok &= good
        parts.append(f"{tag(*key)} {sum(it['pairs'] for it in out.items)} pairs")
    report(5, ok, "; ".join(parts))


def test_criterion_6_structure():
    parts, ok = [], True
    for key, torus in [(k, "") for k in COXETER] + [((3, 2, 1, 2), "2,1"), ((2, 2, 1, 2), "1,1")]:
        g = run(cfg("group", *key, torus=torus))
        t = run(cfg("torus", *key, torus=torus))
        good = g.status == "pass" and t.status == "pass" and all(g.summary["checks"].values()) \
            and t.summary["checks"]["orthogonality"] and t.summary["checks"]["dual_size"]
        ok &= good
        parts.append(f"{tag(*key, torus)} |G|={g.items[0]['order']} |T|={t.summary['torus_order']}")
    report(6, ok, "; ".join(parts))


def test_criterion_7_dual_mode():
    parts, ok = [], True
    for key in [(2, 2, 1, 2), (2, 3, 1, 2)]:
        v = run(cfg("verify-main", *key, theta="all", mode="both"))
        rows = [it for it in v.items if "numeric_residual_ok" in it]
        good = v.status == "pass" and rows and all(it["numeric_residual_ok"] for it in rows)
        mk = run(cfg("mackey-check", *key, theta="all", mode="both"))
        good &= all(it["numeric_ok"] and it["exact_agrees"] and it["exact_pairs_checked"] == it["pairs"]
                    for it in mk.items)
        n, p = key[0], key[1]
        le = run(cfg("letellier", n, p, 1, 2))
        good &= all(it["numeric_agrees"] for it in le.items)
        ok &= good
        worst = max(it["numeric_residual"] for it in mk.items)
        parts.append(f"{tag(*key)} {len(rows)} norms, {sum(it['pairs'] for it in mk.items)} Gram pairs, "
                     f"{len(le.items)} Letellier pairings; max residual {worst:.1e}")
    report(7, ok, "; ".join(parts))


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            t0 = time.perf_counter()
            try:
                fn()
            except AssertionError:
                failed += 1
            print(f"    ({time.perf_counter() - t0:.1f}s)")
    sys.exit(1 if failed else 0)
