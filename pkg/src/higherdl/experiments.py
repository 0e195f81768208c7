"""Experiment runners shared by the CLI, the scripts and the acceptance suite.

Each runner returns a :class:`Outcome`: a status, a summary dict and a list of
per-item rows, all JSON-ready (rationals as ``[num, den]`` pairs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .chars import (all_characters, check_homomorphism, reduction_matrix, scan_characters,
                    torus_dual)
from .clfun import (ClassFunction, SubgroupCharacter, borel_lift, degree_target, double_cosets,
                    frobenius_reciprocity_check, induce, inner_product, mackey_gram,
                    mackey_pairing, torus_lift, verify_main_theorem)
from .liealg import cyclo_repr, verify_letellier
from .torus import TorusSpec, norm_subgroup, roots, torus_points, weyl_bruteforce
from .twistgroup import (Group, GroupSpec, enumerate_group, kernel_to_matrix,
                         mat_mul, transport_from_split)

PAIR_LIMIT = 1 << 18


def frac(x: Fraction | int) -> list[int]:
    x = Fraction(x)
    return [x.numerator, x.denominator]


@dataclass
class RunConfig:
    command: str
    p: int = 2
    m: int = 1
    n: int = 2
    r: int = 2
    torus: str = ""
    theta: str = "generic"
    mode: str = "exact"
    format: str = "json"
    cache_dir: str | None = None
    workers: int = 1

    def validate(self) -> None:
        if not sympy.isprime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.m < 1 or self.n < 1 or self.r < 1 or self.workers < 1:
            raise ValueError("m, n, r and workers must be positive")
        if self.mode not in ("numeric", "exact", "both"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.command in ("verify-main", "prop35", "mackey-check", "chars") and self.r % 2:
            raise ValueError(f"{self.command} needs even r (the arithmetic radical needs r = 2l)")

    @property
    def cycle_type(self) -> str:
        return self.torus or str(self.n)

    def group_spec(self) -> GroupSpec:
        return GroupSpec.from_cycle_type(self.n, self.p, self.m, self.r, self.cycle_type)

    def echo(self) -> dict:
        return {"command": self.command, "p": self.p, "m": self.m, "n": self.n, "r": self.r,
                "torus": self.cycle_type, "theta": self.theta, "mode": self.mode}


@dataclass
class Outcome:
    status: str                      # pass | fail | no_generic
    summary: dict
    items: list[dict] = field(default_factory=list)
    groups: list[Group] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "pass"


def load(cfg: RunConfig, spec: GroupSpec | None = None) -> Group:
    return enumerate_group(spec or cfg.group_spec(), cache_dir=cfg.cache_dir, workers=cfg.workers)


def select_characters(spec: TorusSpec, selector: str):
    """Characters picked by 'all', 'generic' or ';'-separated dual coordinates."""
    if selector in ("all", "generic"):
        scan = scan_characters(spec)
        if selector == "all":
            return scan.characters, scan
        return [c for c, g in zip(scan.characters, scan.generic) if g], scan
    D = torus_dual(spec)
    out = []
    for part in selector.split(";"):
        coords = tuple(int(x) for x in part.split(","))
        if len(coords) != len(D.orders) or any(not 0 <= c < o for c, o in zip(coords, D.orders)):
            raise ValueError(f"theta {part!r} is not a valid coordinate tuple for orders {D.orders}")
        out.append(next(c for c in all_characters(spec) if c.coords == coords))
    return out, scan_characters(spec)


# -- structure ----------------------------------------------------------------------------

def _pairs(n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    if n * n <= PAIR_LIMIT:
        a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        return a.ravel(), b.ravel()
    rng = np.random.default_rng(seed)
    return rng.integers(n, size=PAIR_LIMIT), rng.integers(n, size=PAIR_LIMIT)


def run_group(cfg: RunConfig) -> Outcome:
    spec = cfg.group_spec()
    G = load(cfg, spec)
    q, n, r = spec.q, spec.n, spec.r
    ts = TorusSpec(spec)
    T = torus_points(ts)
    items = [{"name": "G", "order": G.order, "closed_form": spec.closed_form_order()}]
    for i in range(1, r):
        items.append({"name": f"G^{i}", "order": int(G.mask("kernel", i).sum()),
                      "closed_form": q ** ((r - i) * n * n)})
    items.append({"name": "T", "order": T.order, "closed_form": ts.closed_form_order(),
                  "diagonal_in_G": int(G.mask("torus").sum())})
    checks: dict = {}
    if r % 2 == 0:
        l = spec.l
        U = G.subgroup("arithmetic_radical")
        TU = G.subgroup("torus_times_radical")
        items.append({"name": "U^±", "order": len(U), "closed_form": q ** ((n * n - n) * l)})
        items.append({"name": "TU^±", "order": len(TU),
                      "closed_form": ts.closed_form_order() * q ** ((n * n - n) * l)})
        K = G.subgroup("kernel", l)
        a, b = _pairs(len(K))
        Ea, Eb = G.elems[K[a]], G.elems[K[b]]
        ab = mat_mul(G.F, Ea, Eb)
        checks["G^l_abelian"] = bool(np.array_equal(ab, mat_mul(G.F, Eb, Ea)))
        Xa, Xb = kernel_to_matrix(spec, Ea, l), kernel_to_matrix(spec, Eb, l)
        checks["G^l_additive"] = bool(np.array_equal(kernel_to_matrix(spec, ab, l), G.F.add(Xa, Xb)))
        checks["G^l_order"] = len(K) == q ** (n * n * l)
        tg = G.index_of(mat_mul(G.F, T.matrices()[:, None], G.elems[K][None]).reshape(-1, n, n, r))
        checks["TU_equals_TG^l"] = bool(np.array_equal(np.unique(tg), TU))
    for it in items:
        checks[f"order_{it['name']}"] = it["order"] == it["closed_form"]
    checks["torus_mask"] = int(G.mask("torus").sum()) == T.order
    summary = {"group": spec.describe(), "classes": G.classes().count, "checks": checks}
    return Outcome("pass" if all(checks.values()) else "fail", summary, items, [G])


def character_orthogonality(spec: TorusSpec) -> bool:
    """Exact check of (1/|T|) sum_t theta(t) conj(theta'(t)) = delta over all pairs."""
    D = torus_dual(spec)
    E = D.all_exponents()
    M = D.M
    R = reduction_matrix(M)
    N = D.order
    for a in range(len(E)):
        diff = (E - E[a]) % M
        counts = np.zeros((len(E), M), dtype=np.int64)
        np.add.at(counts, (np.repeat(np.arange(len(E)), N), diff.ravel()), 1)
        red = counts @ R
        expect = np.zeros_like(red)
        expect[a, 0] = N
        if not np.array_equal(red, expect):
            return False
    return True


def run_torus(cfg: RunConfig) -> Outcome:
    spec = cfg.group_spec()
    ts = TorusSpec(spec)
    T = torus_points(ts)
    D = torus_dual(ts)
    W = T.weyl
    checks = {"order": T.order == ts.closed_form_order(), "dual_size": D.count == T.order,
              "weyl_order": W.order == W.expected_order()}
    a, b = _pairs(T.order)
    checks["weyl_automorphisms"] = all(
        bool(np.array_equal(P[T.mul(a, b)], T.mul(P[a], P[b]))) for P in T.weyl_perms)
    if spec.closed_form_order() <= 1 << 17:
        G = load(cfg, spec)
        wb, perms = weyl_bruteforce(G, T)
        checks["weyl_bruteforce"] = wb == W.order and perms == set(W.elements)
    if T.order <= 1024:
        checks["orthogonality"] = character_orthogonality(ts)
    checks["homomorphisms"] = all(check_homomorphism(c, samples=64) for c in all_characters(ts)[:64])
    items = []
    kernel_idx = set(np.flatnonzero(T.kernel_mask(spec.r - 1)).tolist())
    for al in roots(spec.n):
        img = norm_subgroup(T, al)
        img2 = norm_subgroup(T, al, 2 * spec.d)
        frob = T.index_of(T.F.frob(T.diag[img][:, np.argsort(spec.w)], 1))
        items.append({"alpha": [al[0] + 1, al[1] + 1], "norm_size": len(img),
                      "norm_size_2a": len(img2), "independent_of_a": bool(np.array_equal(img, img2)),
                      "in_level_r-1": set(img.tolist()) <= kernel_idx,
                      "frobenius_stable": set(frob.tolist()) == set(img.tolist())})
        checks[f"norm_{al}"] = items[-1]["independent_of_a"] and items[-1]["in_level_r-1"] \
            and items[-1]["frobenius_stable"]
    summary = {"group": spec.describe(), "torus_order": T.order, "closed_form": ts.closed_form_order(),
               "weyl_order": W.order, "dual_orders": D.orders, "M": D.M, "characters": D.count,
               "checks": checks}
    return Outcome("pass" if all(checks.values()) else "fail", summary, items)


def run_chars(cfg: RunConfig) -> Outcome:
    spec = cfg.group_spec()
    ts = TorusSpec(spec)
    chosen, scan = select_characters(ts, cfg.theta)
    pos = {c.coords: k for k, c in enumerate(scan.characters)}
    items = []
    for c in chosen:
        k = pos[c.coords]
        items.append({"theta": list(c.coords), "beta": c.beta.fmt(),
                      "regular": bool(scan.regular[k]),
                      "general_position": bool(scan.general_position[k]),
                      "stabilizer": bool(scan.stabilizer[k]), "generic": bool(scan.generic[k])})
    summary = {"group": spec.describe(), "characters": len(scan.characters),
               "generic": int(scan.generic.sum()), "selected": len(chosen),
               "M": torus_dual(ts).M, "dual_orders": torus_dual(ts).orders}
    return Outcome("pass", summary, items)


# -- main theorem ---------------------------------------------------------------------------

def run_verify_main(cfg: RunConfig) -> Outcome:
    spec = cfg.group_spec()
    ts = TorusSpec(spec)
    G = load(cfg, spec)
    chosen, scan = select_characters(ts, cfg.theta)
    generic = {c.coords for c, g in zip(scan.characters, scan.generic) if g}
    items = []
    for c in chosen:
        if c.coords not in generic:
            items.append({"kind": "induced", "theta": list(c.coords), "generic": False,
                          "skipped": "theta is not generic"})
            continue
        rep = verify_main_theorem(G, c, mode=cfg.mode, require_generic=False)
        row = {"kind": "induced", "theta": list(rep.theta), "beta": list(rep.beta),
               "generic": True, "degree": frac(rep.degree), "target_degree": frac(rep.target),
               "norm": frac(rep.norm), "degree_ok": rep.degree_ok, "norm_ok": rep.norm_ok,
               "integral": rep.integral, "passed": rep.passed}
        if rep.numeric_residual is not None:
            row["numeric_residual_ok"] = rep.numeric_residual < 1e-6
        items.append(row)
    split = all(len(cy) == 1 for cy in spec.cycles)
    if split:
        items += _principal_series_rows(G, ts, chosen, cfg.mode)
    checked = [it for it in items if "passed" in it]
    summary = {"group": spec.describe(), "generic_count": len(generic), "rows": len(checked),
               "target_degree": frac(degree_target(ts)),
               "all_passed": all(it["passed"] for it in checked)}
    if not summary["all_passed"]:
        return Outcome("fail", summary, items, [G])
    if not generic:
        summary["note"] = "no generic character exists for this torus"
        return Outcome("no_generic", summary, items, [G])
    return Outcome("pass", summary, items, [G])


def _principal_series_rows(G: Group, ts: TorusSpec, chosen, mode: str) -> list[dict]:
    B = G.subgroup("borel")
    dc = double_cosets(G, B, B)
    rows = []
    for c in chosen:
        chi = borel_lift(c, G)
        R = induce(chi)
        norm = inner_product(R, R, mode).value
        mk = mackey_pairing(chi, chi, dc)
        rows.append({"kind": "principal_series", "theta": list(c.coords), "degree": frac(R.degree),
                     "norm": frac(norm), "mackey": frac(mk), "passed": norm == mk})
    return rows


# -- regular vs general position vs stabilizer ----------------------------------------------

def run_prop35(cfg: RunConfig) -> Outcome:
    spec = cfg.group_spec()
    ts = TorusSpec(spec)
    scan = scan_characters(ts)
    coxeter = spec.cycle_type == (spec.n,)
    reg, gp, stab = scan.regular, scan.general_position, scan.stabilizer
    equal = bool(np.array_equal(stab, reg))
    inclusion = bool(np.all(gp[reg]))
    items = [{"theta": list(c.coords), "beta": c.beta.fmt(), "regular": bool(reg[k]),
              "general_position": bool(gp[k]), "stabilizer": bool(stab[k])}
             for k, c in enumerate(scan.characters)]
    summary = {"group": spec.describe(), "coxeter": coxeter, "characters": len(items),
               "regular": int(reg.sum()), "general_position": int(gp.sum()),
               "stabilizer": int(stab.sum()), "stabilizer_equals_regular": equal,
               "regular_in_general_position": inclusion,
               "exceptions": int((stab != reg).sum() + (reg & ~gp).sum()),
               "asserted": coxeter}
    ok = (equal and inclusion) if coxeter else True
    return Outcome("pass" if ok else "fail", summary, items)


# -- Mackey and Frobenius reciprocity ----------------------------------------------------------

def _numeric_gram(fs1: list[ClassFunction], fs2: list[ClassFunction]) -> tuple[np.ndarray, float]:
    G = fs1[0].group
    sizes = G.classes().sizes.astype(np.float64)
    V1 = np.array([f.values_complex() for f in fs1])
    V2 = np.array([f.values_complex() for f in fs2])
    Z = (V1 * sizes) @ V2.conj().T / G.order
    K = np.rint(Z.real)
    return K.astype(np.int64), float(np.abs(Z - K).max(initial=0.0))


def _numeric_frobenius(chis: list[SubgroupCharacter], fs: list[ClassFunction]) -> tuple[np.ndarray, float]:
    """<chi_a, Res f_b>_H for every pair, summed over the elements of H."""
    H = chis[0].members
    X = np.array([np.exp(2j * np.pi * c.exps[H] / c.M) for c in chis])
    class_of = fs[0].group.classes().class_of[H]
    V = np.array([f.values_complex()[class_of] for f in fs])
    Z = X @ V.conj().T / len(H)
    K = np.rint(Z.real)
    return K.astype(np.int64), float(np.abs(Z - K).max(initial=0.0))


def gram_check(chis: list[SubgroupCharacter], psis: list[SubgroupCharacter],
               exact_limit: int | None = 4096, seed: int = 0) -> dict:
    """Direct Gram of induced characters vs Mackey sums, plus Frobenius reciprocity samples."""
    G = chis[0].group
    dc = double_cosets(G, chis[0].members, psis[0].members)
    I1 = [induce(c) for c in chis]
    I2 = [induce(c) for c in psis]
    direct, resid = _numeric_gram(I1, I2)
    mk = mackey_gram(chis, psis, dc)
    pairs = [(a, b) for a in range(len(chis)) for b in range(len(psis))]
    if exact_limit is not None and len(pairs) > exact_limit:
        rng = np.random.default_rng(seed)
        diag = [(a, a) for a in range(min(len(chis), len(psis)))] if chis is psis else []
        pick = rng.choice(len(pairs), size=exact_limit - len(diag), replace=False)
        pairs = sorted(set(diag) | {pairs[k] for k in pick})
    exact_ok = all(inner_product(I1[a], I2[b]).value == direct[a, b] for a, b in pairs)
    # exact Mackey on the diagonal / first pairs
    diag_pairs = pairs[: min(len(pairs), 64)]
    mackey_exact_ok = all(mackey_pairing(chis[a], psis[b], dc) == direct[a, b] for a, b in diag_pairs)
    frob_pairs = pairs[: min(len(pairs), 100)]
    frob_ok = all(frobenius_reciprocity_check(chis[a], I2[b])[2] for a, b in frob_pairs)
    frob_all, frob_resid = _numeric_frobenius(chis, I2)
    return {"pairs": len(chis) * len(psis), "double_cosets": dc.count,
            "numeric_residual": resid, "numeric_ok": resid < 1e-6,
            "mackey_agrees": bool(np.array_equal(mk, direct)),
            "exact_pairs_checked": len(pairs), "exact_agrees": exact_ok,
            "mackey_exact_checked": len(diag_pairs), "mackey_exact_agrees": mackey_exact_ok,
            "frobenius_checked": len(frob_pairs), "frobenius_agrees": frob_ok,
            "frobenius_all_agree": bool(np.array_equal(frob_all, direct)) and frob_resid < 1e-6,
            "gram_nonnegative": bool(np.all(direct >= 0))}


def run_mackey_check(cfg: RunConfig) -> Outcome:
    spec = cfg.group_spec()
    ts = TorusSpec(spec)
    G = load(cfg, spec)
    chosen, scan = select_characters(ts, cfg.theta)
    limit = None if cfg.mode == "both" else 4096      # "both" checks every pair exactly
    items = []
    if chosen:
        lifts = [torus_lift(c, G) for c in chosen]
        res = gram_check(lifts, lifts, limit)
        res["case"] = "TU vs TU"
        gen = {c.coords for c, g in zip(scan.characters, scan.generic) if g}
        if all(c.coords in gen for c in chosen):
            direct_diag = [inner_product(induce(x), induce(x)).value for x in lifts[:64]]
            res["generic_diagonal_one"] = all(v == 1 for v in direct_diag)
        items.append(res)
    split_spec = spec.split()
    S = load(cfg, split_spec)
    split_ts = TorusSpec(split_spec)
    split_chars = all_characters(split_ts)
    if spec.cycle_type == split_spec.cycle_type:
        borels = [borel_lift(c, G) for c in split_chars]
        res = gram_check(borels, borels, limit)
        res["case"] = "B vs B"
        items.append(res)
    elif chosen:
        idx = transport_from_split(G, S)
        B_tw = np.sort(idx[S.subgroup("borel")])
        psis = []
        for c in split_chars:
            bl = borel_lift(c, S)
            exps = np.full(G.order, -1, dtype=np.int64)
            exps[idx[bl.members]] = bl.exps[bl.members]
            psis.append(SubgroupCharacter(G, B_tw, exps, bl.M))
        lifts = [torus_lift(c, G) for c in chosen]
        res = gram_check(lifts, psis, limit)
        res["case"] = "TU vs transported split B"
        items.append(res)
    keys = ("numeric_ok", "mackey_agrees", "exact_agrees", "mackey_exact_agrees", "frobenius_agrees",
            "frobenius_all_agree", "gram_nonnegative", "generic_diagonal_one")
    ok = all(it.get(k, True) for it in items for k in keys)
    summary = {"group": spec.describe(), "selected": len(chosen), "cases": len(items), "all_agree": ok}
    return Outcome("pass" if ok else "fail", summary, items, [G])


# -- Letellier ----------------------------------------------------------------------------------

def run_letellier(cfg: RunConfig) -> Outcome:
    rep = verify_letellier(cfg.n, cfg.p, cfg.m)
    items = []
    for row in rep.rows:
        rat = row.pairing.rational()
        items.append({
            "beta_type": row.beta_type, "beta_rep": row.beta_rep, "orbit_size": row.orbit_size,
            "torus_cycles": list(row.torus_cycles), "theta_id": list(row.theta_id),
            "pairing_num": None if rat is None else rat.numerator,
            "pairing_den": None if rat is None else rat.denominator,
            "pairing": cyclo_repr(row.pairing), "bracket": cyclo_repr(row.bracket),
            "nonzero": row.nonzero, "brackets_consistent": row.consistent,
            "numeric_residual": row.numeric_residual, "numeric_agrees": row.numeric_agrees,
            "witness": row.witness, "checks": row.checks,
            "generic": None if row.generic is None else row.generic.generic})
    summary = {"n": rep.n, "q": cfg.p**cfg.m, "invariant_characters": len(rep.rows),
               "orbit_count": rep.orbit_count, "class_count_formula": rep.class_count_formula,
               "class_count_invariants": rep.class_count_invariants,
               "class_count_bruteforce": rep.class_count_bruteforce,
               "all_nonzero": all(r.nonzero for r in rep.rows),
               "fallbacks": sum(r.witness == "fallback" for r in rep.rows)}
    return Outcome("pass" if rep.passed else "fail", summary, items)


RUNNERS = {
    "group": run_group, "torus": run_torus, "chars": run_chars, "verify-main": run_verify_main,
    "prop35": run_prop35, "letellier": run_letellier, "mackey-check": run_mackey_check,
}


def run(cfg: RunConfig) -> Outcome:
    cfg.validate()
    return RUNNERS[cfg.command](cfg)

