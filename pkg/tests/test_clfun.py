from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from higherdl.chars import all_characters, scan_characters
from higherdl.clfun import (ClassFunction, NotGenericError, SubgroupCharacter, borel_lift,
                            degree_target, double_cosets, frobenius_reciprocity_check, induce,
                            induce_literal, inner_product, mackey_gram, mackey_pairing,
                            torus_lift, verify_main_theorem, weighted_pairing)
from higherdl.torus import TorusSpec
from higherdl.twistgroup import GroupSpec, enumerate_group, mat_mul

SMALL = [(2, 2, 1, 2, "2"), (2, 2, 1, 2, "1,1"), (2, 3, 1, 2, "2")]


def setup(key):
    ts = TorusSpec.from_cycle_type(*key)
    return ts, enumerate_group(ts.parent)


def trivial_on(G, members):
    exps = np.full(G.order, -1, dtype=np.int64)
    exps[members] = 0
    return SubgroupCharacter(G, members, exps, 1)


def brute_double_coset_count(G, H, K):
    left = G.elems[H]
    right = G.elems[K]
    seen = np.zeros(G.order, dtype=bool)
    count = 0
    for g in range(G.order):
        if seen[g]:
            continue
        count += 1
        hg = mat_mul(G.F, left, G.elems[g][None])
        for k in right:
            seen[G.index_of(mat_mul(G.F, hg, k[None]))] = True
    return count


@pytest.mark.parametrize("key", SMALL)
def test_induce_matches_literal_formula(key):
    ts, G = setup(key)
    for c in all_characters(ts)[::3]:
        chi = torus_lift(c, G)
        a, b = induce(chi), induce_literal(chi)
        assert np.array_equal(a.num * b.den, b.num * a.den)


@pytest.mark.parametrize("key", SMALL)
def test_lifts_are_homomorphisms(key):
    ts, G = setup(key)
    for c in all_characters(ts)[::2]:
        assert torus_lift(c, G).check_homomorphism()
    if all(len(cy) == 1 for cy in ts.parent.cycles):
        assert borel_lift(all_characters(ts)[1], G).check_homomorphism()
    else:
        with pytest.raises(ValueError):
            borel_lift(all_characters(ts)[1], G)


def test_regular_and_trivial_characters():
    G = enumerate_group(GroupSpec.from_cycle_type(2, 3, 1, 1, "1,1"))   # GL_2(F_3)
    one = ClassFunction.trivial(G)
    assert inner_product(one, one).value == 1
    reg = induce(trivial_on(G, np.array([G.identity])))
    assert reg.degree == G.order
    assert inner_product(reg, reg).value == G.order
    assert inner_product(reg, one).value == 1


@pytest.mark.parametrize("key", SMALL)
def test_mackey_counts_double_cosets(key):
    ts, G = setup(key)
    T = G.subgroup("torus")
    dc = double_cosets(G, T, T)
    assert dc.count == brute_double_coset_count(G, T, T)
    assert dc.sizes.sum() == G.order
    one = trivial_on(G, T)
    R = induce(one)
    assert inner_product(R, R).value == dc.count == mackey_pairing(one, one, dc)


@pytest.mark.parametrize("key", SMALL)
def test_frobenius_and_mackey_agree_with_direct(key):
    ts, G = setup(key)
    lifts = [torus_lift(c, G) for c in all_characters(ts)[:12]]
    dc = double_cosets(G, lifts[0].members, lifts[0].members)
    gram = mackey_gram(lifts, lifts, dc)
    for a in range(len(lifts)):
        Ia = induce(lifts[a])
        for b in range(len(lifts)):
            Ib = induce(lifts[b])
            direct = inner_product(Ia, Ib, "both").value
            assert direct == mackey_pairing(lifts[a], lifts[b], dc) == gram[a, b]
            lhs, rhs, ok = frobenius_reciprocity_check(lifts[a], Ib)
            assert ok and lhs.value == direct


@pytest.mark.parametrize("key,target", [((2, 2, 1, 2, "2"), 2), ((2, 3, 1, 2, "2"), 6),
                                        ((3, 2, 1, 2, "3"), 24), ((3, 2, 1, 2, "2,1"), 56),
                                        ((2, 2, 1, 2, "1,1"), 6), ((2, 2, 1, 4, "2"), 8)])
def test_degree_target(key, target):
    assert degree_target(TorusSpec.from_cycle_type(*key)) == target


@pytest.mark.parametrize("key", [(2, 2, 1, 2, "2"), (2, 3, 1, 2, "2"), (2, 2, 1, 4, "2")])
def test_main_theorem_small(key):
    ts, G = setup(key)
    s = scan_characters(ts)
    for c, g in zip(s.characters, s.generic):
        if not g:
            with pytest.raises(NotGenericError):
                verify_main_theorem(G, c)
            continue
        rep = verify_main_theorem(G, c, mode="both")
        assert rep.passed and rep.numeric_residual < 1e-6


# [DERIVED] norm multisets of Ind theta~ over the non-generic theta
NONGENERIC_NORMS = {(2, 2, 1, 2, "2"): {1: 4, 2: 2}, (2, 3, 1, 2, "2"): {2: 18, 3: 6}}


@pytest.mark.parametrize("key", sorted(NONGENERIC_NORMS))
def test_nongeneric_norms(key):
    ts, G = setup(key)
    s = scan_characters(ts)
    hist = {}
    for k, c in enumerate(s.characters):
        if s.generic[k]:
            continue
        norm = verify_main_theorem(G, c, require_generic=False).norm
        hist[int(norm)] = hist.get(int(norm), 0) + 1
        if not s.general_position[k]:
            assert norm > 1                           # a Weyl fixed point adds an intertwiner
    assert hist == NONGENERIC_NORMS[key]


def test_weighted_pairing_modes():
    num = np.array([[1, 0, 0], [0, 1, 0]], dtype=np.int64)       # 1 and zeta_3
    w = np.array([1, 1])
    assert weighted_pairing(w, num, num, 2, "exact").value == 1
    both = weighted_pairing(w, num, num, 2, "both")
    assert both.value == 1 and both.residual < 1e-12
    with pytest.raises(ValueError):
        weighted_pairing(w, num, num, 2, "bogus")


@settings(max_examples=30)
@given(st.integers(0, 71), st.integers(0, 71))
def test_gram_entries_symmetric(i, j):
    ts, G = setup((2, 3, 1, 2, "2"))
    chars = all_characters(ts)
    A, B = induce(torus_lift(chars[i], G)), induce(torus_lift(chars[j], G))
    ab, ba = inner_product(A, B).value, inner_product(B, A).value
    assert ab == ba and ab >= 0 and ab.denominator == 1
    assert A.degree == Fraction(G.order, len(G.subgroup("torus_times_radical")))
