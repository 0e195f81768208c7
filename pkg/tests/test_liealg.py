import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from higherdl.fieldtower import field_build
from higherdl.liealg import (bruteforce_class_count, charpoly, classify_beta, invariant_characters,
                             lie_model, minpoly_degree, multiplicative_scan, similarity_class_count,
                             verify_letellier)
from higherdl.twistgroup import GroupSpec

# [DERIVED] pairing of each invariant character with its witness, by beta type
LETELLIER_22 = {"type1(0,0,0)": 8, "type1(0,0,1)": 8, "type1(0,1,0)": 16, "type1(1,1,0)": 8,
                "type1(1,1,1)": 8, "type2(1,1)": Fraction(16, 3)}
LETELLIER_23 = {"type1(0,0,0)": Fraction(27, 4), "type1(0,0,1)": Fraction(27, 2),
                "type1(0,1,0)": Fraction(81, 4), "type2(0,1)": Fraction(81, 8)}


def _sympy_charpoly(A, p):
    x = sympy.Symbol("x")
    P = sympy.Poly(sympy.Matrix(A).charpoly(x).as_expr(), x, modulus=p)
    coeffs = [int(c) % p for c in reversed(P.all_coeffs())]
    return tuple(coeffs + [0] * (len(A) + 1 - len(coeffs)))


@given(st.sampled_from([2, 3, 5]), st.sampled_from([2, 3]), st.data())
def test_charpoly_matches_sympy(p, n, data):
    F = field_build(p, 1, 1)
    A = np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=n * n, max_size=n * n))).reshape(n, n)
    assert charpoly(F, A) == _sympy_charpoly(A.tolist(), p)


def test_minpoly_degree():
    F = field_build(3, 1, 1)
    assert minpoly_degree(F, np.eye(2, dtype=np.int64)) == 1
    assert minpoly_degree(F, np.array([[1, 1], [0, 1]])) == 2
    assert minpoly_degree(F, np.diag([1, 1, 2])) == 2


@pytest.mark.parametrize("n,p,expected", [(2, 2, 6), (2, 3, 12), (3, 2, 14)])
def test_class_counts(n, p, expected):
    F = field_build(p, 1, 1)
    assert similarity_class_count(n, p) == expected == bruteforce_class_count(F, n)


def test_classification_is_a_complete_invariant_for_2x2():
    F = field_build(3, 1, 1)
    reps = {}
    for entries in itertools.product(range(3), repeat=4):
        A = np.array(entries).reshape(2, 2)
        t = classify_beta(F, A)
        assert classify_beta(F, t.rep_matrix()).invariants == t.invariants
        reps.setdefault(t.rep, 0)
        reps[t.rep] += 1
    assert len(reps) == 12


@pytest.mark.parametrize("n,p", [(2, 2), (2, 3), (3, 2)])
def test_lie_model_orbits(n, p):
    model = lie_model(GroupSpec.from_cycle_type(n, p, 1, 2, (1,) * n))
    assert model.size == p ** (n * n)
    assert model.is_additive_iso()
    assert model.orbit_count == similarity_class_count(n, p)
    assert model.orbit_sizes.sum() == model.size
    assert len(set(model.invariants)) == model.orbit_count


def test_invariant_characters_are_invariant_and_orthogonal():
    model = lie_model(GroupSpec.from_cycle_type(2, 3, 1, 2, (1, 1)))
    chis = invariant_characters(model)
    assert all(c.is_invariant() for c in chis)
    zeta = np.exp(2j * np.pi * np.arange(3) / 3)
    V = np.array([c.values @ zeta for c in chis])
    gram = V @ V.conj().T / model.size
    assert np.allclose(gram, np.diag([c.size for c in chis]))


@pytest.mark.parametrize("n,p,frozen", [(2, 2, LETELLIER_22), (2, 3, LETELLIER_23)])
def test_letellier(n, p, frozen):
    rep = verify_letellier(n, p)
    assert rep.passed and rep.counts_agree
    got = {row.beta_type: row.pairing.rational() for row in rep.rows}
    for k, v in frozen.items():
        assert got[k] == v
    assert all(row.witness == "prescribed" for row in rep.rows)


def test_letellier_rejects_unsupported():
    with pytest.raises(ValueError):
        verify_letellier(2, 5)


@pytest.mark.parametrize("n,p", [(2, 2), (2, 3)])
def test_every_multiplicative_part_is_a_witness(n, p):
    rows = multiplicative_scan(n, p)
    assert len(rows) == similarity_class_count(n, p)
    assert all(hits == tried and tried >= 1 for _, hits, tried in rows)
