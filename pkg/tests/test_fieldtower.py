import numpy as np
import pytest
from hypothesis import given, strategies as st
from sympy import ZZ
from sympy.polys.galoistools import gf_irreducible_p, gf_mul, gf_rem

from higherdl.fieldtower import (FieldElem, dlog, embedding, embedding_inverse, field_build,
                                 frobenius, is_irreducible, smallest_irreducible, trace_to)

FIELDS = [(2, 1, 1), (2, 1, 2), (2, 1, 3), (3, 1, 2), (2, 2, 2), (5, 1, 2), (7, 1, 1)]


def _sympy_mul(F, a, b):
    # sympy polys are highest-degree first; ours are little-endian digit vectors
    pa = list(reversed(FieldElem(F, a).rep))
    pb = list(reversed(FieldElem(F, b).rep))
    mod = list(reversed(F.modulus))
    prod = gf_rem(gf_mul(pa, pb, F.p, ZZ), mod, F.p, ZZ)
    digits = list(reversed(prod)) + [0] * F.k
    return sum(int(c) * F.p**i for i, c in enumerate(digits[:F.k]))


@pytest.mark.parametrize("p,k", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2)])
def test_smallest_irreducible_matches_sympy(p, k):
    f = smallest_irreducible(p, k)
    assert len(f) == k + 1 and f[-1] == 1
    assert gf_irreducible_p(list(reversed(f)), p, ZZ)
    assert is_irreducible(f, p)


def test_reducible_rejected():
    assert not is_irreducible((1, 0, 1), 2)          # x^2 + 1 = (x + 1)^2
    assert not is_irreducible((0, 1, 1), 3)


@pytest.mark.parametrize("pmd", FIELDS)
def test_mul_against_sympy(pmd):
    F = field_build(*pmd)
    rng = np.random.default_rng(0)
    a, b = rng.integers(F.size, size=(2, 200))
    ours = F.mul(a, b)
    assert all(int(ours[i]) == _sympy_mul(F, int(a[i]), int(b[i])) for i in range(200))


@pytest.mark.parametrize("pmd", FIELDS)
def test_field_axioms(pmd):
    F = field_build(*pmd)
    x = np.arange(1, F.size)
    assert np.all(F.mul(x, F.inv(x)) == 1)
    assert np.all(F.add(x, F.neg(x)) == 0)
    # the multiplicative group is cyclic of order Q - 1, generated by the primitive root
    assert len(set(F.exp_table[:F.order].tolist())) == F.order
    assert np.all(F.pow(x, F.order) == 1)


@pytest.mark.parametrize("pmd", FIELDS)
def test_frobenius_and_subfields(pmd):
    F = field_build(*pmd)
    x = np.arange(F.size)
    assert np.all(F.frob(x, F.d) == x)               # F^d = id on F_{q^d}
    assert np.all(F.pfrob(x, F.k) == x)
    sub = F.q_subfield(1)
    assert len(sub) == F.q and np.all(F.frob(sub) == sub)
    for e in range(1, F.k + 1):
        if F.k % e == 0:
            assert len(F.subfield(e)) == F.p**e


@pytest.mark.parametrize("pmd", FIELDS)
def test_trace_lands_in_prime_field_and_is_additive(pmd):
    F = field_build(*pmd)
    x = np.arange(F.size)
    t = F.trace(x, "p")
    assert np.all(t < F.p)
    rng = np.random.default_rng(1)
    a, b = rng.integers(F.size, size=(2, 100))
    assert np.all(F.trace(F.add(a, b), "p") == F.add(F.trace(a, "p"), F.trace(b, "p")))
    # the trace form is surjective
    assert set(t.tolist()) == set(range(F.p))


def test_elem_wrapper_and_dlog():
    F = field_build(3, 1, 2)
    g = FieldElem(F, F.primitive_root)
    for e in range(F.order):
        assert dlog(g**e) == e
    x = FieldElem.from_rep(F, (1, 2))
    assert (x * x.inverse()).value == 1
    assert frobenius(frobenius(x)) == x
    assert trace_to(x).value < F.p
    with pytest.raises(ValueError):
        dlog(FieldElem(F, 0))


@pytest.mark.parametrize("small,big", [((2, 1, 1), (2, 1, 2)), ((2, 1, 2), (2, 1, 4)),
                                       ((3, 1, 1), (3, 1, 2)), ((2, 2, 1), (2, 2, 3))])
def test_embedding_is_a_ring_homomorphism(small, big):
    Fs, Fb = field_build(*small), field_build(*big)
    emb = embedding(Fs, Fb)
    x = np.arange(Fs.size)
    a, b = np.meshgrid(x, x, indexing="ij")
    assert np.array_equal(emb[Fs.mul(a, b)], Fb.mul(emb[a], emb[b]))
    assert np.array_equal(emb[Fs.add(a, b)], Fb.add(emb[a], emb[b]))
    back = embedding_inverse(Fs, Fb)
    assert np.array_equal(back[emb], x)
    assert (back >= 0).sum() == Fs.size


def test_bad_parameters():
    with pytest.raises(ValueError):
        field_build(4, 1, 1)


@given(st.sampled_from(FIELDS), st.data())
def test_distributive_and_frobenius_additive(pmd, data):
    F = field_build(*pmd)
    a, b, c = (data.draw(st.integers(0, F.size - 1)) for _ in range(3))
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.frob(F.add(a, b)) == F.add(F.frob(a), F.frob(b))
    assert F.frob(F.mul(a, b)) == F.mul(F.frob(a), F.frob(b))
