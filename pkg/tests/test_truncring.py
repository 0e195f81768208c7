import numpy as np
import pytest
from hypothesis import given, strategies as st

from higherdl.fieldtower import field_build
from higherdl.truncring import (RingSpec, all_units, norm_map, reduce_level, ring_frobenius,
                                ring_inv, ring_mul, ring_one)

RINGS = [(2, 1, 1, 2), (2, 1, 2, 2), (3, 1, 1, 3), (2, 1, 1, 4), (2, 2, 1, 2), (5, 1, 1, 2)]


def _convolve(F, a, b):
    """Schoolbook product in F[pi]/pi^r."""
    r = len(a)
    out = [0] * r
    for i in range(r):
        for j in range(r - i):
            out[i + j] = int(F.add(out[i + j], F.mul(int(a[i]), int(b[j]))))
    return out


@pytest.fixture(params=RINGS, ids=lambda t: "p%d_m%d_d%d_r%d" % t)
def ring(request):
    p, m, d, r = request.param
    return RingSpec(field_build(p, m, d), r)


def test_sizes(ring):
    Q, r = ring.field.size, ring.r
    assert len(ring.elements()) == Q**r == ring.size
    assert len(ring.units()) == (Q - 1) * Q ** (r - 1) == ring.unit_count


def test_mul_matches_schoolbook(ring):
    rng = np.random.default_rng(3)
    el = ring.elements()
    a = el[rng.integers(len(el), size=80)]
    b = el[rng.integers(len(el), size=80)]
    prod = ring_mul(ring.field, a, b)
    for i in range(80):
        assert list(prod[i]) == _convolve(ring.field, a[i], b[i])


def test_inverse(ring):
    u = ring.units()
    assert np.all(ring_mul(ring.field, u, ring_inv(ring.field, u)) == ring_one(ring.r))


def test_element_wrapper(ring):
    x = ring.elem([1] + [1] * (ring.r - 1))
    assert (x * x.inv()) == ring.one()
    assert (x**-2) * x**2 == ring.one()
    pi = ring.pi()
    if ring.r > 1:
        assert pi.valuation() == 1 and (pi**ring.r).valuation() == ring.r
        with pytest.raises(ZeroDivisionError):
            pi.inv()
    assert reduce_level(x, 1).coeffs == (1,)
    assert ring_frobenius(x, ring.field.k) == x


def test_norm_map_lands_in_fixed_ring():
    F = field_build(2, 1, 3)
    R = RingSpec(F, 2)
    for t in all_units(R)[::5]:
        N = norm_map(t, 3)
        assert ring_frobenius(N) == N
    with pytest.raises(ValueError):
        norm_map(R.zero(), 2)


@given(st.sampled_from(RINGS), st.data())
def test_ring_axioms(params, data):
    p, m, d, r = params
    R = RingSpec(field_build(p, m, d), r)
    coeff = st.lists(st.integers(0, R.field.size - 1), min_size=r, max_size=r)
    a, b, c = (R.elem(data.draw(coeff)) for _ in range(3))
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == R.zero()
    assert ring_frobenius(a * b) == ring_frobenius(a) * ring_frobenius(b)
