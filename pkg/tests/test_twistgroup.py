import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from higherdl.twistgroup import (GroupElem, GroupSpec, ResourceCapError, cache_checksum,
                                 enumerate_elements, enumerate_group, is_twist_fixed,
                                 lang_matrix, load_group, mat_identity, mat_inv, mat_mul,
                                 parse_cycle_type, perm_cycles, perm_order, table_checksum,
                                 transport_from_split, tu_decompose_batch)


def group(n, p, r, ctype, m=1):
    return enumerate_group(GroupSpec.from_cycle_type(n, p, m, r, ctype))


def closed_form(n, q, r):
    return q ** ((r - 1) * n * n) * math.prod(q**n - q**i for i in range(n))


def brute_class_count(G):
    """Orbits of conjugation by every element (no generators involved)."""
    seen = np.zeros(G.order, dtype=bool)
    inv = G.elems[G.inverse_indices()]
    count = 0
    for i in range(G.order):
        if seen[i]:
            continue
        count += 1
        x = np.broadcast_to(G.elems[i], G.elems.shape)
        seen[G.index_of(mat_mul(G.F, mat_mul(G.F, G.elems, x), inv))] = True
    return count


# class numbers frozen from brute_class_count
CLASS_COUNTS = {
    (2, 2, 1, "1,1"): 3, (2, 3, 1, "1,1"): 8, (3, 2, 1, "1,1,1"): 6, (3, 2, 1, "3"): 6,
    (2, 2, 2, "1,1"): 14, (2, 2, 2, "2"): 14, (2, 3, 2, "2"): 78, (2, 3, 2, "1,1"): 78,
    (2, 2, 3, "2"): 60,
}


@pytest.mark.parametrize("key", sorted(CLASS_COUNTS))
def test_class_counts(key):
    n, p, r, ctype = key
    G = group(n, p, r, ctype)
    assert G.classes().count == CLASS_COUNTS[key]
    assert G.classes().sizes.sum() == G.order
    if G.order <= 2000:
        assert brute_class_count(G) == CLASS_COUNTS[key]


@pytest.mark.parametrize("n,p,m,r,ctype", [(1, 3, 1, 2, "1"), (2, 2, 1, 2, "2"), (2, 2, 1, 2, "1,1"),
                                           (2, 3, 1, 2, "2"), (2, 2, 2, 2, "2"), (2, 2, 1, 4, "2"),
                                           (3, 2, 1, 1, "2,1"), (2, 5, 1, 1, "2")])
def test_order_matches_closed_form(n, p, m, r, ctype):
    spec = GroupSpec.from_cycle_type(n, p, m, r, ctype)
    G = enumerate_group(spec)
    assert G.order == spec.closed_form_order() == closed_form(n, p**m, r)
    assert np.all(is_twist_fixed(spec, G.elems))


def test_known_small_orders():
    # |GL_2(F_2)| = 6, |GL_2(F_3)| = 48, |GL_3(F_2)| = 168
    assert group(2, 2, 1, "1,1").order == 6
    assert group(2, 3, 1, "1,1").order == 48
    assert group(3, 2, 1, "1,1,1").order == 168


def test_kernel_filtration_and_abelian_top():
    G = group(2, 2, 4, "2")
    sizes = [len(G.subgroup("kernel", i)) for i in range(5)]
    q = 2
    assert sizes == [G.order, q**12, q**8, q**4, 1]
    top = G.subgroup("kernel", 2)                     # G^l with r = 2l is abelian
    a, b = np.meshgrid(top, top, indexing="ij")
    ab = G.index_of(mat_mul(G.F, G.elems[a.ravel()], G.elems[b.ravel()]))
    ba = G.index_of(mat_mul(G.F, G.elems[b.ravel()], G.elems[a.ravel()]))
    assert np.array_equal(ab, ba)


def test_torus_times_radical_is_torus_times_top_kernel():
    G = group(2, 2, 2, "2")
    T = G.subgroup("torus")
    K = G.subgroup("kernel", G.spec.l)
    a, b = np.meshgrid(T, K, indexing="ij")
    prod = np.unique(G.index_of(mat_mul(G.F, G.elems[a.ravel()], G.elems[b.ravel()])))
    assert np.array_equal(prod, G.subgroup("torus_times_radical"))
    t_idx, u_idx = tu_decompose_batch(G.spec, G.elems[prod])
    assert len(t_idx) == len(prod)


def test_element_validation():
    spec = GroupSpec.from_cycle_type(2, 2, 1, 2, "2")
    ident = mat_identity(2, 2)
    g = GroupElem(spec, ident)
    assert np.array_equal((g * g).entries, ident)
    bad = ident.copy()
    bad[0, 1, 0] = 2                                  # an F_4 element not matching its partner
    with pytest.raises(ValueError):
        GroupElem(spec, bad)
    with pytest.raises(ValueError):
        GroupElem(spec, np.zeros((2, 2, 2), dtype=np.int64))


def test_perm_helpers():
    assert parse_cycle_type("2,1") == (2, 1)
    w = GroupSpec.from_cycle_type(3, 2, 1, 2, "2,1").w
    assert sorted(map(len, perm_cycles(w))) == [1, 2] and perm_order(w) == 2
    with pytest.raises(ValueError):
        GroupSpec.from_cycle_type(3, 2, 1, 2, "2,2")


def test_resource_cap():
    with pytest.raises(ResourceCapError):
        enumerate_elements(GroupSpec.from_cycle_type(2, 7, 1, 3, "2"))


def test_cache_roundtrip(tmp_path):
    spec = GroupSpec.from_cycle_type(2, 3, 1, 2, "2")
    G = enumerate_group(spec)
    from higherdl.twistgroup import save_group
    path = save_group(G, tmp_path)
    assert cache_checksum(spec, tmp_path) == table_checksum(G)
    H = load_group(spec, tmp_path)
    assert np.array_equal(H.elems, G.elems)
    raw = bytearray(path.read_bytes())
    raw[-1] ^= 1
    path.write_bytes(bytes(raw))
    assert load_group(spec, tmp_path) is None        # tampered payload is rejected


@pytest.mark.parametrize("n,p,m,r,ctype", [(2, 2, 1, 2, "2"), (3, 2, 1, 2, "3"), (3, 2, 1, 2, "2,1"),
                                           (2, 2, 2, 2, "2"), (2, 2, 1, 4, "2")])
def test_lang_transport_is_class_preserving_bijection(n, p, m, r, ctype):
    spec = GroupSpec.from_cycle_type(n, p, m, r, ctype)
    lam = lang_matrix(spec)
    F = spec.field
    Flam = lam.copy()
    Flam[..., 0] = F.frob(lam[..., 0])
    assert np.array_equal(Flam, lam[list(spec.w)])  # F(lambda) row i is lambda row w(i)
    G, S = enumerate_group(spec), enumerate_group(spec.split())
    idx = transport_from_split(G, S)
    assert sorted(idx.tolist()) == list(range(G.order))
    assert sorted(G.classes().sizes.tolist()) == sorted(S.classes().sizes.tolist())


@given(st.integers(0, 3887), st.integers(0, 3887))
def test_group_closure_and_inverse(i, j):
    G = group(2, 3, 2, "2")
    prod = G.index_of(mat_mul(G.F, G.elems[i][None], G.elems[j][None]))[0]
    assert prod >= 0
    inv = mat_inv(G.F, G.elems[i][None])
    assert np.array_equal(mat_mul(G.F, G.elems[i][None], inv)[0], mat_identity(2, 2))
