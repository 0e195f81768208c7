"""Maximal tori T_w^{F'}, their rational Weyl groups, and regularity tests.

The torus of the twisted group is the diagonal one.  Its rational points are
``prod_i (F_{q^{n_i}}[pi]/pi^r)^x`` over the cycles of ``w``: the value at the
first index of a cycle is free in the factor ring and position ``k`` along the
cycle carries its ``k``-th Frobenius image.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .fieldtower import FieldSpec, embedding, embedding_inverse, field_build
from .truncring import RingSpec, TruncRingElem, ring_mul, ring_one
from .twistgroup import Group, GroupElem, GroupSpec, ResourceCapError, perm_cycles

MAX_TORUS_ORDER = 1 << 16


@dataclass(frozen=True)
class TorusSpec:
    parent: GroupSpec

    @classmethod
    def from_cycle_type(cls, n, p, m, r, cycle_type) -> "TorusSpec":
        return cls(GroupSpec.from_cycle_type(n, p, m, r, cycle_type))

    @property
    def cycles(self) -> list[list[int]]:
        return self.parent.cycles

    @property
    def cycle_type(self) -> tuple[int, ...]:
        return self.parent.cycle_type

    @property
    def factor_specs(self) -> list[RingSpec]:
        P = self.parent
        return [RingSpec(field_build(P.p, P.m, len(c)), P.r) for c in self.cycles]

    def closed_form_order(self, r: int | None = None) -> int:
        r = self.parent.r if r is None else r
        q = self.parent.q
        return math.prod((q**s - 1) * q ** (s * (r - 1)) for s in self.cycle_type)

    def at_level(self, r: int) -> "TorusSpec":
        return TorusSpec(self.parent.at_level(r))


class Torus:
    """Enumerated T^{F'} in both the diagonal and the per-cycle product model."""

    def __init__(self, spec: TorusSpec):
        self.spec = spec
        P = spec.parent
        self.group_spec = P
        self.F: FieldSpec = P.field
        self.n, self.r = P.n, P.r
        order = spec.closed_form_order()
        if order > MAX_TORUS_ORDER:
            raise ResourceCapError(f"|T| = {order} exceeds {MAX_TORUS_ORDER}")
        unit_lists = [fs.units() for fs in spec.factor_specs]
        sizes = [len(u) for u in unit_lists]
        total = math.prod(sizes)
        ids = np.arange(total)
        diag = np.zeros((total, self.n, self.r), dtype=np.int64)
        factors = []
        rem = ids
        per_cycle = []
        for u, size in reversed(list(zip(unit_lists, sizes))):
            per_cycle.append(u[rem % size])
            rem = rem // size
        per_cycle.reverse()
        for cyc, fs, vals in zip(spec.cycles, spec.factor_specs, per_cycle):
            emb = embedding(fs.field, self.F)
            big = emb[vals]
            for k, i in enumerate(cyc):
                diag[:, i] = self.F.frob(big, k)
            factors.append(vals)
        self.diag = diag
        self.factors = factors
        self.order = total
        self.keys = self._key(diag)
        self._sort = np.argsort(self.keys)
        self._sorted = self.keys[self._sort]
        self.identity = int(self.index_of(np.broadcast_to(ring_one(self.r), (1, self.n, self.r)))[0])

    def _key(self, diag) -> np.ndarray:
        D = np.asarray(diag).reshape(len(diag), -1)
        key = np.zeros(len(D), dtype=np.int64)
        for c in range(D.shape[1]):
            key = key * self.F.size + D[:, c]
        return key

    def index_of(self, diag) -> np.ndarray:
        k = self._key(diag)
        pos = np.minimum(np.searchsorted(self._sorted, k), self.order - 1)
        return np.where(self._sorted[pos] == k, self._sort[pos], -1)

    def mul(self, i, j) -> np.ndarray:
        return self.index_of(ring_mul(self.F, self.diag[np.asarray(i)], self.diag[np.asarray(j)]))

    def matrices(self, idx=None) -> np.ndarray:
        D = self.diag if idx is None else self.diag[idx]
        out = np.zeros(D.shape[:-2] + (self.n, self.n, self.r), dtype=np.int64)
        out[..., np.arange(self.n), np.arange(self.n), :] = D
        return out

    def elem(self, i: int) -> "TorusElem":
        vals = tuple(TruncRingElem(fs, tuple(int(c) for c in f[i]))
                     for fs, f in zip(self.spec.factor_specs, self.factors))
        return TorusElem(self, vals)

    def group_indices(self, group: Group) -> np.ndarray:
        idx = group.index_of(self.matrices())
        if np.any(idx < 0):
            raise AssertionError("torus element missing from the group table")
        return idx

    def kernel_mask(self, level: int) -> np.ndarray:
        """Membership in (T^level)^{F'}: congruent to 1 mod pi^level."""
        return np.all(self.diag[..., :level] == ring_one(self.r)[:level], axis=(-2, -1))

    @functools.cached_property
    def weyl(self) -> "WeylRationalAction":
        return weyl_rational(self.group_spec)

    @functools.cached_property
    def weyl_perms(self) -> list[np.ndarray]:
        """Permutation of torus indices induced by conjugation with each Weyl element."""
        out = []
        for v in self.weyl.elements:
            vinv = np.argsort(v)
            idx = self.index_of(self.diag[:, vinv])
            if np.any(idx < 0):
                raise AssertionError("Weyl conjugation does not preserve T^{F'}")
            out.append(idx)
        return out


@dataclass(frozen=True)
class TorusElem:
    """Per-cycle units in the factor rings plus the diagonal avatar."""

    torus: Torus
    factors: tuple[TruncRingElem, ...]

    def avatar(self) -> GroupElem:
        T = self.torus
        mat = np.zeros((T.n, T.n, T.r), dtype=np.int64)
        for cyc, f in zip(T.spec.cycles, self.factors):
            big = embedding(f.spec.field, T.F)[np.array(f.coeffs)]
            for k, i in enumerate(cyc):
                mat[i, i] = T.F.frob(big, k)
        return GroupElem(T.group_spec, mat)


@functools.lru_cache(maxsize=None)
def _torus_cached(spec: TorusSpec) -> Torus:
    return Torus(spec)


def torus_points(spec: TorusSpec) -> Torus:
    return _torus_cached(spec)


# -- rational Weyl group ------------------------------------------------------------

@dataclass(frozen=True)
class WeylRationalAction:
    """W(T)^{F'} realized as permutation matrices commuting with the twist."""

    w: tuple[int, ...]
    generators: tuple[tuple[int, ...], ...]
    elements: tuple[tuple[int, ...], ...]   # identity first

    @property
    def order(self) -> int:
        return len(self.elements)

    def matrix(self, v, r: int) -> np.ndarray:
        n = len(v)
        mat = np.zeros((n, n, r), dtype=np.int64)
        for j in range(n):
            mat[v[j], j] = ring_one(r)
        return mat

    def expected_order(self) -> int:
        lengths = [len(c) for c in perm_cycles(self.w)]
        return math.prod(math.factorial(lengths.count(s)) * s ** lengths.count(s) for s in set(lengths))


def _compose(a, b):
    return tuple(a[b[i]] for i in range(len(a)))


def weyl_rational(spec: GroupSpec) -> WeylRationalAction:
    """Centralizer of w in S_n from cycle rotations and swaps of equal-length cycles."""
    n, w = spec.n, spec.w
    cycles = perm_cycles(w)
    gens = []
    for c in cycles:
        if len(c) > 1:
            v = list(range(n))
            for k, i in enumerate(c):
                v[i] = c[(k + 1) % len(c)]
            gens.append(tuple(v))
    for a in range(len(cycles)):
        for b in range(a + 1, len(cycles)):
            ca, cb = cycles[a], cycles[b]
            if len(ca) == len(cb):
                v = list(range(n))
                for x, y in zip(ca, cb):
                    v[x], v[y] = y, x
                gens.append(tuple(v))
                break
    ident = tuple(range(n))
    seen = [ident]
    known = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = _compose(s, g)
                if h not in known:
                    known.add(h)
                    seen.append(h)
                    nxt.append(h)
        frontier = nxt
    for v in seen:
        if _compose(v, w) != _compose(w, v):
            raise AssertionError("Weyl element does not commute with the twist")
    return WeylRationalAction(w=w, generators=tuple(gens), elements=tuple(seen))


def weyl_bruteforce(group: Group, torus: Torus) -> tuple[int, set]:
    """Oracle: |monomial elements of G^{F'}| / |T^{F'}| and the permutations they induce."""
    mono = group.elems[group.mask("monomial")]
    nz = np.any(mono != 0, axis=-1)           # (N, n, n)
    perms = {tuple(int(x) for x in np.argmax(nz[k], axis=0)) for k in range(len(mono))}
    if len(mono) % torus.order:
        raise AssertionError("monomial subgroup is not a union of torus cosets")
    return len(mono) // torus.order, perms


# -- root subtori, norms, regularity ---------------------------------------------------

def roots(n: int) -> list[tuple[int, int]]:
    """All ordered pairs (a, b), a != b: the roots e_a - e_b of the diagonal torus."""
    return [(a, b) for a in range(n) for b in range(n) if a != b]


@dataclass(frozen=True)
class RootSubtorusSpec:
    alpha: tuple[int, int]
    level: int

    def elements(self, F: FieldSpec, n: int, r: int) -> np.ndarray:
        """Diagonals 1 + pi^{r-1} x (E_aa - E_bb), x over all of F."""
        a, b = self.alpha
        xs = np.arange(F.size)
        D = np.broadcast_to(ring_one(r), (F.size, n, r)).copy()
        D[:, a, self.level] = F.add(D[:, a, self.level], xs)
        D[:, b, self.level] = F.sub(D[:, b, self.level], xs)
        return D


def twisted_frobenius_diag(F: FieldSpec, w, diag, k: int = 1):
    """F'^k on diagonals: entry i becomes F^k(t[w^{-k}(i)])."""
    D = np.asarray(diag)
    n = D.shape[-2]
    src = np.arange(n)
    winv = np.argsort(np.asarray(w))
    for _ in range(k):
        src = winv[src]
    return F.frob(D[..., src, :], k)


def norm_subgroup(torus: Torus, alpha, a: int | None = None) -> np.ndarray:
    """Sorted torus indices of N_{F'}^{F'^a}((T^alpha)^{F'^a}).

    ``a`` must be a multiple of ord(w); for a > ord(w) the computation runs in
    F_{q^a}[pi]/pi^r and the image is pulled back through the field embedding.
    """
    P = torus.group_spec
    d = P.d
    a = d if a is None else a
    if a % d:
        raise ValueError(f"a={a} must be a multiple of ord(w)={d} so that F'^a fixes every root")
    small = torus.F
    big = small if a == d else field_build(P.p, P.m, a)
    sub = RootSubtorusSpec(tuple(alpha), P.r - 1)
    D = sub.elements(big, P.n, P.r)
    acc = np.broadcast_to(ring_one(P.r), D.shape).copy()
    for k in range(a):
        acc = ring_mul(big, acc, twisted_frobenius_diag(big, P.w, D, k))
    if big is not small:
        back = embedding_inverse(small, big)[acc]
        if np.any(back < 0):
            raise AssertionError("norm left the F_{q^d} subring")
        acc = back
    idx = torus.index_of(acc)
    if np.any(idx < 0):
        raise AssertionError("norm image is not in T^{F'}")
    return np.unique(idx)


def _exps(theta) -> np.ndarray:
    return np.asarray(getattr(theta, "exponents", theta))


@functools.lru_cache(maxsize=None)
def _norm_images(spec: TorusSpec, a: int | None) -> tuple:
    T = torus_points(spec)
    return tuple(norm_subgroup(T, al, a) for al in roots(spec.parent.n))


def regular_mask(torus: Torus, exps: np.ndarray, a: int | None = None) -> np.ndarray:
    """Vectorized regularity over a stack of characters given as (K, |T|) exponent arrays."""
    exps = np.atleast_2d(exps)
    ok = np.ones(len(exps), dtype=bool)
    for img in _norm_images(torus.spec, a):
        ok &= np.any(exps[:, img] != 0, axis=1)
    return ok


def is_regular(theta, a: int | None = None) -> bool:
    """Nontrivial on the norm image of every root subtorus at level r-1."""
    return bool(regular_mask(theta.torus, _exps(theta)[None], a)[0])


def general_position_mask(torus: Torus, exps: np.ndarray) -> np.ndarray:
    exps = np.atleast_2d(exps)
    ok = np.ones(len(exps), dtype=bool)
    for perm in torus.weyl_perms[1:]:
        ok &= np.any(exps[:, perm] != exps, axis=1)
    return ok


def is_general_position(theta) -> bool:
    """No nontrivial element of W(T)^{F'} fixes theta."""
    return bool(general_position_mask(theta.torus, _exps(theta)[None])[0])
