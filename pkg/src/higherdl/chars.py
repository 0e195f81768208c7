"""Characters of T^{F'} and of the abelian kernel (G^l)^{F'}.

Values are roots of unity of a fixed order ``M`` and are stored as exponents.
Sums of them live in the group ring Z[Z/M] and are compared exactly after
reduction modulo the M-th cyclotomic polynomial.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import sympy

from .fieldtower import FieldSpec
from .torus import (Torus, TorusSpec, general_position_mask, regular_mask, torus_points)
from .truncring import ring_mul
from .twistgroup import Group, GroupSpec, enumerate_group, tu_decompose_batch


# -- cyclotomic arithmetic ---------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def cyclotomic_coeffs(M: int) -> tuple[int, ...]:
    """Coefficients of Phi_M, lowest degree first."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.cyclotomic_poly(M, x), x)
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


@functools.lru_cache(maxsize=None)
def reduction_matrix(M: int) -> np.ndarray:
    """(M, phi(M)) integer matrix sending x^k to its remainder mod Phi_M."""
    phi = cyclotomic_coeffs(M)
    deg = len(phi) - 1
    R = np.zeros((M, deg), dtype=np.int64)
    cur = np.zeros(deg, dtype=np.int64)
    if deg:
        cur[0] = 1
    for k in range(M):
        if k < deg:
            cur = np.zeros(deg, dtype=np.int64)
            cur[k] = 1
        else:
            lead = cur[-1]
            cur = np.concatenate([[0], cur[:-1]])
            cur = cur - lead * np.array(phi[:-1], dtype=np.int64)
        R[k] = cur
    return R


def reduce_cyclo(vec) -> np.ndarray:
    """Reduce group-ring vectors (..., M) to the power basis of Z[zeta_M]."""
    v = np.asarray(vec)
    M = v.shape[-1]
    if v.dtype == object:
        return np.asarray(v.dot(reduction_matrix(M).astype(object)))
    return v @ reduction_matrix(M)


def cyclo_to_complex(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.float64)
    M = v.shape[-1]
    return v @ np.exp(2j * np.pi * np.arange(M) / M)


@dataclass(frozen=True)
class CycloValue:
    """(1/den) * sum_e coeffs[e] zeta_M^e."""

    M: int
    coeffs: tuple[int, ...]
    den: int = 1

    @classmethod
    def root(cls, M: int, exponent: int) -> "CycloValue":
        c = [0] * M
        c[exponent % M] = 1
        return cls(M, tuple(c))

    @classmethod
    def from_vector(cls, vec, den: int = 1) -> "CycloValue":
        return cls(len(vec), tuple(int(x) for x in vec), int(den))

    def _lift(self, other: "CycloValue") -> "CycloValue":
        if other.M != self.M:
            raise ValueError("mismatched root-of-unity orders")
        return other

    def __add__(self, o: "CycloValue") -> "CycloValue":
        o = self._lift(o)
        a = np.array(self.coeffs, dtype=object) * o.den + np.array(o.coeffs, dtype=object) * self.den
        return CycloValue.from_vector(a, self.den * o.den)

    def __mul__(self, o: "CycloValue") -> "CycloValue":
        o = self._lift(o)
        out = [0] * self.M
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        out[(i + j) % self.M] += a * b
        return CycloValue(self.M, tuple(out), self.den * o.den)

    def conj(self) -> "CycloValue":
        c = self.coeffs
        return CycloValue(self.M, tuple(c[-k % self.M] for k in range(self.M)), self.den)

    def reduced(self) -> tuple[Fraction, ...]:
        red = reduce_cyclo(np.array(self.coeffs, dtype=object))
        return tuple(Fraction(int(x), self.den) for x in red)

    def is_zero(self) -> bool:
        return not any(self.reduced())

    def rational(self) -> Fraction | None:
        red = self.reduced()
        if any(red[1:]):
            return None
        return red[0] if red else Fraction(0)

    def is_algebraic_integer(self) -> bool:
        return all(x.denominator == 1 for x in self.reduced())

    def to_complex(self) -> complex:
        return complex(cyclo_to_complex(np.array(self.coeffs, dtype=np.float64))) / self.den


# -- abelian groups and their duals ----------------------------------------------------------

def _prime_factors(n: int) -> list[int]:
    return sorted(sympy.factorint(n))


@dataclass
class AbelianDual:
    """Basis of a finite abelian group given by an index-level multiplication.

    ``coords[x]`` holds the exponents of element ``x`` in the basis; characters
    are tuples ``a`` with ``theta(x) = zeta_M^{sum_i a_i coords[x, i] M / o_i}``.
    """

    order: int
    basis: list[int]
    orders: list[int]
    coords: np.ndarray
    p: int
    M: int = field(init=False)

    def __post_init__(self):
        exponent = math.lcm(1, *self.orders)
        self.M = math.lcm(exponent, self.p)

    @property
    def count(self) -> int:
        return math.prod(self.orders)

    def labels(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*[range(o) for o in self.orders]))

    def exponents(self, a) -> np.ndarray:
        scale = np.array([self.M // o for o in self.orders], dtype=np.int64)
        return (self.coords @ (np.asarray(a, dtype=np.int64) * scale)) % self.M

    def all_exponents(self) -> np.ndarray:
        """(count, order) exponent table, rows in label order."""
        A = np.array(self.labels(), dtype=np.int64).reshape(-1, len(self.orders))
        scale = np.array([self.M // o for o in self.orders], dtype=np.int64)
        return ((A * scale) @ self.coords.T) % self.M


def dual_group(mul: Callable[[np.ndarray, np.ndarray], np.ndarray], identity: int, order: int,
               p: int, check_abelian: bool = True) -> AbelianDual:
    """Basis by primary decomposition and greedy choice of maximal quotient order."""
    allx = np.arange(order)
    if check_abelian:
        rng = np.random.default_rng(0)
        a = rng.integers(order, size=min(4096, order * order))
        b = rng.integers(order, size=len(a))
        if np.any(mul(a, b) != mul(b, a)):
            raise ValueError("group is not abelian")

    # element orders by simultaneous powering
    elem_order = np.zeros(order, dtype=np.int64)
    cur = allx.copy()
    k = 1
    while np.any(elem_order == 0):
        done = (cur == identity) & (elem_order == 0)
        elem_order[done] = k
        cur = mul(cur, allx)
        k += 1
        if k > order + 1:
            raise AssertionError("element order computation did not terminate")

    def power(x: int, e: int) -> int:
        base = np.array([x])
        acc = np.array([identity])
        while e:
            if e & 1:
                acc = mul(acc, base)
            base = mul(base, base)
            e >>= 1
        return int(acc[0])

    basis: list[int] = []
    orders: list[int] = []
    for ell in _prime_factors(order):
        members = np.flatnonzero(_is_power_of(elem_order, ell))
        # H: current subgroup of the ell-part, as a map element -> coordinate tuple
        H = {identity: ()}
        local_basis: list[int] = []
        local_orders: list[int] = []
        while len(H) < len(members):
            best, best_o = -1, 0
            for x in members:
                x = int(x)
                if x in H:
                    continue
                o, y = 1, x
                while y not in H:
                    y = int(mul(np.array([y]), np.array([x]))[0])
                    o += 1
                if o > best_o:
                    best, best_o = x, o
            # adjust best by an element of H so that its order equals the quotient order
            z = power(best, best_o)
            zc = H[z]
            adj = identity
            for g, go, c in zip(local_basis, local_orders, zc):
                if c % best_o:
                    raise AssertionError("quotient order does not divide coordinate")
                adj = int(mul(np.array([adj]), np.array([power(g, (go - c // best_o) % go)]))[0])
            g_new = int(mul(np.array([best]), np.array([adj]))[0])
            if power(g_new, best_o) != identity:
                raise AssertionError("adjusted generator has the wrong order")
            newH = {}
            gp = identity
            for e in range(best_o):
                for h, hc in H.items():
                    newH[int(mul(np.array([h]), np.array([gp]))[0])] = hc + (e,)
                gp = int(mul(np.array([gp]), np.array([g_new]))[0])
            if len(newH) != len(H) * best_o:
                raise AssertionError("new generator is not independent")
            H = newH
            local_basis.append(g_new)
            local_orders.append(best_o)
        basis += local_basis
        orders += local_orders

    # coordinates of all elements from products of basis powers
    cur_idx = np.array([identity])
    cur_coord = np.zeros((1, 0), dtype=np.int64)
    for g, o in zip(basis, orders):
        pw = [identity]
        for _ in range(o - 1):
            pw.append(int(mul(np.array([pw[-1]]), np.array([g]))[0]))
        pw = np.array(pw)
        nxt = mul(np.repeat(cur_idx, o), np.tile(pw, len(cur_idx)))
        coord = np.concatenate([np.repeat(cur_coord, o, axis=0),
                                np.tile(np.arange(o), len(cur_idx))[:, None]], axis=1)
        cur_idx, cur_coord = nxt, coord
    if len(np.unique(cur_idx)) != order:
        raise AssertionError("basis does not factor every element uniquely")
    coords = np.zeros((order, len(basis)), dtype=np.int64)
    coords[cur_idx] = cur_coord
    return AbelianDual(order=order, basis=basis, orders=orders, coords=coords, p=p)


def _is_power_of(values: np.ndarray, ell: int) -> np.ndarray:
    v = values.copy()
    while True:
        div = (v % ell == 0) & (v > 1)
        if not div.any():
            break
        v[div] //= ell
    return v == 1


@functools.lru_cache(maxsize=None)
def torus_dual(spec: TorusSpec) -> AbelianDual:
    T = torus_points(spec)
    return dual_group(T.mul, T.identity, T.order, spec.parent.p)


# -- the additive character psi ------------------------------------------------------------

@dataclass(frozen=True)
class PsiSpec:
    """psi(x) = zeta_p^{Tr_{F_q/F_p}(coefficient of pi^{l-1} in x)} on O_l."""

    field: FieldSpec
    l: int

    def exponent(self, x) -> np.ndarray:
        """Exponent in Z/p for values x of shape (..., l) lying in F_q[pi]/pi^l."""
        x = np.asarray(x)
        top = x[..., self.l - 1]
        return self.field.trace(top, target="p", source="q") % self.field.p


def psi_beta_exponents(spec: GroupSpec, beta, X) -> np.ndarray:
    """Exponents mod p of psi(Tr(beta X)) for X of shape (..., n, n, l)."""
    F = spec.field
    beta = np.asarray(beta)
    X = np.asarray(X)
    l = beta.shape[-1]
    n = spec.n
    acc = np.zeros(X.shape[:-3] + (l,), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if np.any(beta[i, j]):
                acc = F.add(acc, ring_mul(F, beta[i, j], X[..., j, i, :]))
    return PsiSpec(F, l).exponent(acc)


@dataclass(frozen=True)
class BetaParam:
    """A twisted-diagonal matrix over O_l, stored as its diagonal (n, l)."""

    spec: GroupSpec
    diag: tuple[tuple[int, ...], ...]

    @classmethod
    def from_diag(cls, spec: GroupSpec, diag) -> "BetaParam":
        return cls(spec, tuple(tuple(int(c) for c in row) for row in np.asarray(diag)))

    @property
    def l(self) -> int:
        return len(self.diag[0])

    def matrix(self) -> np.ndarray:
        n = self.spec.n
        out = np.zeros((n, n, self.l), dtype=np.int64)
        out[np.arange(n), np.arange(n)] = np.array(self.diag)
        return out

    def is_zero(self) -> bool:
        return not any(any(row) for row in self.diag)

    def fmt(self) -> list[str]:
        F = self.spec.field
        out = []
        for row in self.diag:
            terms = [F.fmt(c) + ("" if k == 0 else f"*pi^{k}") for k, c in enumerate(row) if c]
            out.append(" + ".join(terms) if terms else "0")
        return out


def psi_beta(beta: BetaParam, X) -> "CycloValue":
    """psi_beta(X) for a single X in M_n(O_l) (twisted model) as a p-th root of unity."""
    X = np.asarray(X)
    if X.shape != (beta.spec.n, beta.spec.n, beta.l):
        raise ValueError("shape mismatch between beta and X")
    e = int(psi_beta_exponents(beta.spec, beta.matrix(), X))
    return CycloValue.root(beta.spec.p, e)


# -- characters of the torus -------------------------------------------------------------------

@dataclass(frozen=True)
class CharacterOfT:
    spec: TorusSpec
    coords: tuple[int, ...]

    @property
    def torus(self) -> Torus:
        return torus_points(self.spec)

    @property
    def dual(self) -> AbelianDual:
        return torus_dual(self.spec)

    @property
    def M(self) -> int:
        return self.dual.M

    @functools.cached_property
    def exponents(self) -> np.ndarray:
        return self.dual.exponents(self.coords)

    def value(self, t: int) -> CycloValue:
        return CycloValue.root(self.M, int(self.exponents[t]))

    @functools.cached_property
    def beta(self) -> BetaParam:
        return extract_beta(self)

    def label(self) -> str:
        return ",".join(map(str, self.coords))


def all_characters(spec: TorusSpec) -> list[CharacterOfT]:
    return [CharacterOfT(spec, a) for a in torus_dual(spec).labels()]


def character_from_exponents(spec: TorusSpec, exps) -> CharacterOfT:
    """The character whose exponent table (mod M) equals ``exps``."""
    D = torus_dual(spec)
    exps = np.asarray(exps) % D.M
    coords = []
    for g, o in zip(D.basis, D.orders):
        e = int(exps[g])
        if e % (D.M // o):
            raise ValueError("values are not a character of the torus")
        coords.append(e // (D.M // o))
    chi = CharacterOfT(spec, tuple(coords))
    if not np.array_equal(chi.exponents, exps):
        raise ValueError("values are not a character of the torus")
    return chi


def check_homomorphism(chi: CharacterOfT, samples: int = 256, seed: int = 0) -> bool:
    T = chi.torus
    rng = np.random.default_rng(seed)
    a = rng.integers(T.order, size=samples)
    b = rng.integers(T.order, size=samples)
    e = chi.exponents
    return bool(np.all(e[T.mul(a, b)] == (e[a] + e[b]) % chi.M))


# -- beta extraction --------------------------------------------------------------------------

def solve_mod_p(A: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Unique solution of A x = b over F_p for square invertible A."""
    A = np.array(A, dtype=np.int64) % p
    b = np.array(b, dtype=np.int64) % p
    n = len(A)
    aug = np.concatenate([A, b[:, None]], axis=1)
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r, col]), None)
        if piv is None:
            raise ArithmeticError("pairing matrix is singular")
        aug[[col, piv]] = aug[[piv, col]]
        aug[col] = (aug[col] * pow(int(aug[col, col]), -1, p)) % p
        for r in range(n):
            if r != col and aug[r, col]:
                aug[r] = (aug[r] - aug[r, col] * aug[col]) % p
    return aug[:, n]


def twisted_diag_basis(spec: GroupSpec, l: int) -> np.ndarray:
    """F_p-basis of the F'-fixed diagonal matrices over O_l, as (D, n, l) diagonals."""
    F = spec.field
    out = []
    for cyc in spec.cycles:
        s = len(cyc)
        for b in F.subfield_basis(spec.m * s):
            for j in range(l):
                D = np.zeros((spec.n, l), dtype=np.int64)
                for k, i in enumerate(cyc):
                    D[i, j] = F.frob(np.int64(b), k)
                out.append(D)
    return np.array(out)


def _pairing(spec: GroupSpec, beta_diag, d_diag) -> np.ndarray:
    """psi(Tr(beta d)) exponents mod p for diagonal arguments."""
    F = spec.field
    l = np.asarray(beta_diag).shape[-1]
    acc = ring_mul(F, beta_diag[..., 0, :], d_diag[..., 0, :])
    for i in range(1, spec.n):
        acc = F.add(acc, ring_mul(F, beta_diag[..., i, :], d_diag[..., i, :]))
    return PsiSpec(F, l).exponent(acc)


def level_subtorus(torus: Torus, l: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices of (T^l)^{F'} and the d with t = 1 + pi^l d, d over O_{r-l}."""
    idx = np.flatnonzero(torus.kernel_mask(l))
    if l < 1:
        raise ValueError("level must be positive")
    return idx, torus.diag[idx][..., l:].copy()


def extract_beta(theta: CharacterOfT) -> BetaParam:
    """The diagonal beta in t_l^{F'} with theta(1 + pi^l d) = psi(Tr(beta d))."""
    spec = theta.spec.parent
    l = spec.l
    p = spec.p
    T = theta.torus
    idx, d = level_subtorus(T, l)
    e = theta.exponents[idx]
    step = theta.M // p
    if np.any(e % step):
        raise AssertionError("theta is not p-torsion on the level-l subtorus")
    vals = (e // step) % p
    basis = twisted_diag_basis(spec, l)
    # d-side basis: the same vectors, located in the table through 1 + pi^l d
    pos = {tuple(row.ravel()): k for k, row in enumerate(d)}
    cols = []
    for D in basis:
        key = tuple(D.ravel())
        if key not in pos:
            raise AssertionError("basis vector missing from the level-l subtorus")
        cols.append(pos[key])
    P = np.array([[_pairing(spec, Bi, Dj) for Dj in basis] for Bi in basis], dtype=np.int64)
    c = solve_mod_p(P.T, vals[cols], p)
    beta = np.zeros((spec.n, l), dtype=np.int64)
    for ci, Bi in zip(c, basis):
        for _ in range(int(ci)):
            beta = spec.field.add(beta, Bi)
    if not np.array_equal(_pairing(spec, beta[None], d), vals):
        raise AssertionError("extracted beta does not reproduce theta on (T^l)^{F'}")
    return BetaParam.from_diag(spec, beta)


def beta_bruteforce(theta: CharacterOfT) -> list[BetaParam]:
    """Oracle: every twisted-diagonal beta matching theta on (T^l)^{F'}."""
    spec = theta.spec.parent
    l = spec.l
    T = theta.torus
    idx, d = level_subtorus(T, l)
    vals = (theta.exponents[idx] // (theta.M // spec.p)) % spec.p
    out = []
    for D in d:   # the twisted diagonals over O_l are exactly the d-values
        if np.array_equal(_pairing(spec, D[None], d), vals):
            out.append(BetaParam.from_diag(spec, D))
    return out


# -- trivial lift and genericity ---------------------------------------------------------------

def trivial_lift(theta: CharacterOfT, group: Group, members: np.ndarray | None = None) -> np.ndarray:
    """Exponents of theta~(g) = theta(diag g) on (TU^±)^{F'}; -1 outside the subgroup."""
    if members is None:
        members = group.subgroup("torus_times_radical")
    tidx = _torus_parts(theta.torus, group, members)
    out = np.full(group.order, -1, dtype=np.int64)
    out[members] = theta.exponents[tidx]
    return out


def _torus_parts(torus: Torus, group: Group, members: np.ndarray) -> np.ndarray:
    """Torus indices of diag(g) for g in (TU^±)^{F'}, cached on the group."""
    cache = group.__dict__.setdefault("_tu_parts", {})
    key = (id(torus), members.tobytes())
    if key not in cache:
        diag, _ = tu_decompose_batch(group.spec, group.elems[members])
        tidx = torus.index_of(diag)
        if np.any(tidx < 0):
            raise AssertionError("torus part of an element missing from T^{F'}")
        cache[key] = tidx
    return cache[key]


@functools.lru_cache(maxsize=None)
def _level_group(spec: GroupSpec) -> Group:
    return enumerate_group(spec)


def centralizer_order(spec: GroupSpec, beta: BetaParam) -> int:
    """|C_{G_l^{F'}}(beta)| by scanning the level-l group."""
    Gl = _level_group(spec.at_level(beta.l))
    F = spec.field
    E = Gl.elems
    b = np.array(beta.diag)
    ok = np.ones(Gl.order, dtype=bool)
    for i in range(spec.n):
        for j in range(spec.n):
            if i != j:
                diff = F.sub(b[j], b[i])
                ok &= np.all(ring_mul(F, E[:, i, j], diff) == 0, axis=-1)
    return int(ok.sum())


def stabilizer_condition(spec: GroupSpec, beta: BetaParam) -> bool:
    return centralizer_order(spec, beta) == TorusSpec(spec).closed_form_order(beta.l)


@dataclass(frozen=True)
class GenericReport:
    regular: bool
    general_position: bool
    stabilizer: bool

    @property
    def generic(self) -> bool:
        return self.regular and self.general_position and self.stabilizer


def is_generic(theta: CharacterOfT) -> tuple[bool, GenericReport]:
    T = theta.torus
    rep = GenericReport(
        regular=bool(regular_mask(T, theta.exponents[None])[0]),
        general_position=bool(general_position_mask(T, theta.exponents[None])[0]),
        stabilizer=stabilizer_condition(theta.spec.parent, theta.beta),
    )
    return rep.generic, rep


@dataclass
class CharacterScan:
    characters: list[CharacterOfT]
    regular: np.ndarray
    general_position: np.ndarray
    stabilizer: np.ndarray

    @property
    def generic(self) -> np.ndarray:
        return self.regular & self.general_position & self.stabilizer


def scan_characters(spec: TorusSpec) -> CharacterScan:
    """All three genericity conditions for every character of T^{F'}."""
    chars = all_characters(spec)
    T = torus_points(spec)
    E = torus_dual(spec).all_exponents()
    stab_cache: dict = {}
    stab = np.zeros(len(chars), dtype=bool)
    for k, chi in enumerate(chars):
        b = chi.beta
        if b not in stab_cache:
            stab_cache[b] = stabilizer_condition(spec.parent, b)
        stab[k] = stab_cache[b]
    return CharacterScan(chars, regular_mask(T, E), general_position_mask(T, E), stab)
