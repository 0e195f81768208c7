"""Class functions on G^{F'}: induction, inner products, reciprocity and Mackey sums.

A class function is a ``(C, M)`` integer matrix ``num`` and a denominator:
the value on class ``c`` is ``(1/den) * sum_e num[c, e] zeta_M^e``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chars import (CharacterOfT, CycloValue, cyclo_to_complex, is_generic, reduce_cyclo,
                    reduction_matrix, trivial_lift)
from .torus import TorusSpec
from .twistgroup import Group, _components, mat_mul, subgroup_generators

NUMERIC_TOL = 1e-6
_INT64_SAFE = 1 << 62


class NumericResidualError(AssertionError):
    """A numeric inner product is not close to a multiple of 1/|G|."""


class NotGenericError(ValueError):
    pass


# -- characters of subgroups ----------------------------------------------------------------

@dataclass
class SubgroupCharacter:
    """A linear character of a subgroup H, as exponents mod M indexed by G (-1 off H)."""

    group: Group
    members: np.ndarray
    exps: np.ndarray
    M: int

    @property
    def order(self) -> int:
        return len(self.members)

    def check_homomorphism(self, samples: int = 512, seed: int = 0) -> bool:
        G = self.group
        rng = np.random.default_rng(seed)
        a = self.members[rng.integers(self.order, size=samples)]
        b = self.members[rng.integers(self.order, size=samples)]
        ab = G.index_of(mat_mul(G.F, G.elems[a], G.elems[b]))
        if np.any(self.exps[ab] < 0):
            return False
        return bool(np.all(self.exps[ab] == (self.exps[a] + self.exps[b]) % self.M))

    def lifted(self, M: int) -> "SubgroupCharacter":
        if M % self.M:
            raise ValueError("target order must be a multiple")
        e = np.where(self.exps >= 0, self.exps * (M // self.M), -1)
        return SubgroupCharacter(self.group, self.members, e, M)


def torus_lift(theta: CharacterOfT, group: Group) -> SubgroupCharacter:
    """theta~ on (TU^±)^{F'}."""
    members = group.subgroup("torus_times_radical")
    return SubgroupCharacter(group, members, trivial_lift(theta, group, members), theta.M)


def borel_lift(theta: CharacterOfT, group: Group) -> SubgroupCharacter:
    """Pull-back of a split-torus character through B^{F'} -> T^{F'}."""
    if any(len(c) != 1 for c in group.spec.cycles):
        raise ValueError("Borel lift needs the split torus")
    members = group.subgroup("borel")
    n = group.spec.n
    diag = group.elems[members][:, np.arange(n), np.arange(n), :]
    tidx = theta.torus.index_of(diag)
    exps = np.full(group.order, -1, dtype=np.int64)
    exps[members] = theta.exponents[tidx]
    return SubgroupCharacter(group, members, exps, theta.M)


# -- class functions -----------------------------------------------------------------------

def _lift_vectors(num: np.ndarray, M: int) -> np.ndarray:
    m = num.shape[-1]
    if m == M:
        return num
    out = np.zeros(num.shape[:-1] + (M,), dtype=num.dtype)
    out[..., :: M // m] = num
    return out


@dataclass
class ClassFunction:
    group: Group
    num: np.ndarray
    den: int

    @property
    def M(self) -> int:
        return self.num.shape[-1]

    @classmethod
    def trivial(cls, group: Group, M: int = 1) -> "ClassFunction":
        num = np.zeros((group.classes().count, M), dtype=np.int64)
        num[:, 0] = 1
        return cls(group, num, 1)

    def value(self, c: int) -> CycloValue:
        return CycloValue.from_vector(self.num[c], self.den)

    def values_complex(self) -> np.ndarray:
        return cyclo_to_complex(self.num) / self.den

    @property
    def degree(self) -> Fraction:
        c = int(self.group.classes().class_of[self.group.identity])
        val = self.value(c).rational()
        if val is None:
            raise AssertionError("value at the identity is not rational")
        return val

    def is_integral(self) -> bool:
        """All values algebraic integers (reduced coordinates divisible by den)."""
        num = self.num
        if int(np.abs(num).max(initial=0)) * self.M * int(np.abs(reduction_matrix(self.M)).max()) \
                >= _INT64_SAFE:
            num = num.astype(object)
        red = np.asarray(reduce_cyclo(num))
        return bool(np.all(red % self.den == 0))

    def lifted(self, M: int) -> "ClassFunction":
        return ClassFunction(self.group, _lift_vectors(self.num, M), self.den)


def induce(chi: SubgroupCharacter) -> ClassFunction:
    """Ind_H^G chi by class fusion: (|C_G(g)|/|H|) * sum of chi over H meeting the class of g."""
    G = chi.group
    ct = G.classes()
    counts = np.zeros((ct.count, chi.M), dtype=np.int64)
    np.add.at(counts, (ct.class_of[chi.members], chi.exps[chi.members]), 1)
    cent = G.order // ct.sizes
    num = counts * cent[:, None]
    den = chi.order
    g = math.gcd(den, int(np.gcd.reduce(num.ravel())))
    return ClassFunction(G, num // g, den // g)


def induce_literal(chi: SubgroupCharacter) -> ClassFunction:
    """Oracle: (1/|H|) sum over all x in G of chi(x g x^{-1}) at every class representative."""
    G = chi.group
    ct = G.classes()
    inv = G.inverse_indices()
    num = np.zeros((ct.count, chi.M), dtype=np.int64)
    for c, rep in enumerate(ct.reps):
        g = G.elems[rep]
        conj = G.index_of(mat_mul(G.F, mat_mul(G.F, G.elems, g[None]), G.elems[inv]))
        e = chi.exps[conj]
        e = e[e >= 0]
        num[c] = np.bincount(e, minlength=chi.M)
    return ClassFunction(G, num, chi.order)


def restrict(f: ClassFunction, members: np.ndarray) -> np.ndarray:
    """Per-element group-ring values of f on the subgroup, shape (|H|, M), over den f.den."""
    return f.num[f.group.classes().class_of[members]]


# -- inner products --------------------------------------------------------------------------

@dataclass(frozen=True)
class Pairing:
    value: Fraction
    numeric: complex | None = None
    residual: float | None = None

    def as_pair(self) -> tuple[int, int]:
        return self.value.numerator, self.value.denominator


def _cyclic_correlation(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """S[k] = sum_c sum_e A[c, e] B[c, e - k]: the group-ring vector of sum A * conj(B)."""
    M = A.shape[-1]
    ca, ea = np.nonzero(A)
    cb, eb = np.nonzero(B)          # row-major, so cb is sorted
    lo = np.searchsorted(cb, ca, side="left")
    hi = np.searchsorted(cb, ca, side="right")
    cnt = hi - lo
    ia = np.repeat(np.arange(len(ca)), cnt)
    ib = np.repeat(lo - np.cumsum(cnt) + cnt, cnt) + np.arange(int(cnt.sum()))
    k = (ea[ia] - eb[ib]) % M
    S = np.zeros(M, dtype=A.dtype)
    np.add.at(S, k, A[ca[ia], ea[ia]] * B[cb[ib], eb[ib]])
    return S


def _needs_object(A: np.ndarray, B: np.ndarray) -> bool:
    if A.dtype == object or B.dtype == object:
        return True
    a = float(np.abs(A).sum(dtype=np.float64))
    b = float(np.abs(B).sum(axis=1, dtype=np.float64).max(initial=0.0))
    return a * b >= _INT64_SAFE / 4


def _exact_from_sum(S: np.ndarray, scale: int) -> Fraction:
    red = np.asarray(reduce_cyclo(S.astype(object)))
    if any(int(x) for x in red[1:]):
        raise AssertionError("inner product is not rational")
    return Fraction(int(red[0]), scale)


def _numeric_round(z: complex, denom: int) -> tuple[Fraction, float]:
    k = round(z.real * denom)
    residual = abs(z - k / denom)
    if residual >= NUMERIC_TOL:
        raise NumericResidualError(f"numeric inner product {z} has residual {residual:.3g}")
    return Fraction(k, denom), residual


def weighted_pairing(weights: np.ndarray, num1: np.ndarray, num2: np.ndarray, scale: int,
                     mode: str = "exact") -> Pairing:
    """(1/scale) * sum_c weights[c] v1[c] conj(v2[c]) with v = num vectors."""
    M = math.lcm(num1.shape[-1], num2.shape[-1])
    A = _lift_vectors(num1, M) * np.asarray(weights)[:, None]
    B = _lift_vectors(num2, M)
    exact = numeric = residual = None
    if mode in ("exact", "both"):
        if _needs_object(A, B):
            A, B = A.astype(object), B.astype(object)
        exact = _exact_from_sum(_cyclic_correlation(A, B), scale)
    if mode in ("numeric", "both"):
        zeta = np.exp(2j * np.pi * np.arange(M) / M)
        v1 = _lift_vectors(num1, M).astype(np.float64) @ zeta
        v2 = _lift_vectors(num2, M).astype(np.float64) @ zeta
        terms = np.asarray(weights, dtype=np.float64) * v1 * np.conj(v2)
        z = complex(np.sum(terms)) / scale
        rounded, residual = _numeric_round(z, scale)
        numeric = z
        if exact is not None and rounded != exact:
            raise AssertionError(f"exact {exact} and numeric {z} inner products disagree")
        exact = rounded if exact is None else exact
    if exact is None:
        raise ValueError(f"unknown mode {mode!r}")
    return Pairing(exact, numeric, residual)


def inner_product(f1: ClassFunction, f2: ClassFunction, mode: str = "exact") -> Pairing:
    """<f1, f2>_G = (1/|G|) sum over classes of |c| f1 conj(f2)."""
    if f1.group is not f2.group:
        raise ValueError("class functions on different groups")
    G = f1.group
    sizes = G.classes().sizes
    return weighted_pairing(sizes, f1.num, f2.num, G.order * f1.den * f2.den, mode)


def subgroup_inner_product(chi: SubgroupCharacter, values: np.ndarray, den: int,
                           mode: str = "exact") -> Pairing:
    """<chi, f>_H for f given per element of H as group-ring rows over ``den``."""
    M = math.lcm(chi.M, values.shape[-1])
    e = chi.exps[chi.members] * (M // chi.M)
    rows = np.zeros((chi.order, M), dtype=np.int64)
    rows[np.arange(chi.order), e] = 1
    return weighted_pairing(np.ones(chi.order, dtype=np.int64), rows,
                            _lift_vectors(values, M), chi.order * den, mode)


def frobenius_reciprocity_check(chi: SubgroupCharacter, psi: ClassFunction,
                                mode: str = "exact") -> tuple[Pairing, Pairing, bool]:
    """<Ind chi, psi>_G against <chi, Res psi>_H (the latter summed element by element)."""
    lhs = inner_product(induce(chi), psi, mode)
    rhs = subgroup_inner_product(chi, restrict(psi, chi.members), psi.den, mode)
    return lhs, rhs, lhs.value == rhs.value


# -- Mackey -----------------------------------------------------------------------------------

@dataclass
class DoubleCosets:
    """H\\G/K with, for each representative s, I_s = {k in K : s k s^{-1} in H}."""

    group: Group
    H: np.ndarray
    K: np.ndarray
    reps: np.ndarray
    sizes: np.ndarray
    inter: list[np.ndarray]        # k indices in I_s
    conj: list[np.ndarray]         # indices of s k s^{-1}

    @property
    def count(self) -> int:
        return len(self.reps)


def double_cosets(group: Group, H: np.ndarray, K: np.ndarray, seed: int = 0) -> DoubleCosets:
    perms = [group.mul_left(group.elems[h]) for h in subgroup_generators(group, H, seed)]
    perms += [group.mul_right(group.elems[k]) for k in subgroup_generators(group, K, seed)]
    labels = _components(group.order, perms)
    first = np.full(labels.max() + 1, group.order, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(group.order))
    reps = np.sort(first)
    sizes = np.bincount(labels)[labels[reps]]
    in_h = np.zeros(group.order, dtype=bool)
    in_h[H] = True
    inter, conj = [], []
    for s in reps:
        img = group.conj_by(group.elems[s], K)
        keep = in_h[img]
        inter.append(K[keep])
        conj.append(img[keep])
    dc = DoubleCosets(group, H, K, reps, sizes, inter, conj)
    for sz, I in zip(sizes, inter):
        if sz * len(I) != len(H) * len(K):
            raise AssertionError("double coset size does not match |H||K|/|H^s ∩ K|")
    return dc


def mackey_pairing(chi: SubgroupCharacter, psi: SubgroupCharacter,
                   dc: DoubleCosets | None = None) -> Fraction:
    """sum_s <chi^s, psi>_{I_s}, evaluated exactly for linear characters."""
    G = chi.group
    if dc is None:
        dc = double_cosets(G, chi.members, psi.members)
    M = math.lcm(chi.M, psi.M)
    a, b = chi.lifted(M), psi.lifted(M)
    total = Fraction(0)
    for I, J in zip(dc.inter, dc.conj):
        diff = (a.exps[J] - b.exps[I]) % M
        S = np.bincount(diff, minlength=M)
        total += _exact_from_sum(S, len(I))
    return total


def mackey_gram(chis: list[SubgroupCharacter], psis: list[SubgroupCharacter],
                dc: DoubleCosets) -> np.ndarray:
    """Mackey sums for all pairs: a term is 1 exactly when chi^s and psi agree on I_s."""
    M = math.lcm(*[c.M for c in chis], *[c.M for c in psis])
    E1 = np.array([c.lifted(M).exps for c in chis])
    E2 = np.array([c.lifted(M).exps for c in psis])
    out = np.zeros((len(chis), len(psis)), dtype=np.int64)
    for I, J in zip(dc.inter, dc.conj):
        left = E1[:, J]
        right = E2[:, I]
        buckets: dict[bytes, list[int]] = {}
        for j, row in enumerate(right):
            buckets.setdefault(row.tobytes(), []).append(j)
        for i, row in enumerate(left):
            for j in buckets.get(row.tobytes(), ()):
                out[i, j] += 1
    return out


# -- the main theorem --------------------------------------------------------------------------

@dataclass(frozen=True)
class MainTheoremReport:
    theta: tuple[int, ...]
    beta: tuple[str, ...]
    degree: Fraction
    target: Fraction
    norm: Fraction
    integral: bool
    numeric_residual: float | None

    @property
    def degree_ok(self) -> bool:
        return self.degree == self.target

    @property
    def norm_ok(self) -> bool:
        return self.norm == 1

    @property
    def passed(self) -> bool:
        return self.degree_ok and self.norm_ok and self.integral


def degree_target(spec: TorusSpec) -> Fraction:
    """|G_l^{F'}| / |T_l^{F'}|."""
    P = spec.parent
    l = P.l
    return Fraction(P.at_level(l).closed_form_order(), spec.closed_form_order(l))


def verify_main_theorem(group: Group, theta: CharacterOfT, mode: str = "exact",
                        require_generic: bool = True) -> MainTheoremReport:
    if require_generic and not is_generic(theta)[0]:
        raise NotGenericError(f"theta {theta.coords} is not generic")
    R = induce(torus_lift(theta, group))
    norm = inner_product(R, R, mode)
    return MainTheoremReport(theta=theta.coords, beta=tuple(theta.beta.fmt()), degree=R.degree,
                             target=degree_target(theta.spec), norm=norm.value,
                             integral=R.is_integral(), numeric_residual=norm.residual)
