"""Truncated valuation rings O_{d,r} = F_{q^d}[pi]/pi^r.

Batch kernels operate on integer arrays whose last axis holds the ``r``
coefficients (coefficient of pi^i at index i), each an encoded element of the
underlying :class:`~higherdl.fieldtower.FieldSpec`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fieldtower import FieldSpec


# -- batch kernels --------------------------------------------------------------

def ring_add(F: FieldSpec, a, b):
    return F.add(a, b)


def ring_neg(F: FieldSpec, a):
    return F.neg(a)


def ring_sub(F: FieldSpec, a, b):
    return F.sub(a, b)


def ring_mul(F: FieldSpec, a, b):
    """Truncated product; the coefficient axis is the last one."""
    a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
    r = a.shape[-1]
    out = np.zeros(a.shape, dtype=np.int64)
    for i in range(r):
        ai = a[..., i]
        for j in range(r - i):
            out[..., i + j] = F.add(out[..., i + j], F.mul(ai, b[..., j]))
    return out


def ring_frob(F: FieldSpec, a, k: int = 1):
    return F.frob(a, k)


def ring_is_unit(a) -> np.ndarray:
    return np.asarray(a)[..., 0] != 0


def ring_inv(F: FieldSpec, a):
    """Inverse of units by Newton iteration x <- x(2 - a x) from the residue inverse."""
    a = np.asarray(a)
    if np.any(a[..., 0] == 0):
        raise ZeroDivisionError("inverting a non-unit of the truncated ring")
    r = a.shape[-1]
    x = np.zeros_like(a, dtype=np.int64)
    x[..., 0] = F.inv(a[..., 0])
    two = np.zeros(r, dtype=np.int64)
    two[0] = F.scalar(2)
    prec = 1
    while prec < r:
        x = ring_mul(F, x, ring_sub(F, two, ring_mul(F, a, x)))
        prec *= 2
    return x


def ring_one(r: int) -> np.ndarray:
    one = np.zeros(r, dtype=np.int64)
    one[0] = 1
    return one


# -- ring spec and elements -----------------------------------------------------

@dataclass(frozen=True)
class RingSpec:
    field: FieldSpec
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("level r must be >= 1")

    @property
    def size(self) -> int:
        return self.field.size**self.r

    @property
    def unit_count(self) -> int:
        Q = self.field.size
        return (Q - 1) * Q ** (self.r - 1)

    def elements(self, coeff_values: np.ndarray | None = None) -> np.ndarray:
        """All elements (lex order on coefficients, pi^0 most significant).

        ``coeff_values`` restricts each coefficient to a subset (e.g. a subfield).
        """
        vals = np.arange(self.field.size) if coeff_values is None else np.asarray(coeff_values)
        grids = np.meshgrid(*([vals] * self.r), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1).astype(np.int64)

    def units(self, coeff_values: np.ndarray | None = None) -> np.ndarray:
        el = self.elements(coeff_values)
        return el[el[:, 0] != 0]

    def elem(self, coeffs: Sequence[int]) -> "TruncRingElem":
        return TruncRingElem(self, tuple(int(c) for c in coeffs))

    def one(self) -> "TruncRingElem":
        return self.elem(ring_one(self.r))

    def zero(self) -> "TruncRingElem":
        return self.elem([0] * self.r)

    def pi(self) -> "TruncRingElem":
        c = [0] * self.r
        if self.r > 1:
            c[1] = 1
        return self.elem(c)


@dataclass(frozen=True)
class TruncRingElem:
    spec: RingSpec
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.spec.r:
            raise ValueError(f"expected {self.spec.r} coefficients, got {len(self.coeffs)}")

    @property
    def F(self) -> FieldSpec:
        return self.spec.field

    def _arr(self):
        return np.array(self.coeffs, dtype=np.int64)

    def _wrap(self, arr) -> "TruncRingElem":
        return TruncRingElem(self.spec, tuple(int(c) for c in arr))

    def _other(self, o) -> np.ndarray:
        if isinstance(o, TruncRingElem):
            if o.spec != self.spec:
                raise ValueError("ring mismatch")
            return o._arr()
        out = np.zeros(self.spec.r, dtype=np.int64)
        out[0] = self.F.scalar(int(o))
        return out

    def __add__(self, o):
        return self._wrap(ring_add(self.F, self._arr(), self._other(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return self._wrap(ring_sub(self.F, self._arr(), self._other(o)))

    def __rsub__(self, o):
        return self._wrap(ring_sub(self.F, self._other(o), self._arr()))

    def __neg__(self):
        return self._wrap(ring_neg(self.F, self._arr()))

    def __mul__(self, o):
        return self._wrap(ring_mul(self.F, self._arr(), self._other(o)))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        out, base = self.spec.one(), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def inv(self) -> "TruncRingElem":
        if not self.is_unit():
            raise ZeroDivisionError("inverting a non-unit")
        return self._wrap(ring_inv(self.F, self._arr()))

    def valuation(self) -> int:
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return self.spec.r

    def __repr__(self):
        F = self.F
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                mono = "" if i == 0 else ("pi" if i == 1 else f"pi^{i}")
                val = F.fmt(c)
                terms.append(val if not mono else (mono if val == "1" else f"({val}){mono}"))
        return " + ".join(terms) if terms else "0"


def ring_frobenius(a: TruncRingElem, k: int = 1) -> TruncRingElem:
    """Coefficientwise q^k-power Frobenius."""
    return a._wrap(ring_frob(a.F, a._arr(), k))


def reduce_level(a: TruncRingElem, i: int) -> TruncRingElem:
    """Reduction modulo pi^i."""
    if not 1 <= i <= a.spec.r:
        raise ValueError(f"level {i} outside 1..{a.spec.r}")
    return TruncRingElem(RingSpec(a.spec.field, i), a.coeffs[:i])


def norm_map(t: TruncRingElem, a: int, twist: Sequence[int] | None = None) -> TruncRingElem:
    """Twisted norm t * F^{s_1}(t) * ... * F^{s_{a-1}}(t).

    ``twist`` lists the Frobenius power applied at each of the ``a`` steps;
    the default ``0, 1, ..., a-1`` is the plain norm t F(t) ... F^{a-1}(t).
    """
    if not t.is_unit():
        raise ValueError("norm of a non-unit")
    powers = list(range(a)) if twist is None else list(twist)
    if len(powers) != a:
        raise ValueError("twist schedule must have one entry per step")
    out = t.spec.one()
    for s in powers:
        out = out * ring_frobenius(t, s)
    return out


def all_units(spec: RingSpec) -> list[TruncRingElem]:
    return [spec.elem(c) for c in spec.units()]


def iter_elements(spec: RingSpec):
    for c in itertools.product(range(spec.field.size), repeat=spec.r):
        yield spec.elem(c)
