"""Finite fields F_p <= F_q <= F_{q^d} with table-driven arithmetic.

Elements are encoded as integers ``0 <= v < p**(m*d)`` whose base-``p`` digits
are the coefficients of the polynomial representative modulo the chosen
irreducible ``modulus`` (constant term first).  All vectorized helpers accept
and return integer numpy arrays in this encoding.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sympy import factorint, isprime

MAX_FIELD_SIZE = 2**20
_TABLE_LIMIT = 1024  # full Q x Q add/mul tables below this size


# -- polynomials over F_p, coefficient lists, constant term first -------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a = _poly_trim(list(a))
    db = len(b) - 1
    inv_lead = pow(b[-1], -1, p)
    while len(a) - 1 >= db and a:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - db
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        _poly_trim(a)
    return a


def _int_to_poly(v: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        v, c = divmod(v, p)
        out.append(c)
    return out


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial factorization: no monic factor of degree 1..deg//2."""
    k = len(poly) - 1
    if k <= 0:
        return False
    if k == 1:
        return True
    for deg in range(1, k // 2 + 1):
        for low in range(p**deg):
            divisor = _int_to_poly(low, p, deg) + [1]
            if not _poly_mod(poly, divisor, p):
                return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible polynomial of degree k.

    Candidates are ordered by the integer ``sum c_i p**i`` of their lower
    coefficients, i.e. leading-coefficient-first lexicographic order.
    """
    for low in range(p**k):
        poly = _int_to_poly(low, p, k) + [1]
        if is_irreducible(poly, p):
            return tuple(poly)
    raise AssertionError("no irreducible polynomial found")  # unreachable


# -- field spec ---------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    """The tower F_p <= F_q <= F_{q^d}, q = p**m, realized as F_p[x]/(modulus)."""

    p: int
    m: int
    d: int
    modulus: tuple[int, ...]
    _t: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not isprime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.m < 1 or self.d < 1:
            raise ValueError("extension degrees must be positive")
        if len(self.modulus) != self.k + 1 or self.modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree m*d")
        if not is_irreducible(self.modulus, self.p):
            raise ValueError(f"modulus {self.modulus} is reducible over F_{self.p}")
        if self.size > MAX_FIELD_SIZE:
            raise ValueError(f"field of size {self.size} exceeds cap {MAX_FIELD_SIZE}")
        self._build_tables()

    # sizes
    @property
    def k(self) -> int:
        return self.m * self.d

    @property
    def q(self) -> int:
        return self.p**self.m

    @property
    def size(self) -> int:
        return self.p**self.k

    @property
    def order(self) -> int:
        """Order of the multiplicative group."""
        return self.size - 1

    def __repr__(self):
        return f"FieldSpec(p={self.p}, m={self.m}, d={self.d}, modulus={self.modulus})"

    # -- table construction ------------------------------------------------
    def _digits(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        return (v[..., None] // self._t["pw"]) % self.p

    def _undigits(self, dg: np.ndarray) -> np.ndarray:
        return (dg * self._t["pw"]).sum(axis=-1)

    def _scalar_mul(self, a: int, b: int) -> int:
        p, k = self.p, self.k
        pa, pb = _int_to_poly(a, p, k), _int_to_poly(b, p, k)
        prod = [0] * (2 * k)
        for i, x in enumerate(pa):
            if x:
                for j, y in enumerate(pb):
                    prod[i + j] = (prod[i + j] + x * y) % p
        red = _poly_mod(prod, self.modulus, p)
        return sum(c * p**i for i, c in enumerate(red))

    def _scalar_pow(self, a: int, e: int) -> int:
        out = 1
        while e:
            if e & 1:
                out = self._scalar_mul(out, a)
            a = self._scalar_mul(a, a)
            e >>= 1
        return out

    def _mul_by_const(self, v: np.ndarray, c: int) -> np.ndarray:
        # multiplication by a constant is F_p-linear in the digit vector
        cols = np.array(
            [_int_to_poly(self._scalar_mul(c, self.p**i), self.p, self.k) for i in range(self.k)],
            dtype=np.int64,
        )
        return self._undigits((self._digits(v) @ cols) % self.p)

    def _build_tables(self):
        t = self._t
        p, k, Q = self.p, self.k, self.size
        t["pw"] = p ** np.arange(k, dtype=np.int64)
        # smallest primitive root by integer encoding
        n = Q - 1
        primes = list(factorint(n)) if n > 1 else []
        g = 1
        for cand in range(1, Q):
            if all(self._scalar_pow(cand, n // ell) != 1 for ell in primes):
                g = cand
                break
        t["g"] = g
        exp = np.empty(n, dtype=np.int64)
        exp[0] = 1
        filled = 1
        while filled < n:
            step = min(filled, n - filled)
            exp[filled:filled + step] = self._mul_by_const(exp[:step], self._scalar_pow(g, filled))
            filled += step
        log = np.full(Q, -1, dtype=np.int64)
        log[exp] = np.arange(n)
        if n > 0 and np.any(log[1:] < 0):
            raise AssertionError("primitive root does not generate")
        t["exp"], t["log"] = exp, log
        allv = np.arange(Q, dtype=np.int64)
        t["neg"] = self._undigits((-self._digits(allv)) % p)
        inv = np.zeros(Q, dtype=np.int64)
        inv[1:] = exp[(-log[1:]) % n]
        t["inv"] = inv
        frob = np.zeros(Q, dtype=np.int64)
        frob[1:] = exp[(log[1:] * self.q) % n]
        t["frob"] = frob
        pfrob = np.zeros(Q, dtype=np.int64)
        pfrob[1:] = exp[(log[1:] * p) % n]
        t["pfrob"] = pfrob
        if Q <= _TABLE_LIMIT:
            a, b = np.meshgrid(allv, allv, indexing="ij")
            t["add"] = self._undigits((self._digits(a) + self._digits(b)) % p)
            mul = np.zeros((Q, Q), dtype=np.int64)
            la, lb = log[1:][:, None], log[1:][None, :]
            mul[1:, 1:] = exp[(la + lb) % n]
            t["mul"] = mul

    # -- vectorized arithmetic on encoded arrays -----------------------------
    @property
    def primitive_root(self) -> int:
        return self._t["g"]

    @property
    def exp_table(self) -> np.ndarray:
        return self._t["exp"]

    @property
    def log_table(self) -> np.ndarray:
        return self._t["log"]

    def add(self, a, b):
        a, b = np.asarray(a), np.asarray(b)
        if "add" in self._t:
            return self._t["add"][a, b]
        if self.p == 2:
            return np.bitwise_xor(a, b)
        return self._undigits((self._digits(a) + self._digits(b)) % self.p)

    def neg(self, a):
        return self._t["neg"][np.asarray(a)]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a, b = np.asarray(a), np.asarray(b)
        if "mul" in self._t:
            return self._t["mul"][a, b]
        a, b = np.broadcast_arrays(a, b)
        log, exp = self._t["log"], self._t["exp"]
        out = exp[(log[a] + log[b]) % self.order]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero in finite field")
        return self._t["inv"][a]

    def pow(self, a, e: int):
        a = np.asarray(a)
        log, exp = self._t["log"], self._t["exp"]
        if e == 0:
            return np.ones_like(a)
        if e < 0:
            a, e = self.inv(a), -e
        out = exp[(log[a] * e) % self.order] if self.order else np.ones_like(a)
        return np.where(a == 0, 0, out)

    def frob(self, a, k: int = 1):
        """x -> x**(q**k); negative k allowed (order d)."""
        a = np.asarray(a)
        k %= self.d
        for _ in range(k):
            a = self._t["frob"][a]
        return a

    def pfrob(self, a, k: int = 1):
        """x -> x**(p**k)."""
        a = np.asarray(a)
        k %= self.k
        for _ in range(k):
            a = self._t["pfrob"][a]
        return a

    def scalar(self, c: int) -> int:
        """Encoding of the prime-field constant c."""
        return c % self.p

    # -- tower levels ---------------------------------------------------------
    def level_degree(self, level) -> int:
        """Degree over F_p of a tower level: 'p', 'q', 'qd' or an int degree."""
        if isinstance(level, str) or level is None:
            try:
                return {"p": 1, "q": self.m, "qd": self.k, None: self.k}[level]
            except KeyError:
                raise ValueError(f"unknown tower level {level!r}") from None
        level = int(level)
        if level < 1 or self.k % level:
            raise ValueError(f"F_p-degree {level} is not a subfield of degree {self.k}")
        return level

    def subfield(self, level) -> np.ndarray:
        """Sorted encodings of the subfield of the given level."""
        e = self.level_degree(level)
        key = ("sub", e)
        if key not in self._t:
            allv = np.arange(self.size, dtype=np.int64)
            self._t[key] = allv[self.pfrob(allv, e) == allv]
        return self._t[key]

    def q_subfield(self, qdeg: int) -> np.ndarray:
        """Elements of F_{q^qdeg}; qdeg must divide d."""
        if self.d % qdeg:
            raise ValueError(f"F_q^{qdeg} is not a subfield of F_q^{self.d}")
        return self.subfield(self.m * qdeg)

    def in_level(self, a, level) -> np.ndarray:
        e = self.level_degree(level)
        a = np.asarray(a)
        return self.pfrob(a, e) == a

    def trace(self, a, target="p", source="qd"):
        """Vectorized trace from the source level down to the target level."""
        t, s = self.level_degree(target), self.level_degree(source)
        if s % t:
            raise ValueError(f"level of degree {t} does not divide level of degree {s}")
        a = np.asarray(a)
        if not np.all(self.in_level(a, s)):
            raise ValueError("element does not lie in the source level")
        acc = a
        cur = a
        for _ in range(s // t - 1):
            cur = self.pfrob(cur, t)
            acc = self.add(acc, cur)
        return acc

    def subfield_basis(self, level) -> list[int]:
        """An F_p-basis of the subfield: powers 1, h, ..., h^(e-1) of a generator."""
        e = self.level_degree(level)
        if self.size == 2:
            return [1]
        h = int(self.exp_table[(self.order // (self.p**e - 1)) % self.order])
        return [int(self.pow(h, i)) for i in range(e)]

    def fmt(self, v: int) -> str:
        """Human-readable polynomial in x for an encoded element."""
        coeffs = _int_to_poly(int(v), self.p, self.k)
        terms = []
        for i, c in enumerate(coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if i == 0:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}{mono}")
        return "+".join(reversed(terms)) if terms else "0"


@functools.lru_cache(maxsize=None)
def field_build(p: int, m: int = 1, d: int = 1) -> FieldSpec:
    """Build F_{p^(m d)} with the lexicographically smallest irreducible modulus."""
    if not isprime(p):
        raise ValueError(f"p={p} is not prime")
    if p ** (m * d) > MAX_FIELD_SIZE:
        raise ValueError(f"p^(m d) = {p ** (m * d)} exceeds the cap {MAX_FIELD_SIZE}")
    return FieldSpec(p, m, d, smallest_irreducible(p, m * d))


# -- element wrapper ----------------------------------------------------------

@dataclass(frozen=True)
class FieldElem:
    spec: FieldSpec
    value: int

    @classmethod
    def from_rep(cls, spec: FieldSpec, rep: Sequence[int]) -> "FieldElem":
        if len(rep) != spec.k:
            raise ValueError(f"rep must have length {spec.k}")
        return cls(spec, sum((c % spec.p) * spec.p**i for i, c in enumerate(rep)))

    @property
    def rep(self) -> tuple[int, ...]:
        return tuple(_int_to_poly(self.value, self.spec.p, self.spec.k))

    def _lift(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.spec != self.spec:
                raise ValueError("field mismatch")
            return other.value
        return self.spec.scalar(int(other))

    def __add__(self, o):
        return FieldElem(self.spec, int(self.spec.add(self.value, self._lift(o))))

    __radd__ = __add__

    def __sub__(self, o):
        return FieldElem(self.spec, int(self.spec.sub(self.value, self._lift(o))))

    def __rsub__(self, o):
        return FieldElem(self.spec, int(self.spec.sub(self._lift(o), self.value)))

    def __neg__(self):
        return FieldElem(self.spec, int(self.spec.neg(self.value)))

    def __mul__(self, o):
        return FieldElem(self.spec, int(self.spec.mul(self.value, self._lift(o))))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElem":
        return FieldElem(self.spec, int(self.spec.inv(self.value)))

    def __truediv__(self, o):
        return self * FieldElem(self.spec, self._lift(o)).inverse()

    def __pow__(self, e: int):
        return FieldElem(self.spec, int(self.spec.pow(self.value, e)))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"FieldElem({self.spec.fmt(self.value)})"


def frobenius(x: FieldElem, k: int = 1) -> FieldElem:
    """x -> x^(q^k)."""
    return FieldElem(x.spec, int(x.spec.frob(x.value, k)))


def trace_to(x: FieldElem, target_level="p", source_level="qd") -> FieldElem:
    """Sum of the Galois conjugates of x over the target level."""
    return FieldElem(x.spec, int(x.spec.trace(x.value, target_level, source_level)))


def dlog(x: FieldElem, g: FieldElem | None = None) -> int:
    """Discrete log by linear scan of the powers of g (the cached primitive root by default)."""
    spec = x.spec
    if x.value == 0:
        raise ValueError("discrete log of zero")
    if g is None or g.value == spec.primitive_root:
        return int(spec.log_table[x.value])
    cur = 1
    for e in range(spec.order):
        if cur == x.value:
            return e
        cur = int(spec.mul(cur, g.value))
    raise ValueError("x is not a power of g")


@functools.lru_cache(maxsize=None)
def embedding(small: FieldSpec, big: FieldSpec) -> np.ndarray:
    """Table of a field embedding small -> big found by root search.

    The generator x of ``small`` is sent to the smallest root of its modulus in
    ``big``.  Returned array maps small encodings to big encodings.
    """
    if small.p != big.p or big.k % small.k:
        raise ValueError("no embedding between these fields")
    allv = np.arange(big.size, dtype=np.int64)
    acc = np.zeros_like(allv)
    for c in reversed(small.modulus):
        acc = big.add(big.mul(acc, allv), big.scalar(c))
    roots = allv[acc == 0]
    if len(roots) == 0:
        raise AssertionError("modulus has no root in the larger field")
    z = int(roots[0])
    powers = [int(big.pow(z, i)) for i in range(small.k)]
    src = np.arange(small.size, dtype=np.int64)
    dg = small._digits(src)
    out = np.zeros(small.size, dtype=np.int64)
    for i, zi in enumerate(powers):
        out = big.add(out, big.mul(dg[:, i], zi))
    return out


def embedding_inverse(small: FieldSpec, big: FieldSpec) -> np.ndarray:
    """Partial inverse of :func:`embedding`: big encodings -> small (or -1)."""
    fwd = embedding(small, big)
    back = np.full(big.size, -1, dtype=np.int64)
    back[fwd] = np.arange(small.size)
    return back
