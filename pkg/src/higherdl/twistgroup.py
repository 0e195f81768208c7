"""The finite group G^{F'} = GL_n(O_r)^{F'} for the twisted Frobenius F' = Ad(w) o F.

Matrices live over F_{q^d}[pi]/pi^r with d the order of the Weyl permutation
``w``; an element is F'-fixed when ``g[w(i), w(j)] = F(g[i, j])``.  The whole
group is enumerated once into an element table of shape ``(N, n, n, r)`` and
everything downstream works on indices into that table.
"""

from __future__ import annotations

import functools
import hashlib
import itertools
import json
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .fieldtower import FieldSpec, embedding, field_build
from .parallel import chunked_map
from .truncring import RingSpec, TruncRingElem, ring_inv, ring_mul, ring_one, ring_sub

log = logging.getLogger(__name__)

MAX_GROUP_ORDER = 2**20
MAX_CANDIDATES = 2**23
CACHE_MAGIC = b"HDLGRP\x00\x01"


class ResourceCapError(RuntimeError):
    """A desk-scale size bound was exceeded."""


# -- permutations -----------------------------------------------------------------

def perm_order(w) -> int:
    order, cur = 1, tuple(w)
    ident = tuple(range(len(w)))
    while cur != ident:
        cur = tuple(w[c] for c in cur)
        order += 1
    return order


def perm_cycles(w) -> list[list[int]]:
    seen, out = set(), []
    for i in range(len(w)):
        if i in seen:
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = w[j]
        out.append(cyc)
    return out


def perm_from_cycle_type(cycle_type) -> tuple[int, ...]:
    """Canonical Weyl element: cycles on consecutive blocks, i -> i+1 inside a block."""
    w, start = [], 0
    for s in cycle_type:
        if s < 1:
            raise ValueError("cycle lengths must be positive")
        w.extend(start + (i + 1) % s for i in range(s))
        start += s
    return tuple(w)


def parse_cycle_type(text: str) -> tuple[int, ...]:
    try:
        ct = tuple(int(x) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise ValueError(f"bad torus cycle type {text!r}") from None
    if not ct or any(c < 1 for c in ct):
        raise ValueError(f"bad torus cycle type {text!r}")
    return ct


# -- group spec -------------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """GL_n over F_{q^d}[pi]/pi^r twisted by the permutation ``w`` (0-based images)."""

    n: int
    p: int
    m: int
    r: int
    w: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.w) != list(range(self.n)):
            raise ValueError(f"w={self.w} is not a permutation of 0..{self.n - 1}")
        if self.r < 1 or self.n < 1:
            raise ValueError("n and r must be positive")

    @classmethod
    def from_cycle_type(cls, n, p, m, r, cycle_type) -> "GroupSpec":
        if isinstance(cycle_type, str):
            cycle_type = parse_cycle_type(cycle_type)
        if sum(cycle_type) != n:
            raise ValueError(f"cycle type {cycle_type} is not a partition of n={n}")
        return cls(n, p, m, r, perm_from_cycle_type(cycle_type))

    @property
    def d(self) -> int:
        return perm_order(self.w)

    @property
    def q(self) -> int:
        return self.p**self.m

    @property
    def field(self) -> FieldSpec:
        return field_build(self.p, self.m, self.d)

    @property
    def ring(self) -> RingSpec:
        return RingSpec(self.field, self.r)

    @property
    def l(self) -> int:
        if self.r % 2:
            raise ValueError(f"level r={self.r} is odd; the arithmetic radical needs r = 2l")
        return self.r // 2

    @property
    def cycles(self) -> list[list[int]]:
        return perm_cycles(self.w)

    @property
    def cycle_type(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.cycles)

    @property
    def winv(self) -> tuple[int, ...]:
        inv = [0] * self.n
        for i, j in enumerate(self.w):
            inv[j] = i
        return tuple(inv)

    def at_level(self, r: int) -> "GroupSpec":
        return GroupSpec(self.n, self.p, self.m, r, self.w)

    def split(self) -> "GroupSpec":
        return GroupSpec(self.n, self.p, self.m, self.r, tuple(range(self.n)))

    @functools.cached_property
    def entry_orbits(self) -> list[list[tuple[int, int]]]:
        """Orbits of (i, j) under (i, j) -> (w i, w j), each starting at its smallest pair."""
        seen, out = set(), []
        for i, j in itertools.product(range(self.n), repeat=2):
            if (i, j) in seen:
                continue
            orb, cur = [], (i, j)
            while cur not in seen:
                seen.add(cur)
                orb.append(cur)
                cur = (self.w[cur[0]], self.w[cur[1]])
            out.append(orb)
        return out

    def closed_form_order(self) -> int:
        q, n, r = self.q, self.n, self.r
        return q ** ((r - 1) * n * n) * math.prod(q**n - q**i for i in range(n))

    def cache_key(self) -> str:
        mod = "".join(map(str, self.field.modulus))
        w = "".join(map(str, self.w))
        return f"gl{self.n}_p{self.p}_m{self.m}_r{self.r}_w{w}_mod{mod}"

    def describe(self) -> dict:
        return {"n": self.n, "p": self.p, "m": self.m, "q": self.q, "r": self.r,
                "w": [x + 1 for x in self.w], "cycle_type": list(self.cycle_type), "d": self.d}


# -- batched matrix arithmetic over the truncated ring --------------------------------

def mat_mul(F: FieldSpec, A, B):
    """Batched product of (..., n, n, r) matrices."""
    A, B = np.asarray(A), np.asarray(B)
    n = A.shape[-2]
    out = ring_mul(F, A[..., :, 0:1, :], B[..., 0:1, :, :])
    for k in range(1, n):
        out = F.add(out, ring_mul(F, A[..., :, k:k + 1, :], B[..., k:k + 1, :, :]))
    return out


def mat_identity(n: int, r: int) -> np.ndarray:
    out = np.zeros((n, n, r), dtype=np.int64)
    for i in range(n):
        out[i, i] = ring_one(r)
    return out


def mat_inv(F: FieldSpec, A):
    """Batched inverse by Gaussian elimination with unit pivots.

    Over a local ring every column of an invertible matrix that is nonzero
    mod pi still contains a unit below the diagonal after elimination.
    """
    A = np.array(A, dtype=np.int64)
    squeeze = A.ndim == 3
    if squeeze:
        A = A[None]
    N, n, _, r = A.shape
    X = A.copy()
    Inv = np.broadcast_to(mat_identity(n, r), X.shape).copy()
    ar = np.arange(N)
    for c in range(n):
        units = X[:, c:, c, 0] != 0
        if not units.any(axis=1).all():
            raise ZeroDivisionError("singular matrix over the truncated ring")
        piv = c + np.argmax(units, axis=1)
        perm = np.tile(np.arange(n), (N, 1))
        perm[ar, c] = piv
        perm[ar, piv] = c
        X = X[ar[:, None], perm]
        Inv = Inv[ar[:, None], perm]
        pinv = ring_inv(F, X[:, c, c])[:, None, :]
        X[:, c] = ring_mul(F, pinv, X[:, c])
        Inv[:, c] = ring_mul(F, pinv, Inv[:, c])
        for row in range(n):
            if row == c:
                continue
            f = X[:, row, c][:, None, :].copy()
            X[:, row] = ring_sub(F, X[:, row], ring_mul(F, f, X[:, c]))
            Inv[:, row] = ring_sub(F, Inv[:, row], ring_mul(F, f, Inv[:, c]))
    return Inv[0] if squeeze else Inv


def residue_det(F: FieldSpec, A) -> np.ndarray:
    """Leibniz determinant of the reduction mod pi, batched."""
    A = np.asarray(A)[..., 0]
    n = A.shape[-1]
    out = np.zeros(A.shape[:-2], dtype=np.int64)
    for perm in itertools.permutations(range(n)):
        term = A[..., 0, perm[0]]
        for i in range(1, n):
            term = F.mul(term, A[..., i, perm[i]])
        inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        out = F.sub(out, term) if inversions % 2 else F.add(out, term)
    return out


def twist_frobenius(spec: GroupSpec, A):
    """F'(g) = w F(g) w^{-1}: entry (i, j) becomes F(g[w^{-1} i, w^{-1} j])."""
    winv = np.array(spec.winv)
    A = np.asarray(A)
    return spec.field.frob(A[..., winv[:, None], winv[None, :], :], 1)


def is_twist_fixed(spec: GroupSpec, A) -> np.ndarray:
    A = np.asarray(A)
    return np.all(twist_frobenius(spec, A) == A, axis=(-3, -2, -1))


# -- subgroup tags ----------------------------------------------------------------------

SUBGROUP_TAGS = ("full", "kernel", "borel", "unipotent_upper", "unipotent_lower",
                 "arithmetic_radical", "torus", "torus_times_radical", "monomial")


def tag_mask(spec: GroupSpec, elems, tag: str, level: int | None = None) -> np.ndarray:
    """Vectorized membership of (..., n, n, r) elements in a standard subgroup."""
    E = np.asarray(elems)
    n, r = spec.n, spec.r
    ident = mat_identity(n, r)
    offdiag = ~np.eye(n, dtype=bool)
    lower = np.tril(np.ones((n, n), dtype=bool), -1)
    upper = lower.T
    diag_one = np.all(E[..., np.arange(n), np.arange(n), :] == ring_one(r), axis=(-2, -1))
    if tag == "full":
        return np.ones(E.shape[:-3], dtype=bool)
    if tag == "kernel":
        i = 0 if level is None else level
        if not 0 <= i <= r:
            raise ValueError(f"kernel level {i} outside 0..{r}")
        return np.all(E[..., :i] == ident[..., :i], axis=(-3, -2, -1))
    if tag == "borel":
        return np.all(E[..., lower, :] == 0, axis=(-2, -1))
    if tag == "unipotent_upper":
        return np.all(E[..., lower, :] == 0, axis=(-2, -1)) & diag_one
    if tag == "unipotent_lower":
        return np.all(E[..., upper, :] == 0, axis=(-2, -1)) & diag_one
    if tag == "torus":
        return np.all(E[..., offdiag, :] == 0, axis=(-2, -1))
    if tag == "monomial":
        nz = np.any(E != 0, axis=-1)
        unit = E[..., 0] != 0
        return (np.all(nz.sum(axis=-1) == 1, axis=-1) & np.all(nz.sum(axis=-2) == 1, axis=-1)
                & np.all(~nz | unit, axis=(-2, -1)))
    if tag in ("arithmetic_radical", "torus_times_radical"):
        l = spec.l
        off_small = np.all(E[..., offdiag, :l] == 0, axis=(-2, -1))
        if tag == "arithmetic_radical":
            return off_small & diag_one
        units = np.all(E[..., np.arange(n), np.arange(n), 0] != 0, axis=-1)
        return off_small & units
    raise ValueError(f"unknown subgroup tag {tag!r}")


# -- elements ----------------------------------------------------------------------------

class GroupElem:
    """An F'-fixed invertible matrix over the truncated ring."""

    __slots__ = ("spec", "entries")

    def __init__(self, spec: GroupSpec, entries, check: bool = True):
        arr = np.array(entries, dtype=np.int64)
        if arr.shape != (spec.n, spec.n, spec.r):
            raise ValueError(f"entries must have shape {(spec.n, spec.n, spec.r)}")
        if check:
            if not is_twist_fixed(spec, arr):
                raise ValueError("matrix is not fixed by the twisted Frobenius")
            if residue_det(spec.field, arr) == 0:
                raise ValueError("matrix is not invertible")
        arr.setflags(write=False)
        self.spec = spec
        self.entries = arr

    @classmethod
    def identity(cls, spec: GroupSpec) -> "GroupElem":
        return cls(spec, mat_identity(spec.n, spec.r), check=False)

    def _same(self, other: "GroupElem"):
        if other.spec != self.spec:
            raise ValueError("elements belong to different groups")

    def __mul__(self, other: "GroupElem") -> "GroupElem":
        self._same(other)
        return GroupElem(self.spec, mat_mul(self.spec.field, self.entries, other.entries), check=False)

    def inv(self) -> "GroupElem":
        return GroupElem(self.spec, mat_inv(self.spec.field, self.entries), check=False)

    def conj(self, h: "GroupElem") -> "GroupElem":
        """h g h^{-1}."""
        return h * self * h.inv()

    def entry(self, i: int, j: int) -> TruncRingElem:
        return TruncRingElem(self.spec.ring, tuple(int(c) for c in self.entries[i, j]))

    def is_member(self, tag: str, level: int | None = None) -> bool:
        return bool(tag_mask(self.spec, self.entries, tag, level))

    def __eq__(self, other):
        return isinstance(other, GroupElem) and other.spec == self.spec and np.array_equal(
            self.entries, other.entries)

    def __hash__(self):
        return hash((self.spec, self.entries.tobytes()))

    def __repr__(self):
        rows = [[repr(self.entry(i, j)) for j in range(self.spec.n)] for i in range(self.spec.n)]
        return "GroupElem(" + "; ".join(", ".join(r) for r in rows) + ")"


def membership(g: GroupElem, tag: str, level: int | None = None) -> bool:
    return g.is_member(tag, level)


def tu_decompose_batch(spec: GroupSpec, elems):
    """Split elements of (TU^±)^{F'} as g = t (1 + pi^l Y) with diag(Y) = 0.

    Returns the diagonal ``(..., n, r)`` and ``Y`` as ``(..., n, n, l)`` matrices over O_l.
    """
    E = np.asarray(elems)
    if not np.all(tag_mask(spec, E, "torus_times_radical")):
        raise ValueError("element outside (TU^±)^{F'}")
    n, l, F = spec.n, spec.l, spec.field
    diag = E[..., np.arange(n), np.arange(n), :]
    tinv = ring_inv(F, diag)
    Z = ring_mul(F, tinv[..., :, None, :], E)
    Y = Z[..., l:].copy()
    Y[..., np.arange(n), np.arange(n), :] = 0
    return diag, Y


def tu_decompose(g: GroupElem):
    """Return (t, u, Y) with g = t u, t = diag(g) in T^{F'} and u = 1 + pi^l Y in (U^±)^{F'}."""
    spec = g.spec
    diag, Y = tu_decompose_batch(spec, g.entries)
    t = np.zeros_like(g.entries)
    t[np.arange(spec.n), np.arange(spec.n)] = diag
    u = mat_mul(spec.field, mat_inv(spec.field, t), g.entries)
    return GroupElem(spec, t, check=False), GroupElem(spec, u, check=False), Y


def kernel_to_matrix(spec: GroupSpec, elems, level: int):
    """(G^i)^{F'} -> M_n(O_{r-i}): 1 + pi^i X -> X."""
    E = np.asarray(elems)
    if not np.all(tag_mask(spec, E, "kernel", level)):
        raise ValueError("element outside the congruence kernel")
    X = E[..., level:].copy()
    n = spec.n
    X[..., np.arange(n), np.arange(n), :] = spec.field.sub(
        X[..., np.arange(n), np.arange(n), :], ring_one(spec.r)[level:])
    return X


def matrix_to_kernel(spec: GroupSpec, X, level: int):
    X = np.asarray(X)
    n = spec.n
    out = np.broadcast_to(mat_identity(n, spec.r), X.shape[:-1] + (spec.r,)).copy()
    out[..., level:] = spec.field.add(out[..., level:], X)
    return out


# -- enumerated groups -------------------------------------------------------------------

@dataclass
class ClassTable:
    class_of: np.ndarray   # (N,) class index per element
    reps: np.ndarray       # (C,) smallest element index of each class
    sizes: np.ndarray      # (C,)

    @property
    def count(self) -> int:
        return len(self.reps)


class Group:
    """Enumerated G^{F'} with index lookup, batched products and a class table."""

    def __init__(self, spec: GroupSpec, elems: np.ndarray, workers: int = 1):
        self.spec = spec
        self.F = spec.field
        self.workers = workers
        self.elems = np.ascontiguousarray(elems, dtype=np.int64)
        self.order = len(self.elems)
        self.keys = self.key(self.elems)
        self._sort = np.argsort(self.keys, kind="stable")
        self._sorted_keys = self.keys[self._sort]
        if np.any(np.diff(self._sorted_keys) == 0):
            raise AssertionError("duplicate elements in group table")
        self.identity = int(self.index_of(mat_identity(spec.n, spec.r)[None])[0])
        self._masks: dict = {}
        self._classes: ClassTable | None = None
        self._gens: list[int] | None = None

    # -- lookup
    def key(self, elems) -> np.ndarray:
        E = np.asarray(elems).reshape(len(elems), -1)
        Q = self.F.size
        if E.shape[1] * math.log2(Q) >= 63:
            raise ResourceCapError("element keys do not fit in 63 bits")
        key = np.zeros(len(E), dtype=np.int64)
        for c in range(E.shape[1]):
            key = key * Q + E[:, c]
        return key

    def index_of(self, elems) -> np.ndarray:
        """Table indices of the given elements; -1 for elements not in the table."""
        k = self.key(elems)
        pos = np.searchsorted(self._sorted_keys, k)
        pos = np.minimum(pos, self.order - 1)
        hit = self._sorted_keys[pos] == k
        return np.where(hit, self._sort[pos], -1)

    def elem(self, i: int) -> GroupElem:
        return GroupElem(self.spec, self.elems[i], check=False)

    # -- arithmetic over index sets
    def mul_left(self, s, idx=None) -> np.ndarray:
        """Indices of s * g for g in the table (or the subset idx)."""
        s = np.asarray(s)
        src = self.elems if idx is None else self.elems[idx]
        out = chunked_map(lambda E: self.index_of(mat_mul(self.F, s[None], E)), src, self.workers)
        return out

    def mul_right(self, s, idx=None) -> np.ndarray:
        s = np.asarray(s)
        src = self.elems if idx is None else self.elems[idx]
        return chunked_map(lambda E: self.index_of(mat_mul(self.F, E, s[None])), src, self.workers)

    def conj_by(self, s, idx=None) -> np.ndarray:
        """Indices of s g s^{-1}."""
        s = np.asarray(s)
        sinv = mat_inv(self.F, s)
        src = self.elems if idx is None else self.elems[idx]

        def work(E):
            return self.index_of(mat_mul(self.F, mat_mul(self.F, s[None], E), sinv[None]))

        return chunked_map(work, src, self.workers)

    def inverse_indices(self) -> np.ndarray:
        return chunked_map(lambda E: self.index_of(mat_inv(self.F, E)), self.elems, self.workers)

    # -- subgroups
    def mask(self, tag: str, level: int | None = None) -> np.ndarray:
        key = (tag, level)
        if key not in self._masks:
            self._masks[key] = tag_mask(self.spec, self.elems, tag, level)
        return self._masks[key]

    def subgroup(self, tag: str, level: int | None = None) -> np.ndarray:
        return np.flatnonzero(self.mask(tag, level))

    # -- generators and classes
    def generators(self, seed: int = 0) -> list[int]:
        """A small generating set found by seeded random draws, verified by closure."""
        if self._gens is None:
            self._gens = subgroup_generators(self, np.arange(self.order), seed=seed)
        return self._gens

    def classes(self) -> ClassTable:
        if self._classes is None:
            self._classes = conjugacy_classes(self)
        return self._classes


def _components(n_nodes: int, perms: list[np.ndarray]) -> np.ndarray:
    if not perms:
        return np.arange(n_nodes)
    rows = np.concatenate([np.arange(n_nodes)] * len(perms))
    cols = np.concatenate(perms)
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n_nodes, n_nodes))
    _, labels = connected_components(graph, directed=True, connection="weak")
    return labels


def _canonical_labels(labels: np.ndarray):
    """Relabel components by their smallest member, in increasing order."""
    n = len(labels)
    first = np.full(labels.max() + 1, n, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(n))
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return rank[labels], first[order]


def subgroup_generators(group: Group, members: np.ndarray, seed: int = 0) -> list[int]:
    """Seeded random generators of the subgroup given by table indices ``members``."""
    members = np.asarray(members)
    target = len(members)
    if target == 1:
        return []
    pos = np.full(group.order, -1, dtype=np.int64)
    pos[members] = np.arange(target)
    rng = np.random.default_rng(seed)
    gens: list[int] = []
    perms: list[np.ndarray] = []
    while True:
        g = int(members[rng.integers(target)])
        if g == group.identity:
            continue
        img = pos[group.mul_left(group.elems[g], members)]
        if np.any(img < 0):
            raise ValueError("index set is not closed under multiplication")
        gens.append(g)
        perms.append(img)
        if len(gens) >= 2 or target <= 2:
            labels = _components(target, perms)
            if np.all(labels == labels[pos[group.identity]]):
                return gens
        if len(gens) > 64:
            raise AssertionError("failed to find generators")


def conjugacy_classes(group: Group) -> ClassTable:
    """Conjugacy classes as weak components of the conjugation action of generators."""
    perms = [group.conj_by(group.elems[s]) for s in group.generators()]
    if any(np.any(pr < 0) for pr in perms):
        raise AssertionError("conjugation left the group table")
    class_of, reps = _canonical_labels(_components(group.order, perms))
    sizes = np.bincount(class_of, minlength=len(reps))
    return ClassTable(class_of=class_of, reps=reps, sizes=sizes)


def enumerate_elements(spec: GroupSpec) -> np.ndarray:
    """All F'-fixed invertible matrices, one free ring value per entry orbit.

    Orbits are taken in order of their smallest (i, j); free values iterate in
    coefficient-lexicographic order with the first orbit most significant.
    """
    if spec.closed_form_order() > MAX_GROUP_ORDER:
        raise ResourceCapError(f"|G| = {spec.closed_form_order()} exceeds {MAX_GROUP_ORDER}")
    F, n, r = spec.field, spec.n, spec.r
    orbit_vals = [RingSpec(F, r).elements(F.q_subfield(len(orb))) for orb in spec.entry_orbits]
    sizes = [len(v) for v in orbit_vals]
    total = math.prod(sizes)
    if total > MAX_CANDIDATES:
        raise ResourceCapError(f"{total} candidate matrices exceed {MAX_CANDIDATES}")
    out_parts = []
    step = 1 << 18
    for start in range(0, total, step):
        ids = np.arange(start, min(start + step, total), dtype=np.int64)
        M = np.zeros((len(ids), n, n, r), dtype=np.int64)
        rem = ids
        for orb, vals, size in reversed(list(zip(spec.entry_orbits, orbit_vals, sizes))):
            v = vals[rem % size]
            rem = rem // size
            for k, (i, j) in enumerate(orb):
                M[:, i, j] = F.frob(v, k)
        keep = residue_det(F, M) != 0
        out_parts.append(M[keep])
    return np.concatenate(out_parts)


# -- disk cache ----------------------------------------------------------------------

def _payload_dtype(Q: int) -> str:
    return "<u2" if Q <= 1 << 16 else "<u4"


def save_group(group: Group, cache_dir) -> Path:
    spec = group.spec
    path = Path(cache_dir) / f"{spec.cache_key()}.hdlg"
    path.parent.mkdir(parents=True, exist_ok=True)
    dt = _payload_dtype(spec.field.size)
    payload = group.elems.reshape(group.order, -1).astype(dt).tobytes()
    header = {
        "format": 1,
        "n": spec.n, "p": spec.p, "m": spec.m, "r": spec.r, "w": list(spec.w),
        "modulus": list(spec.field.modulus),
        "count": group.order,
        "orbits": [[list(ij) for ij in orb] for orb in spec.entry_orbits],
        "dtype": dt,
        "shape": [group.order, spec.n * spec.n * spec.r],
        "sha256": hashlib.sha256(payload).hexdigest(),
    }
    hb = json.dumps(header, sort_keys=True).encode()
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<I", len(hb)))
        fh.write(hb)
        fh.write(payload)
    tmp.replace(path)
    return path


def read_cache_header(path) -> dict:
    with open(path, "rb") as fh:
        if fh.read(len(CACHE_MAGIC)) != CACHE_MAGIC:
            raise ValueError("not a group cache file")
        (hl,) = struct.unpack("<I", fh.read(4))
        return json.loads(fh.read(hl))


def load_group(spec: GroupSpec, cache_dir, workers: int = 1) -> Group | None:
    """Load and revalidate a cached table; None when absent or stale."""
    path = Path(cache_dir) / f"{spec.cache_key()}.hdlg"
    if not path.exists():
        return None
    try:
        with open(path, "rb") as fh:
            if fh.read(len(CACHE_MAGIC)) != CACHE_MAGIC:
                raise ValueError("bad magic")
            (hl,) = struct.unpack("<I", fh.read(4))
            header = json.loads(fh.read(hl))
            payload = fh.read()
        expect = {"n": spec.n, "p": spec.p, "m": spec.m, "r": spec.r, "w": list(spec.w),
                  "modulus": list(spec.field.modulus)}
        if any(header[k] != v for k, v in expect.items()):
            raise ValueError("header does not match spec")
        if hashlib.sha256(payload).hexdigest() != header["sha256"]:
            raise ValueError("checksum mismatch")
        arr = np.frombuffer(payload, dtype=header["dtype"]).astype(np.int64)
        elems = arr.reshape(header["shape"]).reshape(-1, spec.n, spec.n, spec.r)
        if len(elems) != spec.closed_form_order() or header["count"] != len(elems):
            raise ValueError("element count differs from |G|")
        if not np.all(is_twist_fixed(spec, elems)) or np.any(residue_det(spec.field, elems) == 0):
            raise ValueError("cached element fails validation")
    except (ValueError, KeyError, struct.error, json.JSONDecodeError) as exc:
        log.warning("discarding stale group cache %s: %s", path, exc)
        return None
    return Group(spec, elems, workers=workers)


def table_checksum(group: Group) -> str:
    """sha256 of the table in cache payload format (equal to the cache header digest)."""
    dt = _payload_dtype(group.spec.field.size)
    return hashlib.sha256(group.elems.reshape(group.order, -1).astype(dt).tobytes()).hexdigest()


def cache_checksum(spec: GroupSpec, cache_dir) -> str | None:
    path = Path(cache_dir) / f"{spec.cache_key()}.hdlg"
    return read_cache_header(path)["sha256"] if path.exists() else None


_GROUPS: dict = {}


def enumerate_group(spec: GroupSpec, cache_dir=None, workers: int = 1) -> Group:
    """Enumerate (or load from the disk cache) the table of G^{F'}; memoized in-process."""
    if spec in _GROUPS:
        group = _GROUPS[spec]
        if cache_dir and cache_checksum(spec, cache_dir) is None:
            save_group(group, cache_dir)
        return group
    group = load_group(spec, cache_dir, workers) if cache_dir else None
    if group is None:
        elems = enumerate_elements(spec)
        if len(elems) != spec.closed_form_order():
            raise AssertionError(f"enumerated {len(elems)} elements, expected {spec.closed_form_order()}")
        group = Group(spec, elems, workers=workers)
        if cache_dir:
            save_group(group, cache_dir)
    _GROUPS[spec] = group
    return group


# -- comparison with the split model -------------------------------------------------------

def lang_matrix(spec: GroupSpec) -> np.ndarray:
    """A constant lambda in GL_n(F_{q^d}) with w F(lambda) = lambda.

    Along a cycle (c_0, ..., c_{s-1}) row c_k carries F^k of an F_q-basis of
    F_{q^s} in the columns of that cycle, so x -> lambda x lambda^{-1} sends
    F-fixed matrices to F'-fixed ones.
    """
    F, n, r = spec.field, spec.n, spec.r
    lam = np.zeros((n, n, r), dtype=np.int64)
    for cyc in spec.cycles:
        basis = F.subfield_basis(spec.m * len(cyc)) if len(cyc) > 1 else [1]
        for k, i in enumerate(cyc):
            for b, j in zip(basis, cyc):
                lam[i, j, 0] = F.frob(np.int64(b), k)
    if residue_det(F, lam) == 0:
        raise AssertionError("Moore matrix of a basis is singular")
    return lam


def transport_from_split(twisted: Group, split: Group) -> np.ndarray:
    """Index map split -> twisted for x -> lambda x lambda^{-1}; a bijection of tables."""
    ts, ss = twisted.spec, split.spec
    if ss.w != tuple(range(ss.n)) or (ss.n, ss.p, ss.m, ss.r) != (ts.n, ts.p, ts.m, ts.r):
        raise ValueError("split and twisted groups do not match")
    emb = embedding(ss.field, ts.field)
    lam = lang_matrix(ts)
    lam_inv = mat_inv(ts.field, lam)

    def work(E):
        return twisted.index_of(mat_mul(ts.field, mat_mul(ts.field, lam[None], emb[E]), lam_inv[None]))

    idx = chunked_map(work, split.elems, twisted.workers)
    if np.any(idx < 0) or len(np.unique(idx)) != twisted.order:
        raise AssertionError("conjugation by lambda is not a bijection onto G^{F'}")
    return idx
