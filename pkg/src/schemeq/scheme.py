"""Association schemes: exact constructors, axiom checks, intersection numbers.

A scheme is stored as its ``d+1`` dense 0/1 class matrices together with the
transpose pairing of class indices.  Everything here is integer arithmetic;
no tolerance is involved anywhere in this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AutomorphismError,
    InconsistencyError,
    NonTransitiveError,
    ParameterError,
    ResourceError,
    UnsupportedFieldError,
)
from .groups import GroupTable
from .tolerances import vertex_cap

SUPPORTED_FIELDS = (2, 3, 5)


@dataclass(frozen=True, eq=False)
class AssociationScheme:
    classes: tuple
    transpose_map: tuple
    labels: tuple = field(default=())

    def __post_init__(self):
        mats = []
        for A in self.classes:
            A = np.array(A, dtype=np.int8)
            A.setflags(write=False)
            mats.append(A)
        if not mats or any(A.ndim != 2 or A.shape != mats[0].shape for A in mats):
            raise ParameterError("classes must be equally sized square matrices")
        if mats[0].shape[0] != mats[0].shape[1]:
            raise ParameterError("classes must be square")
        if mats[0].shape[0] > vertex_cap():
            raise ResourceError(
                f"{mats[0].shape[0]} vertices exceeds cap {vertex_cap()}",
                witness={"n": mats[0].shape[0], "cap": vertex_cap()},
            )
        tmap = tuple(int(t) for t in self.transpose_map)
        if len(tmap) != len(mats):
            raise ParameterError("transpose_map length must equal class count")
        object.__setattr__(self, "classes", tuple(mats))
        object.__setattr__(self, "transpose_map", tmap)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def n(self) -> int:
        return self.classes[0].shape[0]

    @property
    def d(self) -> int:
        return len(self.classes) - 1

    @cached_property
    def stack(self) -> np.ndarray:
        """All classes as one ``(d+1, n, n)`` int64 array."""
        S = np.stack(self.classes).astype(np.int64)
        S.setflags(write=False)
        return S

    @cached_property
    def relation(self) -> np.ndarray:
        """``relation[x, y]`` is the class index of the pair (x, y).

        Only meaningful when the classes partition X x X (axiom 2).
        """
        R = np.argmax(self.stack, axis=0)
        R.setflags(write=False)
        return R

    @cached_property
    def valencies(self) -> np.ndarray:
        v = self.stack[:, 0, :].sum(axis=1)
        v.setflags(write=False)
        return v

    @cached_property
    def is_commutative(self) -> bool:
        return _commutator_witness(self.stack) is None

    def same_classes(self, other: "AssociationScheme") -> bool:
        """Equality of the class sets, ignoring their order."""
        if self.n != other.n or self.d != other.d:
            return False
        mine = sorted(A.tobytes() for A in self.classes)
        theirs = sorted(A.tobytes() for A in other.classes)
        return mine == theirs

    def __eq__(self, other):
        if not isinstance(other, AssociationScheme):
            return NotImplemented
        return (
            self.transpose_map == other.transpose_map
            and self.labels == other.labels
            and len(self.classes) == len(other.classes)
            and all(np.array_equal(a, b) for a, b in zip(self.classes, other.classes))
        )

    __hash__ = None


def _from_relation(R: np.ndarray, labels: Sequence[str] = ()) -> AssociationScheme:
    """Build a scheme from an integer relation matrix with classes 0..d."""
    d = int(R.max())
    classes = [(R == k).astype(np.int8) for k in range(d + 1)]
    tmap = []
    for A in classes:
        x, y = np.argwhere(A)[0]
        tmap.append(int(R[y, x]))
    return AssociationScheme(tuple(classes), tuple(tmap), tuple(labels))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def build_group_scheme(g: GroupTable) -> AssociationScheme:
    """One class per element x: (A_x)[y, z] = 1 iff y = x z."""
    n = g.order
    # identity first, then element order
    order = [g.identity] + [x for x in range(n) if x != g.identity]
    position = np.empty(n, dtype=np.int64)
    position[order] = np.arange(n)
    # y = x z  <=>  x = y z^-1
    R = g.mul[:, g.inverse]
    classes = [(R == x).astype(np.int8) for x in order]
    tmap = [int(position[g.inverse[x]]) for x in order]
    labels = [str(g.label(x)) for x in order]
    return AssociationScheme(tuple(classes), tuple(tmap), tuple(labels))


def _check_perm(p: Sequence[int], size: int, what: str) -> np.ndarray:
    arr = np.asarray(p, dtype=np.int64)
    if arr.shape != (size,) or not np.array_equal(np.sort(arr), np.arange(size)):
        raise ParameterError(f"{what} is not a permutation of 0..{size - 1}")
    return arr


def _orbit_labels(size: int, gens: Sequence[np.ndarray]) -> np.ndarray:
    """Union-find orbits of the group generated by ``gens`` on range(size).

    Returns a label per point; labels are numbered by smallest member.
    """
    parent = np.arange(size)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for p in gens:
        for x in range(size):
            a, b = find(x), find(int(p[x]))
            if a != b:
                parent[max(a, b)] = min(a, b)
    roots = np.array([find(x) for x in range(size)])
    _, labels = np.unique(roots, return_inverse=True)
    return labels


def build_orbit_scheme(perms: Sequence[Sequence[int]], x_size: int) -> AssociationScheme:
    """Orbitals of a transitive permutation group on X x X.

    Classes are numbered by the lexicographically smallest pair they contain,
    so the diagonal comes first.
    """
    gens = [_check_perm(p, x_size, "generator") for p in perms]
    point_orbits = _orbit_labels(x_size, gens)
    if (point_orbits != 0).any():
        missing = int(np.flatnonzero(point_orbits != 0)[0])
        raise NonTransitiveError(
            f"action is not transitive: point {missing} not in the orbit of 0",
            witness=[0, missing],
        )
    pair_gens = [(p[:, None] * x_size + p[None, :]).ravel() for p in gens]
    R = _orbit_labels(x_size * x_size, pair_gens).reshape(x_size, x_size)
    return _from_relation(R)


def build_subscheme(g: GroupTable, autos: Sequence[Sequence[int]]) -> AssociationScheme:
    """Fuse group-scheme classes along orbits of a group of automorphisms."""
    n = g.order
    perms = [_check_perm(a, n, "automorphism") for a in autos]
    for p in perms:
        bad = np.argwhere(p[g.mul] != g.mul[p[:, None], p[None, :]])
        if len(bad):
            x, y = (int(v) for v in bad[0])
            raise AutomorphismError(
                f"phi({x}*{y}) != phi({x})*phi({y})", witness=[x, y]
            )
        if p[g.identity] != g.identity:
            raise AutomorphismError("identity not fixed", witness=[g.identity])
    orbit = _orbit_labels(n, perms)
    # identity orbit first, others by smallest element
    first = {}
    for x in range(n):
        first.setdefault(int(orbit[x]), x)
    order = sorted(first, key=lambda o: (o != orbit[g.identity], first[o]))
    relabel = {o: k for k, o in enumerate(order)}
    element_class = np.array([relabel[int(orbit[x])] for x in range(n)])
    R = element_class[g.mul[:, g.inverse]]
    labels = []
    for o in order:
        members = [str(g.label(x)) for x in range(n) if orbit[x] == o]
        labels.append("{" + ",".join(members) + "}")
    scheme = _from_relation(R, labels)
    return scheme


def conjugacy_classes(g: GroupTable) -> list[list[int]]:
    """Conjugacy classes in the class order used by build_conjugacy_scheme."""
    orbit = _orbit_labels(g.order, [g.conjugation(x) for x in range(g.order)])
    groups: dict = {}
    for x in range(g.order):
        groups.setdefault(int(orbit[x]), []).append(x)
    return sorted(groups.values(), key=lambda c: (g.identity not in c, c[0]))


def conjugacy_partition(g: GroupTable) -> list[list[int]]:
    """Conjugacy classes as blocks of build_group_scheme(g) class indices."""
    order = [g.identity] + [x for x in range(g.order) if x != g.identity]
    position = {x: k for k, x in enumerate(order)}
    return [sorted(position[x] for x in cls) for cls in conjugacy_classes(g)]


def build_conjugacy_scheme(g: GroupTable) -> AssociationScheme:
    return build_subscheme(g, [g.conjugation(x) for x in range(g.order)])


def _check_cap(count: int) -> None:
    cap = vertex_cap()
    if count > cap:
        raise ResourceError(
            f"{count} vertices exceeds cap {cap}", witness={"n": count, "cap": cap}
        )


def build_johnson(v: int, k: int) -> AssociationScheme:
    """J(v, k): k-subsets of {1..v}; class i holds pairs meeting in k-i points."""
    if k <= 0 or 2 * k > v:
        raise ParameterError(f"Johnson scheme needs 0 < k <= v/2, got v={v}, k={k}")
    subsets = list(itertools.combinations(range(1, v + 1), k))
    _check_cap(len(subsets))
    M = np.zeros((len(subsets), v), dtype=np.int64)
    for row, s in enumerate(subsets):
        M[row, [x - 1 for x in s]] = 1
    R = k - M @ M.T
    labels = ["|a&b|=%d" % (k - i) for i in range(k + 1)]
    return AssociationScheme(
        tuple((R == i).astype(np.int8) for i in range(k + 1)),
        tuple(range(k + 1)),
        tuple(labels),
    )


def gaussian_binomial(v: int, d: int, q: int) -> int:
    num, den = 1, 1
    for i in range(d):
        num *= q ** (v - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def rref_subspaces(q: int, v: int, d: int) -> list[np.ndarray]:
    """All d-dimensional subspaces of GF(q)^v as reduced row-echelon bases.

    Ordered by pivot columns (lexicographic), then by the free entries in
    ``itertools.product`` order.
    """
    out = []
    for pivots in itertools.combinations(range(v), d):
        # free slots: row r, column c > pivots[r], c not a pivot
        slots = [
            (r, c) for r in range(d) for c in range(pivots[r] + 1, v) if c not in pivots
        ]
        for values in itertools.product(range(q), repeat=len(slots)):
            B = np.zeros((d, v), dtype=np.int64)
            B[np.arange(d), list(pivots)] = 1
            for (r, c), val in zip(slots, values):
                B[r, c] = val
            out.append(B)
    return out


def _projective_points(q: int, v: int) -> np.ndarray:
    """Normalized representatives (first nonzero entry 1) of the points of PG(v-1, q)."""
    pts = []
    for vec in itertools.product(range(q), repeat=v):
        nz = [x for x in vec if x]
        if nz and nz[0] == 1:
            pts.append(vec)
    return np.array(pts, dtype=np.int64)


def build_grassmann(q: int, v: int, d: int) -> AssociationScheme:
    """J_q(v, d): d-subspaces of GF(q)^v; class i holds pairs meeting in dimension d-i."""
    if q not in SUPPORTED_FIELDS:
        raise UnsupportedFieldError(
            f"GF({q}) unsupported; choose q in {SUPPORTED_FIELDS}", witness={"q": q}
        )
    if d <= 0 or 2 * d > v:
        raise ParameterError(f"Grassmann scheme needs 0 < d <= v/2, got v={v}, d={d}")
    _check_cap(gaussian_binomial(v, d, q))
    spaces = rref_subspaces(q, v, d)
    points = _projective_points(q, v)
    # a point lies in a row space iff it equals its coordinates times the basis;
    # the coordinates are its entries at the pivot columns
    incidence = np.zeros((len(spaces), len(points)), dtype=np.int64)
    for row, B in enumerate(spaces):
        pivots = np.argmax(B != 0, axis=1)
        coords = points[:, pivots]
        incidence[row] = ((coords @ B) % q == points).all(axis=1)
    shared = incidence @ incidence.T  # |PG(intersection)| = (q^dim - 1)/(q - 1)
    dim_of = {(q**t - 1) // (q - 1): t for t in range(d + 1)}
    dims = np.vectorize(dim_of.__getitem__)(shared)
    R = d - dims
    labels = ["dim(a&b)=%d" % (d - i) for i in range(d + 1)]
    return AssociationScheme(
        tuple((R == i).astype(np.int8) for i in range(d + 1)),
        tuple(range(d + 1)),
        tuple(labels),
    )


# ---------------------------------------------------------------------------
# axioms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomResult:
    passed: bool
    witness: object = None

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class AxiomReport:
    identity: AxiomResult
    partition: AxiomResult
    transpose: AxiomResult
    closure: AxiomResult
    commutative: AxiomResult

    def results(self) -> dict:
        return {
            1: self.identity,
            2: self.partition,
            3: self.transpose,
            4: self.closure,
            5: self.commutative,
        }

    @property
    def is_scheme(self) -> bool:
        return all((self.identity, self.partition, self.transpose, self.closure))

    def first_failure(self):
        for k, res in self.results().items():
            if not res.passed:
                return k, res.witness
        return None


def _first(mask: np.ndarray):
    idx = np.argwhere(mask)
    return None if len(idx) == 0 else tuple(int(v) for v in idx[0])


def _product_coefficients(S: np.ndarray, reps: np.ndarray) -> np.ndarray:
    """p[k, i, j] = (A_i A_j)[x_k, y_k] at a representative pair of each class."""
    rows = S[:, reps[:, 0], :].astype(np.float64)  # (i, k, z)
    cols = S[:, :, reps[:, 1]].astype(np.float64)  # (j, z, k)
    p = np.einsum("ikz,jzk->kij", rows, cols, optimize=True)
    return np.rint(p).astype(np.int64)


def _closure_witness(S: np.ndarray, R: np.ndarray, p: np.ndarray):
    """First (i, j, entry) where A_i A_j differs from sum_k p[k,i,j] A_k."""
    Sf = S.astype(np.float64)
    D = S.shape[0]
    for i in range(D):
        prods = np.rint(np.einsum("xz,jzy->jxy", Sf[i], Sf, optimize=True)).astype(np.int64)
        for j in range(D):
            expected = p[:, i, j][R]
            hit = _first(prods[j] != expected)
            if hit is not None:
                return {"i": i, "j": j, "entry": list(hit), "value": int(prods[j][hit])}
    return None


def _commutator_witness(S: np.ndarray):
    Sf = S.astype(np.float64)
    for i in range(S.shape[0]):
        for j in range(i + 1, S.shape[0]):
            bad = _first(Sf[i] @ Sf[j] != Sf[j] @ Sf[i])
            if bad is not None:
                return {"i": i, "j": j, "entry": list(bad)}
    return None


def _class_representatives(S: np.ndarray) -> np.ndarray:
    return np.array([np.argwhere(A)[0] for A in S])


def verify_axioms(s: AssociationScheme) -> AxiomReport:
    """Check axioms (1)-(5), reporting the first witness of each failure."""
    S = s.stack
    n, D = s.n, len(s.classes)
    I = np.eye(n, dtype=np.int64)

    bad = _first(S[0] != I)
    identity = AxiomResult(bad is None, None if bad is None else {"class": 0, "entry": list(bad)})

    binary = _first((S != 0) & (S != 1))
    total = S.sum(axis=0)
    if binary is not None:
        partition = AxiomResult(False, {"class": binary[0], "entry": list(binary[1:]),
                                        "value": int(S[binary])})
    else:
        bad = _first(total != 1)
        partition = AxiomResult(
            bad is None, None if bad is None else {"entry": list(bad), "sum": int(total[bad])}
        )

    tmap = s.transpose_map
    transpose = AxiomResult(True)
    for j in range(D):
        t = tmap[j]
        if not 0 <= t < D or tmap[t] != j:
            transpose = AxiomResult(False, {"class": j, "transpose_map": t})
            break
        bad = _first(S[j].T != S[t])
        if bad is not None:
            transpose = AxiomResult(False, {"class": j, "partner": t, "entry": list(bad)})
            break

    empty = [k for k in range(D) if not S[k].any()]
    if not partition.passed or empty:
        closure = AxiomResult(False, {"reason": "classes do not partition X x X"
                                      if not partition.passed else "empty class",
                                      "classes": empty})
    else:
        p = _product_coefficients(S, _class_representatives(S))
        w = _closure_witness(S, s.relation, p)
        closure = AxiomResult(w is None, w)

    w = _commutator_witness(S)
    commutative = AxiomResult(w is None, w)

    return AxiomReport(identity, partition, transpose, closure, commutative)


# ---------------------------------------------------------------------------
# intersection numbers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IntersectionTensor:
    """Structure constants: A_i A_j = sum_k p[k, i, j] A_k."""

    p: np.ndarray
    transpose_map: tuple

    @property
    def valencies(self) -> np.ndarray:
        t = self.transpose_map
        return np.array([self.p[0, i, t[i]] for i in range(len(t))], dtype=np.int64)

    def is_commutative(self) -> bool:
        return bool((self.p == self.p.transpose(0, 2, 1)).all())

    def intersection_matrix(self, i: int) -> np.ndarray:
        """``L[k, j] = p[k, i, j]``: left multiplication by A_i in class coordinates."""
        return self.p[:, i, :].copy()


def intersection_numbers(s: AssociationScheme) -> IntersectionTensor:
    S = s.stack
    total = S.sum(axis=0)
    if _first(total != 1) is not None or _first(S[0] != np.eye(s.n, dtype=np.int64)) is not None:
        raise InconsistencyError("classes do not satisfy axioms (1)-(2)")
    p = _product_coefficients(S, _class_representatives(S))
    w = _closure_witness(S, s.relation, p)
    if w is not None:
        raise InconsistencyError(
            f"A_{w['i']} A_{w['j']} is not in the span of the classes", witness=w
        )
    p.setflags(write=False)
    return IntersectionTensor(p, s.transpose_map)


def fuse(s: AssociationScheme, partition: Iterable[Iterable[int]]) -> AssociationScheme:
    """Sum classes along a partition of class indices, then re-verify.

    The block containing class 0 must be {0}; blocks keep the given order
    with that block moved to the front.
    """
    blocks = [sorted(set(int(i) for i in b)) for b in partition]
    flat = sorted(i for b in blocks for i in b)
    if flat != list(range(s.d + 1)):
        raise ParameterError("partition must cover every class index exactly once")
    blocks.sort(key=lambda b: b != [0])
    if blocks[0] != [0]:
        raise ParameterError("class 0 must form its own block")
    index = np.zeros(s.d + 1, dtype=np.int64)
    for k, b in enumerate(blocks):
        index[b] = k
    fused = _from_relation(index[s.relation])
    report = verify_axioms(fused)
    if not report.is_scheme:
        axiom, witness = report.first_failure()
        raise InconsistencyError(
            f"fused classes violate axiom ({axiom})", witness=witness
        )
    return fused
