"""Interacting Fock spaces.

One-mode spaces come from Jacobi sequences (omega_n, alpha_n) and from rooted
graphs via their distance stratification.  The multi-mode construction grades
the Bose-Mesner algebra by monomial degree in the classes B_1..B_d and splits
each multiplication operator into creation, preservation and annihilation
blocks.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    CommutativityError,
    GraphInputError,
    JacobiConditionError,
    ParameterError,
    TruncationError,
)
from .scheme import AssociationScheme, IntersectionTensor, build_grassmann, intersection_numbers
from .tolerances import DEFAULT_TOL, Tolerances


# ---------------------------------------------------------------------------
# Jacobi sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JacobiData:
    """omega_1..omega_L and alpha_1..alpha_{L+1}.

    ``terminated`` means omega_{L+1} = 0, so the (L+1)-dimensional matrix is
    the whole one-mode space rather than a truncation.  A zero anywhere in
    ``omega`` implies it.
    """

    omega: tuple
    alpha: tuple
    terminated: bool = False

    def __post_init__(self):
        omega = tuple(float(w) for w in self.omega)
        alpha = tuple(float(a) for a in self.alpha)
        if len(alpha) != len(omega) + 1:
            raise ParameterError(
                f"need len(alpha) = len(omega) + 1, got {len(alpha)} and {len(omega)}"
            )
        for n, w in enumerate(omega, start=1):
            if w < 0:
                raise ParameterError(f"omega_{n} = {w} is negative", witness={"n": n})
        zeros = [n for n, w in enumerate(omega, start=1) if w == 0]
        if zeros:
            later = [n for n, w in enumerate(omega, start=1) if n > zeros[0] and w != 0]
            if later:
                raise JacobiConditionError(
                    f"omega_{zeros[0]} = 0 but omega_{later[0]} != 0",
                    witness={"zero": zeros[0], "nonzero": later[0]},
                )
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "terminated", bool(self.terminated or zeros))

    @property
    def L(self) -> int:
        return len(self.omega)


@dataclass(frozen=True, eq=False)
class LadderTriple:
    Bplus: np.ndarray
    Bminus: np.ndarray
    Bzero: np.ndarray
    exact: bool = False
    jacobi: JacobiData | None = None

    @property
    def T(self) -> np.ndarray:
        return self.Bplus + self.Bminus + self.Bzero


def ifs_from_jacobi(jd: JacobiData) -> LadderTriple:
    """B+ Phi_n = sqrt(omega_{n+1}) Phi_{n+1}, B0 Phi_n = alpha_{n+1} Phi_n."""
    dim = jd.L + 1
    Bplus = np.zeros((dim, dim))
    for n, w in enumerate(jd.omega):
        Bplus[n + 1, n] = math.sqrt(w)
    return LadderTriple(Bplus, Bplus.T.copy(), np.diag(jd.alpha), exact=jd.terminated, jacobi=jd)


def _weighted_form(jd: JacobiData) -> np.ndarray:
    """D^-1 T D with unit super-diagonal and omega below: same vacuum moments,
    no square roots."""
    W = np.diag(np.asarray(jd.alpha))
    for n, w in enumerate(jd.omega):
        W[n, n + 1] = 1.0
        W[n + 1, n] = w
    return W


def _integer_valued(T: np.ndarray) -> bool:
    return np.isrealobj(T) and bool(np.all(T == np.rint(T)))


def vacuum_moments(T, m_max: int, exact_truncation: bool | None = None) -> list:
    """<Phi_0, T^m Phi_0> for m = 0..m_max.

    ``T`` is a matrix, a LadderTriple or JacobiData.  Unless the truncation
    is known to be exact, the matrix must have L >= ceil(m_max / 2) so the
    moments cannot see the cut.  Integer Jacobi data or integer matrices
    give exact Python ints.
    """
    if isinstance(T, LadderTriple) and T.jacobi is not None:
        T = T.jacobi
    if isinstance(T, JacobiData):
        exact = T.terminated if exact_truncation is None else exact_truncation
        T = _weighted_form(T)
    elif isinstance(T, LadderTriple):
        exact = T.exact if exact_truncation is None else exact_truncation
        T = T.T
    else:
        exact = bool(exact_truncation)
    T = np.asarray(T)
    L = T.shape[0] - 1
    need = math.ceil(m_max / 2)
    if not exact and L < need:
        raise TruncationError(
            f"truncation L={L} too small for moments up to {m_max}; need L >= {need}",
            witness={"L": L, "required_L": need},
        )
    if _integer_valued(T):
        M = T.astype(np.int64).astype(object)
        v = np.zeros(T.shape[0], dtype=object)
        v[:] = 0
        v[0] = 1
    else:
        M = T
        v = np.zeros(T.shape[0], dtype=T.dtype)
        v[0] = 1
    out, w = [], v.copy()
    for _ in range(m_max + 1):
        out.append(w[0])
        w = M.dot(w)
    return [int(x) if isinstance(x, int) else float(np.real(x)) for x in out]


def closed_walks(adjacency: np.ndarray, root: int, m_max: int) -> list:
    """Exact counts <delta_root, A^m delta_root>, m = 0..m_max (Python ints)."""
    A = np.asarray(adjacency).astype(np.int64).astype(object)
    v = np.zeros(A.shape[0], dtype=object)
    v[:] = 0
    v[root] = 1
    out = []
    for _ in range(m_max + 1):
        out.append(int(v[root]))
        v = A.dot(v)
    return out


# ---------------------------------------------------------------------------
# stratified graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StratifiedGraph:
    adjacency: np.ndarray
    root: int
    distance: np.ndarray  # -1 for vertices outside the root's component
    strata: tuple

    @property
    def excluded(self) -> list:
        return [int(x) for x in np.flatnonzero(self.distance < 0)]

    @property
    def sizes(self) -> list:
        return [len(V) for V in self.strata]

    def radial_vectors(self) -> np.ndarray:
        """Rows Phi_n = |V_n|^(-1/2) sum_{x in V_n} delta_x."""
        Phi = np.zeros((len(self.strata), self.adjacency.shape[0]))
        for k, V in enumerate(self.strata):
            Phi[k, V] = 1.0 / math.sqrt(len(V))
        return Phi


def graph_from_edges(n: int, edges: Sequence[Sequence[int]]) -> np.ndarray:
    A = np.zeros((n, n), dtype=np.int64)
    for x, y in edges:
        if x == y:
            raise GraphInputError(f"self-loop at {x}", witness=[x, y])
        A[x, y] = A[y, x] = 1
    return A


def _check_graph(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphInputError("adjacency must be square")
    bad = np.argwhere(A != A.T)
    if len(bad):
        raise GraphInputError("adjacency is not symmetric", witness=[int(v) for v in bad[0]])
    if ((A != 0) & (A != 1)).any() or np.diag(A).any():
        raise GraphInputError("adjacency must be 0/1 with zero diagonal")
    return A.astype(np.int64)


def stratify(adjacency: np.ndarray, root: int) -> StratifiedGraph:
    """Distance partition V_0, V_1, ... from ``root`` by breadth-first search."""
    A = _check_graph(adjacency)
    n = A.shape[0]
    if not 0 <= root < n:
        raise GraphInputError(f"root {root} out of range", witness=[root])
    dist = np.full(n, -1, dtype=np.int64)
    dist[root] = 0
    queue = deque([root])
    neighbours = [np.flatnonzero(row) for row in A]
    while queue:
        x = queue.popleft()
        for y in neighbours[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(y)
    depth = int(dist.max())
    strata = tuple(np.flatnonzero(dist == k) for k in range(depth + 1))
    A.setflags(write=False)
    return StratifiedGraph(A, root, dist, strata)


def quantum_decomposition(sg: StratifiedGraph) -> tuple:
    """(A+, A-, A0): edges raising, lowering and preserving the distance from the root.

    Columns index the source vertex y in V_n, rows the target x in V_{n+eps}.
    Edges between excluded vertices are dropped.
    """
    A, dist = sg.adjacency, sg.distance
    inside = (dist[:, None] >= 0) & (dist[None, :] >= 0)
    step = dist[:, None] - dist[None, :]
    Aplus = np.where(inside & (step == 1), A, 0)
    Azero = np.where(inside & (step == 0), A, 0)
    return Aplus, Aplus.T.copy(), Azero


@dataclass(frozen=True, eq=False)
class RadialJacobi:
    jacobi: JacobiData
    vectors: np.ndarray
    drg_consistent: bool


def radial_jacobi(sg: StratifiedGraph, tol: Tolerances = DEFAULT_TOL) -> RadialJacobi:
    """Three-term recursion of A at the cyclic vector delta_root.

    Each new vector is orthogonalized against the previous two only; the
    recursion stops once the residual norm drops below tol.zero.
    """
    A = sg.adjacency.astype(np.float64)
    n = A.shape[0]
    q_prev = np.zeros(n)
    q = np.zeros(n)
    q[sg.root] = 1.0
    vectors, omega, alpha = [q], [], []
    beta = 0.0
    for _ in range(n):
        w = A @ q
        a = float(q @ w)
        alpha.append(a)
        r = w - a * q - beta * q_prev
        norm = float(np.linalg.norm(r))
        if norm < tol.zero:
            break
        omega.append(norm * norm)
        q_prev, q, beta = q, r / norm, norm
        vectors.append(q)
    V = np.array(vectors)
    Phi = sg.radial_vectors()
    consistent = V.shape == Phi.shape and float(np.abs(V - Phi).max()) < tol.num
    return RadialJacobi(JacobiData(tuple(omega), tuple(alpha), terminated=True), V, consistent)


def spidernet(a: int, b: int, c: int, depth: int) -> np.ndarray:
    """Truncated spidernet: root of degree a; every other vertex has one parent,
    c children and b-1-c neighbours inside its own stratum (circulant)."""
    r = b - 1 - c
    if a < 1 or c < 1 or r < 0 or depth < 1:
        raise ParameterError("spidernet needs a >= 1, c >= 1, b >= c + 1, depth >= 1")
    sizes = [1, a] + [a * c**k for k in range(1, depth)]
    offsets = np.cumsum([0] + sizes)
    n = int(offsets[-1])
    A = np.zeros((n, n), dtype=np.int64)
    for child in range(1, a + 1):
        A[0, child] = A[child, 0] = 1
    for level in range(1, depth + 1):
        start, size = int(offsets[level]), sizes[level]
        if r:
            if size <= r or (r % 2 and size % 2):
                raise ParameterError(
                    f"stratum {level} of size {size} cannot carry intra-degree {r}"
                )
            steps = list(range(1, r // 2 + 1)) + ([size // 2] if r % 2 else [])
            for i in range(size):
                for s in steps:
                    x, y = start + i, start + (i + s) % size
                    A[x, y] = A[y, x] = 1
        if level < depth:
            nxt = int(offsets[level + 1])
            for i in range(size):
                for k in range(c):
                    x, y = start + i, nxt + i * c + k
                    A[x, y] = A[y, x] = 1
    return A


def path_graph(n: int) -> np.ndarray:
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])


# ---------------------------------------------------------------------------
# multi-mode IFS on the Bose-Mesner algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MultiModeIFS:
    """Graded orthonormal basis of the algebra and the multiplication operators.

    Vectors are class coordinates c (M = sum_i c_i A_i); the inner product
    tr(M* N) is sum_i conj(c_i) c'_i n v_i.  ``basis`` has one orthonormal
    column per direction, ``degrees`` its monomial degree.
    """

    intersection: IntersectionTensor
    gram: np.ndarray
    basis: np.ndarray
    degrees: np.ndarray
    modes: tuple
    transpose_map: tuple = field(default=())

    @property
    def top_degree(self) -> int:
        return int(self.degrees.max())

    def mode_matrix(self, j: int) -> np.ndarray:
        """Multiplication by B_j in the orthonormal graded basis."""
        return self.coordinates_matrix(self.intersection.intersection_matrix(j))

    def coordinates_matrix(self, L: np.ndarray) -> np.ndarray:
        Q = self.basis
        return Q.conj().T @ self.gram @ L @ Q

    def projection(self, n: int) -> np.ndarray:
        """P_n in the graded basis."""
        return np.diag((self.degrees == n).astype(np.float64))

    def caps(self, j: int) -> tuple:
        """(a+_j, a0_j, a-_j) as matrices in the graded basis."""
        M = self.mode_matrix(j)
        step = self.degrees[:, None] - self.degrees[None, :]
        return (
            np.where(step == 1, M, 0.0),
            np.where(step == 0, M, 0.0),
            np.where(step == -1, M, 0.0),
        )

    def with_degrees(self, degrees: Sequence[int]) -> "MultiModeIFS":
        return replace(self, degrees=np.asarray(degrees))


def multimode_ifs(
    s: AssociationScheme,
    modes: Sequence[int] | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> MultiModeIFS:
    """Filtration by degree of monomials in B_j (j in ``modes``) applied to A_0."""
    if not s.is_commutative:
        raise CommutativityError("multi-mode IFS needs a commutative scheme")
    pt = intersection_numbers(s)
    modes = tuple(range(1, s.d + 1)) if modes is None else tuple(int(j) for j in modes)
    if any(not 1 <= j <= s.d for j in modes):
        raise ParameterError(f"modes must lie in 1..{s.d}")
    D = s.d + 1
    G = np.diag(s.n * s.valencies.astype(np.float64))
    mult = [pt.intersection_matrix(j).astype(np.float64) for j in modes]

    def inner(x, y):
        return x.conj() @ G @ y

    start = np.zeros(D)
    start[0] = 1.0 / math.sqrt(s.n)
    basis, degrees = [start], [0]
    frontier = [start]
    degree = 0
    while frontier and len(basis) < D:
        degree += 1
        candidates = [L @ x for x in frontier for L in mult]
        scale = max(math.sqrt(inner(c, c).real) for c in candidates)
        frontier = []
        for c in candidates:
            v = c.copy()
            for _ in range(2):
                for b in basis:
                    v = v - inner(b, v) * b
            norm = math.sqrt(max(inner(v, v).real, 0.0))
            if scale > 0 and norm > tol.gs * scale:
                v = v / norm
                basis.append(v)
                degrees.append(degree)
                frontier.append(v)
    Q = np.array(basis).T
    return MultiModeIFS(pt, G, Q, np.array(degrees), modes, s.transpose_map)


def three_term_check(mm: MultiModeIFS) -> float:
    """Largest |<P_m basis, B_j P_n basis>| with |m - n| >= 2, over the modes."""
    step = np.abs(mm.degrees[:, None] - mm.degrees[None, :])
    worst = 0.0
    for j in mm.modes:
        M = mm.mode_matrix(j)
        if (step >= 2).any():
            worst = max(worst, float(np.abs(M[step >= 2]).max()))
    return worst


def mode_sum_check(mm: MultiModeIFS) -> dict:
    """Sum over all modes of the CAP triples against multiplication by J - I.

    Returns the exact integer residual in class coordinates and the float
    residual in the graded basis.
    """
    p = mm.intersection
    D = p.p.shape[0]
    total = sum(p.intersection_matrix(j) for j in range(1, D))
    v = p.valencies
    target = np.array([[v[i] - (k == i) for i in range(D)] for k in range(D)], dtype=np.int64)
    exact = int(np.abs(total - target).max())
    caps = sum(sum(mm.caps(j)) for j in range(1, D))
    graded = float(np.abs(caps - mm.coordinates_matrix(target.astype(np.float64))).max())
    return {"exact_residual": exact, "graded_residual": graded}


# ---------------------------------------------------------------------------
# Grassmann comparison report
# ---------------------------------------------------------------------------

def _reference_formulas(v: int, d: int) -> list:
    """Published closed forms for J_q(v, d) in the ambient dimension v, for comparison."""
    top = min(d, v - d)
    rows = []
    for n in range(1, top + 1):
        rows.append(("p^{n-1}_{1,n}", "(2 - n)(v - n)", n, (n - 1, 1, n), (2 - n) * (v - n)))
        rows.append(("p^{n}_{1,n}", "n(v - 2)", n, (n, 1, n), n * (v - 2)))
        rows.append(("p^{n}_{1,n}", "n(v - 2n)", n, (n, 1, n), n * (v - 2 * n)))
    rows.append(("p^0_{1,1}", "d(v - d)", 1, (0, 1, 1), d * (v - d)))
    return rows


def grassmann_mode_parameters(q: int, v: int, d: int, tol: Tolerances = DEFAULT_TOL) -> dict:
    s = build_grassmann(q, v, d)
    pt = intersection_numbers(s)
    p = pt.p
    modes = []
    for j in range(1, d + 1):
        mm = multimode_ifs(s, modes=[j], tol=tol)
        M = mm.mode_matrix(j)
        levels = []
        for n in range(mm.top_degree + 1):
            here = np.flatnonzero(mm.degrees == n)
            entry = {"n": n}
            for name, eps in (("plus", 1), ("zero", 0), ("minus", -1)):
                there = np.flatnonzero(mm.degrees == n + eps)
                block = M[np.ix_(there, here)]
                entry[name] = np.abs(block).tolist() if block.size else []
            levels.append(entry)
        modes.append({"mode": j, "three_term": three_term_check(mm), "levels": levels})
    # distance-regular prediction omega_n = p^{n-1}_{1,n} p^{n}_{1,n-1} for mode 1
    drg = []
    mm1 = multimode_ifs(s, modes=[1], tol=tol)
    M1 = mm1.mode_matrix(1)
    for n in range(1, mm1.top_degree + 1):
        lo, hi = np.flatnonzero(mm1.degrees == n - 1), np.flatnonzero(mm1.degrees == n)
        computed = float(np.sum(np.abs(M1[np.ix_(hi, lo)]) ** 2))
        predicted = int(p[n - 1, 1, n] * p[n, 1, n - 1])
        drg.append({"n": n, "omega_ifs": computed, "omega_intersection": predicted,
                    "match": abs(computed - predicted) <= tol.num * max(1, predicted)})
    comparisons = []
    for quantity, formula, n, (k, i, j), value in _reference_formulas(v, d):
        computed = int(p[k, i, j])
        comparisons.append({
            "quantity": quantity, "n": n, "index": [k, i, j],
            "paper_formula": formula, "paper_value": value,
            "computed": computed, "match": computed == value,
        })
    return {
        "scheme": {"q": q, "v": v, "d": d, "n": s.n, "valencies": s.valencies.tolist()},
        "intersection_p_k_1_n": p[:, 1, :].tolist(),
        "intersection_p_k_0_n": p[:, 0, :].tolist(),
        "modes": modes,
        "drg_omega": drg,
        "comparisons": comparisons,
    }
