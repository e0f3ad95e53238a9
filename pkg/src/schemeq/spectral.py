"""Primitive idempotents, Krein parameters and the hypergroup of a commutative scheme.

Idempotents are found numerically: a random Hermitian element of the
Bose-Mesner algebra is diagonalized, its eigenvalues clustered, and each
cluster projector is projected back onto the algebra (orthogonal projection
with respect to the trace inner product), which removes the rounding noise
left by the dense eigensolver.

Ordering of the idempotents: E_0 = J/n first, then ascending multiplicity,
then by the eigenvalues on classes 1, 2, ... swept counter-clockwise from the
positive real axis (for real spectra this is decreasing eigenvalue).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BasisError,
    CharacterTableError,
    CommutativityError,
    DegeneracyError,
    KreinViolationError,
)
from .groups import GroupTable, class_functions
from .scheme import AssociationScheme, build_conjugacy_scheme, conjugacy_classes
from .tolerances import DEFAULT_SEED, DEFAULT_TOL, Tolerances


@dataclass(frozen=True, eq=False)
class SpectralData:
    E: tuple
    m: tuple
    eigenmatrix: np.ndarray
    seed: int | None = None

    @property
    def e(self) -> tuple:
        return tuple(E / m for E, m in zip(self.E, self.m))

    @property
    def size(self) -> int:
        return len(self.E)

    @property
    def is_real(self) -> bool:
        return all(not np.iscomplexobj(E) for E in self.E)

    def dual_map(self, tol: Tolerances = DEFAULT_TOL) -> tuple:
        """j -> j* with E_{j*} = conj(E_j)."""
        out = []
        for E in self.E:
            diffs = [np.abs(F - np.conj(E)).max() for F in self.E]
            out.append(int(np.argmin(diffs)))
        return tuple(out)

    def permuted(self, order: Sequence[int]) -> "SpectralData":
        order = list(order)
        return SpectralData(
            tuple(self.E[j] for j in order),
            tuple(self.m[j] for j in order),
            self.eigenmatrix[order],
            self.seed,
        )


def algebra_coordinates(s: AssociationScheme, M: np.ndarray) -> np.ndarray:
    """Coefficients c_i with proj(M) = sum_i c_i A_i (trace inner product)."""
    R = s.relation.ravel()
    counts = s.n * s.valencies.astype(np.float64)
    flat = np.asarray(M).ravel()
    re = np.bincount(R, weights=flat.real, minlength=s.d + 1)
    if np.iscomplexobj(flat):
        im = np.bincount(R, weights=flat.imag, minlength=s.d + 1)
        return (re + 1j * im) / counts
    return re / counts


def from_coordinates(s: AssociationScheme, c: np.ndarray) -> np.ndarray:
    return np.asarray(c)[s.relation]


def _phase_key(z: complex, digits: int = 7) -> tuple:
    """Counter-clockwise sweep from the positive real axis.

    Positive reals come first, largest first; zero closes that group; the
    negative axis is ordered from zero outward, i.e. by decreasing value.
    """
    eps = 10.0 ** -digits
    mag = round(abs(z), digits)
    if mag == 0:
        return (0.0, 0.0)
    phase = math.atan2(z.imag, z.real) % (2 * math.pi)
    if phase < eps or phase > 2 * math.pi - eps:
        return (0.0, -mag)
    if abs(phase - math.pi) < eps:
        return (round(math.pi, digits), mag)
    return (round(phase, digits), -mag)


def _order_key(eigen_row: np.ndarray, mult: int) -> tuple:
    return (mult,) + tuple(_phase_key(complex(z)) for z in eigen_row[1:])


def _finish(s: AssociationScheme, projectors: list, tol: Tolerances, seed=None, sort=True):
    E = []
    for P in projectors:
        c = algebra_coordinates(s, P)
        if np.iscomplexobj(c) and np.abs(c.imag).max() <= tol.zero:
            c = c.real
        E.append(from_coordinates(s, c))
    traces = [np.trace(X).real for X in E]
    m = []
    for X, tr in zip(E, traces):
        mult = int(round(tr))
        rank = int(np.linalg.matrix_rank(X, tol=max(tol.num, 1e-6)))
        if abs(tr - mult) > 1e-6 or rank != mult:
            raise DegeneracyError(
                f"idempotent trace {tr:.6g} / rank {rank} inconsistent", witness={"trace": tr}
            )
        m.append(mult)
    eig = np.array(
        [[np.trace(A @ X) / mj for A in s.stack] for X, mj in zip(E, m)]
    )
    if not np.iscomplexobj(np.concatenate([np.ravel(X) for X in E])):
        eig = eig.real
    elif np.abs(eig.imag).max() <= tol.zero:
        eig = eig.real
    idx = list(range(len(E)))
    # E_0 is the projector with eigenvalue v_i on every class, i.e. J/n
    j0 = int(np.argmin([np.abs(X - 1.0 / s.n).max() for X in E]))
    if sort:
        rest = sorted((j for j in idx if j != j0), key=lambda j: _order_key(eig[j], m[j]))
    else:
        rest = [j for j in idx if j != j0]
    order = [j0] + rest
    for X in E:
        X.setflags(write=False)
    return SpectralData(
        tuple(E[j] for j in order), tuple(m[j] for j in order), eig[order], seed
    )


def _separating_element(s: AssociationScheme, rng: np.random.Generator) -> np.ndarray:
    D = s.d + 1
    a = rng.uniform(0.5, 1.5, size=D)
    b = rng.uniform(0.5, 1.5, size=D)
    S = s.stack.astype(np.float64)
    sym = np.einsum("i,ixy->xy", a, (S + S.transpose(0, 2, 1)) / 2)
    anti = np.einsum("i,ixy->xy", b, (S - S.transpose(0, 2, 1)) / 2)
    if not anti.any():
        return sym
    return sym + 1j * anti


def _cluster(vals: np.ndarray, gap: float) -> list:
    clusters, start = [], 0
    for k in range(1, len(vals) + 1):
        if k == len(vals) or vals[k] - vals[k - 1] > gap:
            clusters.append((start, k))
            start = k
    return clusters


def primitive_idempotents(
    s: AssociationScheme, tol: Tolerances = DEFAULT_TOL, seed: int = DEFAULT_SEED
) -> SpectralData:
    """Spectral basis E_0..E_d of a commutative scheme."""
    if not s.is_commutative:
        raise CommutativityError("primitive idempotents need a commutative scheme")
    gap = tol.eig_gap(s.n)
    smallest = math.inf
    for attempt in (seed, seed + 1):
        rng = np.random.default_rng(attempt)
        H = _separating_element(s, rng)
        vals, vecs = np.linalg.eigh(H)
        clusters = _cluster(vals, gap)
        if len(clusters) > 1:
            smallest = min(
                smallest, min(vals[b] - vals[b - 1] for _, b in clusters[:-1])
            )
        if len(clusters) != s.d + 1:
            continue
        projectors = [vecs[:, a:b] @ vecs[:, a:b].conj().T for a, b in clusters]
        sd = _finish(s, projectors, tol, seed=attempt)
        if _idempotent_residual(sd) <= tol.zero:
            return sd
    raise DegeneracyError(
        f"could not resolve {s.d + 1} common eigenspaces (smallest cluster gap {smallest:.3g})",
        witness={"gap": smallest, "expected": s.d + 1},
    )


def _idempotent_residual(sd: SpectralData) -> float:
    worst = 0.0
    n = sd.E[0].shape[0]
    for j, Ej in enumerate(sd.E):
        for k, Ek in enumerate(sd.E):
            target = Ej if j == k else 0.0
            worst = max(worst, float(np.abs(Ej @ Ek - target).max()))
    total = sum(sd.E)
    return max(worst, float(np.abs(total - np.eye(n)).max()))


def spectral_residuals(s: AssociationScheme, sd: SpectralData) -> dict:
    """Max-norm residuals of the SpectralData invariants."""
    n = s.n
    recon = max(
        float(np.abs(sum(sd.eigenmatrix[j, i] * sd.E[j] for j in range(sd.size)) - A).max())
        for i, A in enumerate(s.stack)
    )
    return {
        "idempotent": _idempotent_residual(sd),
        "E0": float(np.abs(sd.E[0] - 1.0 / n).max()),
        "reconstruction": recon,
        "multiplicity_sum": int(sum(sd.m)),
    }


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CharacterTable:
    """chars[j, c] = value of the j-th irreducible character on class c."""

    class_sizes: tuple
    chars: np.ndarray
    dims: tuple = field(default=())

    def __post_init__(self):
        chars = np.asarray(self.chars, dtype=np.complex128)
        object.__setattr__(self, "chars", chars)
        object.__setattr__(self, "class_sizes", tuple(int(c) for c in self.class_sizes))
        if not self.dims:
            object.__setattr__(self, "dims", tuple(int(round(z.real)) for z in chars[:, 0]))

    def orthogonality_residual(self) -> float:
        sizes = np.array(self.class_sizes, dtype=np.float64)
        gram = (self.chars * sizes) @ self.chars.conj().T
        return float(np.abs(gram - sum(self.class_sizes) * np.eye(len(sizes))).max())


def builtin_character_table(g: GroupTable) -> CharacterTable:
    """Character table of a named group, columns in conjugacy-scheme class order."""
    reps = [c[0] for c in conjugacy_classes(g)]
    sizes = [len(c) for c in conjugacy_classes(g)]
    rows = [[complex(f(g.label(x))) for x in reps] for f in class_functions(g)]
    return CharacterTable(tuple(sizes), np.array(rows))


def idempotents_from_characters(
    g: GroupTable, ct: CharacterTable, tol: Tolerances = DEFAULT_TOL
) -> SpectralData:
    """E_j = dim(chi_j)/|G| * sum_x chi_j(x) A_x on the conjugacy scheme.

    The result keeps the table's row order (trivial character moved first).
    """
    s = build_conjugacy_scheme(g)
    classes = conjugacy_classes(g)
    if tuple(len(c) for c in classes) != ct.class_sizes:
        raise CharacterTableError(
            "class sizes do not match the conjugacy classes",
            witness={"expected": [len(c) for c in classes], "got": list(ct.class_sizes)},
        )
    if ct.chars.shape != (s.d + 1, s.d + 1):
        raise CharacterTableError("character table must be square over the classes")
    res = ct.orthogonality_residual()
    if res > tol.num:
        raise CharacterTableError(
            f"row orthogonality fails (residual {res:.3g})", witness={"residual": res}
        )
    projectors = []
    for row, dim in zip(ct.chars, ct.dims):
        coeffs = dim / g.order * row
        if np.abs(coeffs.imag).max() <= tol.zero:
            coeffs = coeffs.real
        projectors.append(from_coordinates(s, coeffs))
    return _finish(s, projectors, tol, sort=False)


def match_order(sd: SpectralData, reference: Sequence[np.ndarray]) -> list:
    """Index list ``order`` with sd.E[order[j]] closest to reference[j]."""
    order = []
    for R in reference:
        diffs = [np.abs(E - R).max() for E in sd.E]
        order.append(int(np.argmin(diffs)))
    if sorted(order) != list(range(sd.size)):
        raise DegeneracyError("reference idempotents do not match one-to-one")
    return order


# ---------------------------------------------------------------------------
# Krein parameters and the hypergroup
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KreinTensor:
    """E_i o E_j = (1/n) sum_k q[k, i, j] E_k."""

    q: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class HypergroupTensor:
    """h[i, j, k] = (e_i * e_j)(k); ``c`` holds the raw expansion coefficients."""

    h: np.ndarray
    c: np.ndarray
    residual: float

    def row_sums(self) -> np.ndarray:
        return self.h.sum(axis=2)

    def permuted(self, order: Sequence[int]) -> "HypergroupTensor":
        o = np.asarray(order)
        return HypergroupTensor(self.h[np.ix_(o, o, o)], self.c[np.ix_(o, o, o)], self.residual)


def _schur_traces(sd: SpectralData) -> np.ndarray:
    """W[k, i, j] = tr(E_k (E_i o E_j))."""
    E = np.stack(sd.E)
    return np.einsum("kba,iab,jab->kij", E, E, E, optimize=True)


def _realify(X: np.ndarray, tol: Tolerances, what: str) -> np.ndarray:
    if np.iscomplexobj(X):
        worst = float(np.abs(X.imag).max())
        if worst > tol.num:
            raise BasisError(f"{what} has imaginary part {worst:.3g}", witness={"imag": worst})
        return X.real.copy()
    return X


def _expansion_residual(sd: SpectralData, coeff: np.ndarray, basis: Sequence, left) -> float:
    worst = 0.0
    D = sd.size
    for i in range(D):
        for j in range(D):
            target = left(i, j)
            recon = sum(coeff[k, i, j] * basis[k] for k in range(D))
            worst = max(worst, float(np.abs(target - recon).max()))
    return worst


def krein_parameters(
    s: AssociationScheme, sd: SpectralData, tol: Tolerances = DEFAULT_TOL
) -> KreinTensor:
    n = s.n
    m = np.array(sd.m, dtype=np.float64)
    W = _schur_traces(sd)
    q = _realify(n * W / m[:, None, None], tol, "Krein parameter")
    residual = _expansion_residual(
        sd, q / n, sd.E, lambda i, j: sd.E[i] * sd.E[j]
    )
    if residual > tol.num:
        raise BasisError(
            f"Schur products not reproduced by Krein expansion (residual {residual:.3g})",
            witness={"residual": residual},
        )
    q.setflags(write=False)
    return KreinTensor(q, residual)


def hypergroup(
    s: AssociationScheme, sd: SpectralData, tol: Tolerances = DEFAULT_TOL
) -> HypergroupTensor:
    """Convolution weights h[i, j, k] = n * (coefficient of e_k in e_i o e_j)."""
    m = np.array(sd.m, dtype=np.float64)
    e = sd.e
    W = _schur_traces(sd)
    # e_i o e_j = sum_k c[k] e_k with c[k] = tr(E_k (e_i o e_j))
    c = _realify(W / (m[None, :, None] * m[None, None, :]), tol, "hypergroup weight")
    residual = _expansion_residual(sd, c, e, lambda i, j: e[i] * e[j])
    if residual > tol.num:
        raise BasisError(
            f"e_i o e_j not reproduced in the e-basis (residual {residual:.3g})",
            witness={"residual": residual},
        )
    c = c.transpose(1, 2, 0)
    h = s.n * c
    low = float(h.min())
    if low < -tol.zero:
        i, j, k = (int(v) for v in np.unravel_index(np.argmin(h), h.shape))
        raise KreinViolationError(
            f"negative convolution weight {low:.3g}", witness={"i": i, "j": j, "k": k, "value": low}
        )
    h.setflags(write=False)
    c.setflags(write=False)
    return HypergroupTensor(h, c, residual)


def hypergroup_from_krein(kt: KreinTensor, sd: SpectralData) -> np.ndarray:
    """h[i, j, k] = m_k q[k, i, j] / (m_i m_j)."""
    m = np.array(sd.m, dtype=np.float64)
    return (m[:, None, None] * kt.q / (m[None, :, None] * m[None, None, :])).transpose(1, 2, 0)


def character_hypergroup(ct: CharacterTable) -> np.ndarray:
    """h[i, j, k] = dim_k / (dim_i dim_j) * mult(chi_k, chi_i chi_j)."""
    sizes = np.array(ct.class_sizes, dtype=np.float64)
    order = sizes.sum()
    X = ct.chars
    dims = np.array(ct.dims, dtype=np.float64)
    mult = np.einsum("ic,jc,kc,c->ijk", X, X, X.conj(), sizes) / order
    mult = np.rint(mult.real)
    return dims[None, None, :] * mult / (dims[:, None, None] * dims[None, :, None])


def dft_idempotents(n: int) -> list:
    """E_j[y, z] = omega^(j (y - z)) / n for the cyclic group scheme C_n."""
    y = np.arange(n)
    diff = y[:, None] - y[None, :]
    return [np.exp(2j * cmath.pi * j * diff / n) / n for j in range(n)]
