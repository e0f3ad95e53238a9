"""Entangled Markov chains: truncated states, local expectations, Markov operators.

Site ordering follows ``np.kron``: site 0 is the most significant tensor
factor, so a vector on sites 0..n has shape ``(|S|,) * (n+1)`` when reshaped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError, ResourceError, ShapeError, WindowError
from .qmc import check_distribution, check_stochastic
from .tolerances import DEFAULT_TOL, Tolerances

AMPLITUDE_CAP = 2**16
DEFAULT_SITES = 12


@dataclass(frozen=True, eq=False)
class EntangledChainSpec:
    p0: np.ndarray
    t: np.ndarray
    max_level: int | None = None

    def __post_init__(self):
        p0 = np.asarray(self.p0, dtype=np.float64)
        t = np.asarray(self.t, dtype=np.float64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or p0.shape != (t.shape[0],):
            raise ShapeError("p0 must have length |S| and t must be |S| x |S|")
        check_distribution(p0)
        check_stochastic(t)
        # clip the eps-slack so square roots stay real
        p0, t = np.clip(p0, 0.0, None), np.clip(t, 0.0, None)
        cap = self.level_cap(t.shape[0])
        wanted = DEFAULT_SITES - 1 if self.max_level is None else int(self.max_level)
        level = min(wanted, cap)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "max_level", level)

    @staticmethod
    def level_cap(size: int) -> int:
        """Largest n with size^(n+1) <= 2^16."""
        if size == 1:
            return 64
        return int(math.floor(math.log(AMPLITUDE_CAP, size) + 1e-12)) - 1

    @property
    def size(self) -> int:
        return self.t.shape[0]

    @property
    def sqrt_t(self) -> np.ndarray:
        return np.sqrt(self.t)

    def check_level(self, n: int) -> None:
        if n < 0 or n > self.max_level:
            raise ResourceError(
                f"level {n} outside 0..{self.max_level}",
                witness={"n": n, "max_level": self.max_level},
            )


@dataclass(frozen=True, eq=False)
class TruncatedState:
    level: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def build_state(spec: EntangledChainSpec, n: int, method: str = "product") -> TruncatedState:
    """Psi_n(j_0..j_n) = sqrt(p_j0) prod sqrt(t_{j_a j_a+1}).

    ``method="product"`` multiplies the amplitude factors directly;
    ``method="isometry"`` applies V_0, ..., V_{n-1} to sum_j sqrt(p_j) e_j.
    """
    spec.check_level(n)
    if method == "isometry":
        vec = np.sqrt(spec.p0)
        for site in range(n):
            vec = apply_isometry(spec, site, vec)
        return TruncatedState(n, vec)
    if method != "product":
        raise ParameterError(f"unknown construction {method!r}")
    R = spec.sqrt_t
    amp = np.sqrt(spec.p0)
    for _ in range(n):
        amp = amp[..., :, None] * R
    return TruncatedState(n, amp.reshape(-1))


def isometry(t: np.ndarray) -> np.ndarray:
    """V: e_j -> sum_k sqrt(t_jk) e_j (x) e_k as an |S|^2 x |S| matrix."""
    size = t.shape[0]
    V = np.zeros((size * size, size))
    for j in range(size):
        V[j * size:(j + 1) * size, j] = np.sqrt(t[j])
    return V


def apply_isometry(spec: EntangledChainSpec, site: int, vector: np.ndarray) -> np.ndarray:
    """Extend a vector on sites 0..site to sites 0..site+1."""
    size = spec.size
    vector = np.asarray(vector)
    if vector.ndim != 1 or vector.shape[0] != size ** (site + 1):
        raise ShapeError(
            f"vector of length {vector.shape} does not live on sites 0..{site}",
            witness={"expected": size ** (site + 1)},
        )
    spec.check_level(site + 1)
    head = vector.reshape(-1, size)
    out = head[:, :, None] * spec.sqrt_t[None, :, :]
    return out.reshape(-1)


@dataclass(frozen=True, eq=False)
class LocalObservable:
    """Operator on sites 0..k, acting as the identity beyond."""

    matrix: np.ndarray
    size: int

    def __post_init__(self):
        M = np.asarray(self.matrix)
        dim = M.shape[0]
        if M.ndim != 2 or M.shape[1] != dim:
            raise ShapeError("observable must be square")
        k = round(math.log(dim, self.size)) - 1 if self.size > 1 else 0
        if self.size ** (k + 1) != dim:
            raise ShapeError(f"dimension {dim} is not a power of {self.size}")
        if np.abs(M - M.conj().T).max() > DEFAULT_TOL.zero:
            raise ParameterError("observable is not Hermitian")
        object.__setattr__(self, "matrix", M)

    @property
    def window(self) -> int:
        """k such that the observable lives on sites 0..k."""
        if self.size == 1:
            return 0
        return round(math.log(self.matrix.shape[0], self.size)) - 1

    @classmethod
    def product(cls, factors: Sequence[np.ndarray]) -> "LocalObservable":
        M = factors[0]
        for F in factors[1:]:
            M = np.kron(M, F)
        return cls(M, np.asarray(factors[0]).shape[0])


def local_expectation(spec: EntangledChainSpec, obs: LocalObservable, n: int) -> float:
    """<Psi_n, (A (x) 1) Psi_n> for A on sites 0..k, requiring n >= k+1."""
    k = obs.window
    if obs.size != spec.size:
        raise ShapeError("observable acts on a different site dimension")
    if n <= k:
        raise WindowError(f"level {n} must exceed window end {k}", witness={"n": n, "k": k})
    psi = build_state(spec, n).amplitudes.reshape(obs.matrix.shape[0], -1)
    value = np.vdot(psi, obs.matrix @ psi)
    return float(value.real)


# ---------------------------------------------------------------------------
# Markov operators and transition expectations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MarkovOperator:
    """P(A)_ij = sum_kl sqrt(t_ik t_jl) a_kl, i.e. P(A) = R A R^T with R = sqrt(t)."""

    sqrt_t: np.ndarray

    def __call__(self, A: np.ndarray) -> np.ndarray:
        R = self.sqrt_t
        return R @ np.asarray(A) @ R.T

    def identity_image(self) -> np.ndarray:
        R = self.sqrt_t
        return np.einsum("ik,jk->ij", R, R)


def markov_operator(t: np.ndarray) -> MarkovOperator:
    t = np.asarray(t, dtype=np.float64)
    check_stochastic(t)
    return MarkovOperator(np.sqrt(np.clip(t, 0.0, None)))


@dataclass(frozen=True)
class EntanglementReport:
    entangled: bool
    witness: tuple | None
    value: float | None


def is_entangled(t: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> EntanglementReport:
    """P(I) != I, with the first offending entry in row-major order."""
    PI = markov_operator(t).identity_image()
    dev = np.abs(PI - np.eye(PI.shape[0]))
    hits = np.argwhere(dev > tol.zero)
    if len(hits) == 0:
        return EntanglementReport(False, None, None)
    i, j = (int(v) for v in hits[0])
    return EntanglementReport(True, (i, j), float(PI[i, j]))


def schur_compression(X: np.ndarray) -> np.ndarray:
    """m(X)_ij = X_{(i,i),(j,j)} for X on C^n (x) C^n; m(A (x) B) = A o B."""
    n = math.isqrt(X.shape[0])
    if n * n != X.shape[0] or X.shape[0] != X.shape[1]:
        raise ShapeError("X must act on a square tensor product")
    diag = np.arange(n) * (n + 1)
    return X[np.ix_(diag, diag)]


def transition_expectation(kind: str, op: np.ndarray, M: np.ndarray, N: np.ndarray) -> np.ndarray:
    """m(M (x) K) with K = op o N ("diagonal", op = Schur multiplier)
    or K = P(N) ("entangled", op = stochastic t)."""
    M, N, op = np.asarray(M), np.asarray(N), np.asarray(op)
    if M.shape != N.shape or M.ndim != 2 or M.shape[0] != M.shape[1] or op.shape != M.shape:
        raise ShapeError("M, N and the operator data must be equal square shapes")
    if kind == "diagonal":
        K = op * N
    elif kind == "entangled":
        K = markov_operator(op)(N)
    else:
        raise ParameterError(f"unknown transition expectation kind {kind!r}")
    return M * K


def qmc_evaluate(spec: EntangledChainSpec, observables: Sequence[np.ndarray]) -> float:
    """phi_0[E(A_0 (x) E(A_1 (x) ... E(A_k (x) 1)))] with E(X) = V* X V."""
    k = len(observables) - 1
    spec.check_level(k + 1)
    size = spec.size
    V = isometry(spec.t)
    B = np.eye(size)
    for A in reversed(observables):
        A = np.asarray(A)
        if A.shape != (size, size):
            raise ShapeError("each observable must be |S| x |S|")
        B = V.conj().T @ np.kron(A, B) @ V
    xi = np.sqrt(spec.p0)
    return float(np.vdot(xi, B @ xi).real)
