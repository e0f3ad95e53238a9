"""Quantum Markov chains T(M) = S o M on the adjacency algebra.

S is a convex combination of normalized idempotents e_i.  On the spectral
basis the map is stochastic after rescaling by n, which gives a classical
random walk on the hypergroup {e_0, ..., e_d}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvarianceError, ParameterError
from .scheme import AssociationScheme
from .spectral import SpectralData
from .tolerances import DEFAULT_TOL, Tolerances

CHOI_CAP = 4096


@dataclass(frozen=True, eq=False)
class TransitionOperator:
    scheme: AssociationScheme
    weights: np.ndarray
    multiplier: np.ndarray

    def __call__(self, M: np.ndarray) -> np.ndarray:
        return self.multiplier * M

    apply = __call__

    def class_coordinates(self, big: AssociationScheme | None = None, tol: Tolerances = DEFAULT_TOL):
        """Diagonal action on a class basis: T(A_x) = s_x A_x.

        ``big`` defaults to the scheme the operator was built on; pass the
        non-commutative parent scheme to act on its (larger) algebra.
        """
        big = big or self.scheme
        out = []
        for x, A in enumerate(big.classes):
            vals = self.multiplier[A.astype(bool)]
            if np.abs(vals - vals[0]).max() > tol.num:
                raise InvarianceError(
                    f"multiplier not constant on class {x}", witness={"class": x}
                )
            out.append(vals[0])
        return np.array(out)


def make_transition_operator(
    s: AssociationScheme,
    sd: SpectralData,
    weights: Sequence[float],
    tol: Tolerances = DEFAULT_TOL,
) -> TransitionOperator:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (sd.size,):
        raise ParameterError(f"need {sd.size} weights, got shape {w.shape}")
    if (w < 0).any() or abs(w.sum() - 1.0) > tol.num:
        raise ParameterError("weights must be a probability distribution", witness=w.tolist())
    S = sum(wi * ei for wi, ei in zip(w, sd.e))
    S = np.asarray(S)
    S.setflags(write=False)
    return TransitionOperator(s, w, S)


def basis_weights(size: int, i: int) -> np.ndarray:
    w = np.zeros(size)
    w[i] = 1.0
    return w


@dataclass(frozen=True)
class ChoiReport:
    min_eigenvalue: float
    mode: str  # "choi" or "direct"
    completely_positive: bool


def choi_matrix(S: np.ndarray) -> np.ndarray:
    """Choi matrix sum_ab E_ab (x) (S o E_ab) of the Schur multiplier by S."""
    n = S.shape[0]
    C = np.zeros((n * n, n * n), dtype=S.dtype)
    diag = np.arange(n) * (n + 1)
    C[np.ix_(diag, diag)] = S
    return C


def choi_psd_check(T: TransitionOperator, tol: Tolerances = DEFAULT_TOL) -> ChoiReport:
    S = T.multiplier
    n = S.shape[0]
    if n * n <= CHOI_CAP:
        low, mode = np.linalg.eigvalsh(choi_matrix(S))[0], "choi"
    else:
        low, mode = np.linalg.eigvalsh(S)[0], "direct"
    low = float(low)
    return ChoiReport(low, mode, low >= -tol.zero)


@dataclass(frozen=True, eq=False)
class ClassicalChain:
    t: np.ndarray
    p0: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        p0 = np.asarray(self.p0, dtype=np.float64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or p0.shape != (t.shape[0],):
            raise ParameterError("chain needs a square t and matching p0")
        check_stochastic(t)
        check_distribution(p0)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p0", p0)

    @property
    def size(self) -> int:
        return self.t.shape[0]


def check_distribution(p: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> None:
    if (p < -tol.zero).any() or abs(p.sum() - 1.0) > tol.num:
        raise ParameterError("not a probability distribution", witness=np.asarray(p).tolist())


def check_stochastic(t: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> None:
    for row, r in enumerate(t):
        if (r < -tol.zero).any() or abs(r.sum() - 1.0) > tol.num:
            raise ParameterError(f"row {row} is not a distribution", witness={"row": row})


def restrict_to_subalgebra(
    T: TransitionOperator,
    sd: SpectralData,
    p0: Sequence[float] | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> ClassicalChain:
    """Matrix of T on the e-basis, scaled by n: row j is T(e_j) in e-coordinates."""
    n = T.multiplier.shape[0]
    e = sd.e
    D = sd.size
    t = np.zeros((D, D), dtype=np.complex128)
    for j in range(D):
        image = T(e[j])
        coeff = np.array([np.trace(E @ image) for E in sd.E])
        resid = float(np.abs(image - sum(c * ek for c, ek in zip(coeff, e))).max())
        if resid > tol.num:
            raise InvarianceError(
                f"T(e_{j}) leaves the spectral span (residual {resid:.3g})",
                witness={"j": j, "residual": resid},
            )
        t[j] = n * coeff
    if np.abs(t.imag).max() > tol.num:
        raise InvarianceError("transition matrix is not real")
    start = np.zeros(D) if p0 is None else np.asarray(p0, dtype=np.float64)
    if p0 is None:
        start[0] = 1.0
    return ClassicalChain(t.real, start)


def walk(chain: ClassicalChain, steps: int) -> np.ndarray:
    """Distributions p0, p0 t, ..., p0 t^steps as rows."""
    if steps < 0:
        raise ParameterError("steps must be nonnegative")
    out = np.empty((steps + 1, chain.size))
    out[0] = chain.p0
    for k in range(steps):
        out[k + 1] = out[k] @ chain.t
    return out


def stationary_distribution(chain: ClassicalChain) -> np.ndarray:
    """Left eigenvector of t for the eigenvalue closest to 1, normalized."""
    vals, vecs = np.linalg.eig(chain.t.T)
    k = int(np.argmin(np.abs(vals - 1.0)))
    v = vecs[:, k].real
    return v / v.sum()


def trajectory_csv(traj: np.ndarray) -> str:
    header = ["step"] + [f"state_{k}" for k in range(traj.shape[1])]
    lines = [",".join(header)]
    for step, row in enumerate(traj):
        lines.append(",".join([str(step)] + [format(float(x), ".17g") for x in row]))
    return "\n".join(lines) + "\n"
