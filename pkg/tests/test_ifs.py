import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import COMMUTATIVE, scheme
from schemeq.errors import (
    CommutativityError,
    GraphInputError,
    JacobiConditionError,
    ParameterError,
    TruncationError,
)
from schemeq.ifs import (
    JacobiData,
    closed_walks,
    grassmann_mode_parameters,
    graph_from_edges,
    ifs_from_jacobi,
    mode_sum_check,
    multimode_ifs,
    path_graph,
    quantum_decomposition,
    radial_jacobi,
    spidernet,
    stratify,
    three_term_check,
    vacuum_moments,
)
from schemeq.scheme import intersection_numbers

OCTAHEDRON = np.asarray(scheme("J42").classes[1], dtype=int)
TWO = path_graph(2)
# path 0-1-2-3 with a pendant vertex 4 on vertex 2
PENDANT = graph_from_edges(5, [(0, 1), (1, 2), (2, 3), (2, 4)])


def enumerate_closed_walks(A, root, m):
    """Count closed walks by explicit depth-first enumeration."""
    nbrs = [np.flatnonzero(row).tolist() for row in A]

    def count(x, steps):
        if steps == 0:
            return int(x == root)
        return sum(count(y, steps - 1) for y in nbrs[x])

    return count(root, m)


def lanczos_oracle(A, root):
    """Tridiagonalize by full Gram-Schmidt on the Krylov sequence."""
    n = A.shape[0]
    basis = []
    v = np.zeros(n)
    v[root] = 1.0
    for _ in range(n):
        w = v.copy()
        for b in basis:
            w -= (b @ w) * b
        for b in basis:
            w -= (b @ w) * b
        if np.linalg.norm(w) < 1e-9:
            break
        basis.append(w / np.linalg.norm(w))
        v = A @ basis[-1]
    Q = np.array(basis)
    T = Q @ A @ Q.T
    return np.diag(T, -1) ** 2, np.diag(T)


# ---------------------------------------------------------------------------
# Jacobi data and one-mode moments
# ---------------------------------------------------------------------------

def test_jacobi_validation():
    with pytest.raises(ParameterError):
        JacobiData((1, -1), (0, 0, 0))
    with pytest.raises(JacobiConditionError):
        JacobiData((1, 0, 2), (0, 0, 0, 0))
    with pytest.raises(ParameterError):
        JacobiData((1,), (0,))
    assert JacobiData((1, 0, 0), (0,) * 4).terminated
    assert not JacobiData((1, 2), (0,) * 3).terminated


def test_ladder_triple_structure():
    jd = JacobiData((1.0, 2.0, 3.0), (0.5, -1.0, 0.0, 2.0))
    lt = ifs_from_jacobi(jd)
    assert np.array_equal(lt.Bplus, lt.Bminus.T)
    assert np.array_equal(lt.Bzero, np.diag(jd.alpha))
    for n in range(3):
        e = np.eye(4)[n]
        assert np.allclose(lt.Bplus @ e, math.sqrt(jd.omega[n]) * np.eye(4)[n + 1])
    assert not (lt.Bminus @ np.eye(4)[0]).any()
    assert np.allclose(np.diag(lt.T, 1), np.sqrt(jd.omega))


def test_bose_fermi_moments():
    bose = JacobiData(tuple(range(1, 5)), (0,) * 5)
    m = vacuum_moments(ifs_from_jacobi(bose), 8)
    assert m == [1, 0, 1, 0, 3, 0, 15, 0, 105]
    fermi = ifs_from_jacobi(JacobiData((1,), (0, 0), terminated=True))
    assert np.array_equal(fermi.T, [[0, 1], [1, 0]])
    assert vacuum_moments(fermi, 8) == [1, 0] * 4 + [1]


def test_truncation_error_names_required_level():
    with pytest.raises(TruncationError) as exc:
        vacuum_moments(ifs_from_jacobi(JacobiData((1, 2, 3), (0,) * 4)), 8)
    assert exc.value.witness == {"L": 3, "required_L": 4}
    assert vacuum_moments(np.zeros((1, 1)), 0) == [1]


def test_moments_of_symmetric_matrix_agree_with_weighted_form():
    jd = JacobiData((2.0, 3.0, 5.0, 7.0), (1.0, 0.0, -1.0, 2.0, 0.5))
    a = vacuum_moments(jd, 8)
    b = vacuum_moments(ifs_from_jacobi(jd).T, 8)
    assert np.allclose(a, b, rtol=1e-12)


def test_spidernet_free_meixner_parameters():
    # normalized spidernet S(a, b, c): omega = (1, q, q, ...) with q = c / a
    a, b, c, depth = 4, 5, 2, 4
    A = spidernet(a, b, c, depth)
    q, r = c / a, b - 1 - c
    jd = JacobiData((1.0,) + (q,) * (depth - 1), (0.0,) + (r / math.sqrt(a),) * depth, terminated=True)
    walks = closed_walks(A, 0, 8)
    for m, value in enumerate(vacuum_moments(jd, 8)):
        assert value == pytest.approx(walks[m] / a ** (m / 2), rel=1e-12)


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

def test_stratify_examples():
    sg = stratify(TWO, 0)
    assert [V.tolist() for V in sg.strata] == [[0], [1]]
    for root in range(6):
        assert stratify(OCTAHEDRON, root).sizes == [1, 4, 1]
    assert stratify(spidernet(4, 5, 2, 3), 0).sizes == [1, 4, 8, 16]
    assert stratify(spidernet(4, 6, 3, 3), 0).sizes == [1, 4, 12, 36]


def test_stratify_reports_excluded_and_rejects_bad_input():
    A = graph_from_edges(4, [(0, 1)])
    sg = stratify(A, 0)
    assert sg.excluded == [2, 3]
    with pytest.raises(GraphInputError):
        stratify(np.array([[0, 1], [0, 0]]), 0)
    with pytest.raises(GraphInputError):
        stratify(TWO, 5)


@pytest.mark.parametrize("A", [TWO, OCTAHEDRON, PENDANT, spidernet(4, 5, 2, 3), path_graph(5)])
def test_quantum_decomposition_exact(A):
    for root in range(min(3, A.shape[0])):
        sg = stratify(A, root)
        Ap, Am, A0 = quantum_decomposition(sg)
        assert np.array_equal(Ap + Am + A0, A)
        assert np.array_equal(Am, Ap.T)
        Phi = sg.radial_vectors()
        assert np.allclose(Phi @ Phi.T, np.eye(len(sg.strata)))


def test_quantum_decomposition_examples():
    Ap, Am, A0 = quantum_decomposition(stratify(TWO, 0))
    assert np.array_equal(Ap, [[0, 0], [1, 0]]) and not A0.any()
    tri = graph_from_edges(3, [(0, 1), (1, 2), (0, 2)])
    _, _, A0 = quantum_decomposition(stratify(tri, 2))
    assert A0[0, 1] == A0[1, 0] == 1
    sg = stratify(OCTAHEDRON, 0)
    _, _, A0 = quantum_decomposition(sg)
    for k, V in enumerate(sg.strata):
        block = A0[np.ix_(V, V)]
        assert block.any() == (k == 1)


def test_radial_jacobi_examples():
    rj = radial_jacobi(stratify(TWO, 0))
    assert rj.jacobi.omega == (1.0,) and rj.jacobi.alpha == (0.0, 0.0)
    assert rj.drg_consistent
    assert not radial_jacobi(stratify(PENDANT, 1)).drg_consistent


def test_octahedron_radial_jacobi():
    rj = radial_jacobi(stratify(OCTAHEDRON, 0))
    omega, alpha = lanczos_oracle(OCTAHEDRON.astype(float), 0)
    assert np.allclose(rj.jacobi.omega, omega, atol=1e-9)
    assert np.allclose(rj.jacobi.alpha, alpha, atol=1e-9)
    # intersection array {4, 1; 1, 4}: omega_n = b_{n-1} c_n
    assert np.allclose(rj.jacobi.omega, (4, 4), atol=1e-9)
    assert np.allclose(rj.jacobi.alpha, (0, 2, 0), atol=1e-9)
    assert rj.drg_consistent
    # closed 4-walks pin omega_1^2 + omega_1 omega_2 + omega_1 alpha_2^2 ...
    assert closed_walks(OCTAHEDRON, 0, 4)[4] == 48


@pytest.mark.parametrize(
    "A, root",
    [(TWO, 0), (OCTAHEDRON, 0), (OCTAHEDRON, 3), (spidernet(4, 5, 2, 3), 0),
     (spidernet(3, 2, 1, 3), 0), (spidernet(4, 4, 1, 3), 0), (PENDANT, 1), (PENDANT, 0), (path_graph(6), 2)],
)
def test_moment_walk_identity(A, root):
    walks = closed_walks(A, root, 8)
    assert walks == [enumerate_closed_walks(A, root, m) for m in range(9)]
    rj = radial_jacobi(stratify(A, root))
    moments = vacuum_moments(rj.jacobi, 8)
    for m, (x, w) in enumerate(zip(moments, walks)):
        assert abs(x - w) <= 1e-8 * max(1, w), m


@pytest.mark.parametrize("A", [OCTAHEDRON, spidernet(4, 5, 2, 3), path_graph(4)])
def test_radial_extraction_consistency(A):
    sg = stratify(A, 0)
    rj = radial_jacobi(sg)
    assert rj.drg_consistent
    Phi = sg.radial_vectors()
    Ap, _, A0 = quantum_decomposition(sg)
    for n, w in enumerate(rj.jacobi.omega):
        assert (Phi[n + 1] @ A @ Phi[n]) ** 2 == pytest.approx(w, abs=1e-8)
        assert (Phi[n + 1] @ Ap @ Phi[n]) ** 2 == pytest.approx(w, abs=1e-8)
    for n, a in enumerate(rj.jacobi.alpha):
        assert Phi[n] @ A0 @ Phi[n] == pytest.approx(a, abs=1e-8)


def test_spidernet_generator():
    A = spidernet(4, 5, 2, 3)
    assert A.shape == (29, 29)
    deg = A.sum(axis=1)
    assert deg[0] == 4
    sg = stratify(A, 0)
    for level in (1, 2):
        assert (deg[sg.strata[level]] == 5).all()
    with pytest.raises(ParameterError):
        spidernet(4, 2, 2, 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**31 - 1))
def test_moment_walk_identity_random_graphs(n, seed):
    rng = np.random.default_rng(seed)
    edges = [(x, y) for x, y in itertools.combinations(range(n), 2) if rng.random() < 0.4]
    A = graph_from_edges(n, edges)
    rj = radial_jacobi(stratify(A, 0))
    walks = closed_walks(A, 0, 6)
    for x, w in zip(vacuum_moments(rj.jacobi, 6), walks):
        assert abs(x - w) <= 1e-8 * max(1, w)


# ---------------------------------------------------------------------------
# multi-mode IFS
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", COMMUTATIVE)
def test_multimode_invariants(name):
    s = scheme(name)
    mm = multimode_ifs(s)
    D = s.d + 1
    Q, G = mm.basis, mm.gram
    assert Q.shape == (D, D)
    assert np.abs(Q.conj().T @ G @ Q - np.eye(D)).max() < 1e-10
    P = [mm.projection(k) for k in range(mm.top_degree + 1)]
    assert np.array_equal(sum(P), np.eye(D))
    for a, b in itertools.product(range(len(P)), repeat=2):
        assert np.array_equal(P[a] @ P[b], P[a] if a == b else 0 * P[a])
    assert three_term_check(mm) < 1e-9
    for j in mm.modes:
        plus, zero, minus = mm.caps(j)
        assert np.abs(plus + zero + minus - mm.mode_matrix(j)).max() < 1e-12
        jstar = s.transpose_map[j]
        assert np.abs(minus - mm.caps(jstar)[0].conj().T).max() < 1e-9
    check = mode_sum_check(mm)
    assert check["exact_residual"] == 0
    assert check["graded_residual"] < 1e-9


def test_vacuum_and_level_zero():
    s = scheme("J52")
    mm = multimode_ifs(s)
    assert mm.degrees[0] == 0
    # Phi_0 is A_0 normalized by the trace inner product
    assert np.allclose(mm.basis[:, 0], [1 / math.sqrt(s.n), 0, 0])
    for j in mm.modes:
        assert abs(mm.caps(j)[1][0, 0]) < 1e-12


def test_c5_saturates_in_degree_one():
    mm = multimode_ifs(scheme("C5"))
    assert mm.degrees.tolist() == [0, 1, 1, 1, 1]
    assert not mm.projection(2).any()


def test_single_mode_johnson_matches_radial_jacobi():
    mm = multimode_ifs(scheme("J42"), modes=[1])
    assert mm.degrees.tolist() == [0, 1, 2]
    M = mm.mode_matrix(1)
    rj = radial_jacobi(stratify(OCTAHEDRON, 0))
    assert np.allclose(np.abs(np.diag(M, -1)) ** 2, rj.jacobi.omega, atol=1e-9)
    assert np.allclose(np.diag(M), rj.jacobi.alpha, atol=1e-9)
    assert three_term_check(mm) < 1e-9


def test_shuffled_gradation_fails_three_term_check():
    mm = multimode_ifs(scheme("J42"), modes=[1])
    assert three_term_check(mm.with_degrees([0, 2, 1])) > 1.0
    mm = multimode_ifs(scheme("G242"), modes=[1])
    assert three_term_check(mm.with_degrees([1, 0, 2])) > 1.0


def test_multimode_requires_commutative():
    with pytest.raises(CommutativityError):
        multimode_ifs(scheme("S3"))
    with pytest.raises(ParameterError):
        multimode_ifs(scheme("J42"), modes=[3])


def test_grassmann_report():
    rep = grassmann_mode_parameters(2, 4, 2)
    p = intersection_numbers(scheme("G242")).p
    assert rep["intersection_p_k_1_n"] == p[:, 1, :].tolist()
    assert rep["intersection_p_k_0_n"] == np.eye(3, dtype=int).tolist()
    assert all(m["three_term"] < 1e-9 for m in rep["modes"])
    assert all(d["match"] for d in rep["drg_omega"])
    rows = {(c["paper_formula"], c["n"]): c for c in rep["comparisons"]}
    assert rows[("n(v - 2)", 1)]["paper_value"] == 2
    assert rows[("d(v - d)", 1)]["paper_value"] == 4
    assert rows[("d(v - d)", 1)]["computed"] == 18
    for c in rep["comparisons"]:
        assert c["match"] == (c["paper_value"] == c["computed"])
        k, i, j = c["index"]
        assert c["computed"] == p[k, i, j]
