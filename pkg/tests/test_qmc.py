import numpy as np
import pytest

from conftest import COMMUTATIVE, scheme
from schemeq.errors import InvarianceError, ParameterError
from schemeq.qmc import (
    ClassicalChain,
    basis_weights,
    choi_matrix,
    choi_psd_check,
    make_transition_operator,
    restrict_to_subalgebra,
    stationary_distribution,
    trajectory_csv,
    walk,
)
from schemeq.scheme import build_johnson
from schemeq.spectral import hypergroup, primitive_idempotents


def operator(name, weights):
    s = scheme(name)
    sd = primitive_idempotents(s)
    if isinstance(weights, int):
        weights = basis_weights(sd.size, weights)
    return s, sd, make_transition_operator(s, sd, weights)


def test_identity_weight_divides_by_n():
    s, sd, T = operator("J42", 0)
    M = np.random.default_rng(0).standard_normal((6, 6))
    assert np.abs(T(M) - M / 6).max() < 1e-12
    assert np.abs(T(np.ones((6, 6))) - T.multiplier).max() == 0


def test_s3_delta2_maps_e2_by_hypergroup_row():
    s, sd, T = operator("S3c", 2)
    h = hypergroup(s, sd).h
    expected = sum(h[2, 2, k] * sd.e[k] for k in range(3)) / s.n
    assert np.abs(T(sd.e[2]) - expected).max() < 1e-12


@pytest.mark.parametrize("name", COMMUTATIVE)
def test_complete_positivity_for_basis_weights(name):
    s = scheme(name)
    sd = primitive_idempotents(s)
    for i in range(sd.size):
        rep = choi_psd_check(make_transition_operator(s, sd, basis_weights(sd.size, i)))
        assert rep.min_eigenvalue >= -1e-9
        assert rep.completely_positive
        assert rep.mode == ("choi" if s.n ** 2 <= 4096 else "direct")


def test_choi_matrix_spectrum_oracle():
    s, sd, T = operator("J42", 0)
    C = choi_matrix(T.multiplier)
    # J/n embedded on the diagonal block: spectrum {1, 0, ..., 0}
    vals = np.linalg.eigvalsh(C)
    assert abs(vals.max() - 1.0) < 1e-12
    assert abs(vals.min()) < 1e-12
    # Choi matrix as sum_ab E_ab (x) T(E_ab)
    n = s.n
    direct = np.zeros((n * n, n * n))
    for a in range(n):
        for b in range(n):
            Eab = np.zeros((n, n))
            Eab[a, b] = 1
            direct += np.kron(Eab, T(Eab))
    assert np.array_equal(direct, C)


def test_corrupted_multiplier_fails_choi():
    s, sd, T = operator("J42", 1)
    S = T.multiplier.copy()
    S[0, 1] = S[1, 0] = 5.0
    bad = type(T)(T.scheme, T.weights, S)
    rep = choi_psd_check(bad)
    assert rep.min_eigenvalue < -1e-3
    assert not rep.completely_positive


def test_weights_validation():
    s = scheme("J42")
    sd = primitive_idempotents(s)
    for w in ([0.5, 0.6, -0.1], [0.2, 0.2, 0.2], [1.0, 0.0]):
        with pytest.raises(ParameterError):
            make_transition_operator(s, sd, w)


@pytest.mark.parametrize("name", COMMUTATIVE)
def test_restriction_reproduces_hypergroup_rows(name):
    s = scheme(name)
    sd = primitive_idempotents(s)
    h = hypergroup(s, sd).h
    rng = np.random.default_rng(len(name))
    w = rng.random(sd.size)
    w /= w.sum()
    chain = restrict_to_subalgebra(make_transition_operator(s, sd, w), sd)
    assert np.abs(chain.t - np.einsum("i,ijk->jk", w, h)).max() < 1e-8


def test_restriction_examples():
    s, sd, T = operator("J52", 0)
    assert np.abs(restrict_to_subalgebra(T, sd).t - np.eye(3)).max() < 1e-9
    s, sd, T = operator("C5", 1)
    t = restrict_to_subalgebra(T, sd).t
    assert np.abs(t - np.roll(np.eye(5), 1, axis=1)).max() < 1e-9
    s, sd, T = operator("S3c", 2)
    t = restrict_to_subalgebra(T, sd).t
    assert np.abs(t - hypergroup(s, sd).h[2]).max() < 1e-9


def test_convexity():
    s = scheme("J42")
    sd = primitive_idempotents(s)
    w = np.array([0.2, 0.5, 0.3])
    T = make_transition_operator(s, sd, w)
    parts = [make_transition_operator(s, sd, basis_weights(3, i)) for i in range(3)]
    for A in s.stack:
        combo = sum(wi * P(A) for wi, P in zip(w, parts))
        assert np.abs(T(A) - combo).max() < 1e-12


def test_action_on_noncommutative_parent():
    # T built on the S3 conjugacy scheme acts diagonally on the group algebra
    big = scheme("S3")
    s, sd, T = operator("S3c", 2)
    coords = T.class_coordinates(big)
    for x, A in enumerate(big.stack):
        assert np.abs(T(A) - coords[x] * A).max() < 1e-12
    coarse = build_johnson(6, 1)
    with pytest.raises(InvarianceError):
        operator("J42", 1)[2].class_coordinates(coarse)


def test_walk_examples():
    s, sd, T = operator("C5", 1)
    chain = restrict_to_subalgebra(T, sd)
    traj = walk(chain, 5)
    assert traj.shape == (6, 5)
    assert np.abs(traj[5] - traj[0]).max() < 1e-9
    assert np.array_equal(walk(chain, 0), chain.p0[None, :])

    s, sd, T = operator("S3c", 2)
    chain = restrict_to_subalgebra(T, sd)
    traj = walk(chain, 50)
    pi = stationary_distribution(chain)
    assert np.abs(pi @ chain.t - pi).max() < 1e-12
    assert np.abs(traj[50] - pi).max() < 1e-6
    assert np.abs(traj.sum(axis=1) - 1).max() < 1e-8
    assert (traj >= -1e-9).all()


def test_chain_validation_and_csv():
    with pytest.raises(ParameterError):
        ClassicalChain([[0.5, 0.6], [0.5, 0.5]], [1, 0])
    with pytest.raises(ParameterError):
        walk(ClassicalChain(np.eye(2), [1, 0]), -1)
    text = trajectory_csv(walk(ClassicalChain([[0, 1], [1, 0]], [1, 0]), 2))
    assert text == "step,state_0,state_1\n0,1,0\n1,0,1\n2,1,0\n"
