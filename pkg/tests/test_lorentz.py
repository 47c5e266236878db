import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bfdirac.lorentz import (
    PAIR_WEIGHTS,
    InvalidPairError,
    epsilon_spatial,
    lower,
    metric_eta,
    pair_index,
    pairing,
    raise_,
    so31_commutator,
)

ETA = [-1.0, 1.0, 1.0, 1.0]
LEX = [(i, j) for i in range(4) for j in range(4) if i < j]

vec6 = arrays(np.float64, 6, elements=st.floats(-10, 10, allow_nan=False))


def dense(u):
    m = np.zeros((4, 4))
    for s, (i, j) in enumerate(LEX):
        m[i, j], m[j, i] = u[s], -u[s]
    return m


def loop_commutator(u, v):
    """[u, v]^{IJ} = u^{IK} eta_KL v^{LJ} - (u <-> v), by explicit loops."""
    U, V = dense(u), dense(v)
    out = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            for k in range(4):
                out[i, j] += U[i, k] * ETA[k] * V[k, j] - V[i, k] * ETA[k] * U[k, j]
    return np.array([out[i, j] for i, j in LEX])


@pytest.mark.parametrize("i,j,expected", [((0), (1), (0, 1)), (1, 0, (0, -1)), (2, 3, (5, 1))])
def test_pair_index_examples(i, j, expected):
    assert pair_index(i, j) == expected


def test_pair_index_antisymmetric_and_invalid():
    for i in range(4):
        for j in range(4):
            if i == j:
                with pytest.raises(InvalidPairError):
                    pair_index(i, j)
            else:
                s1, g1 = pair_index(i, j)
                s2, g2 = pair_index(j, i)
                assert s1 == s2 and g1 == -g2


def test_metric_and_weights():
    assert [metric_eta(i) for i in range(4)] == [-1, 1, 1, 1]
    np.testing.assert_array_equal(PAIR_WEIGHTS, [-1, -1, -1, 1, 1, 1])


def test_epsilon_spatial():
    assert epsilon_spatial(1, 2, 3) == 1
    assert epsilon_spatial(2, 1, 3) == -1
    assert epsilon_spatial(1, 1, 2) == 0
    assert epsilon_spatial(3, 1, 2) == 1


def test_commutator_basis_examples():
    e = np.eye(6)
    c = so31_commutator(e[3], e[5])  # [e12, e23]
    assert np.count_nonzero(c) == 1 and c[4] != 0  # along e13
    c = so31_commutator(e[0], e[3])  # [e01, e12]
    assert np.count_nonzero(c) == 1 and c[1] != 0  # along e02
    np.testing.assert_allclose(c, loop_commutator(e[0], e[3]))


@settings(max_examples=100, deadline=None)
@given(vec6, vec6)
def test_commutator_antisymmetry(u, v):
    scale = 1 + np.abs(u).max() * np.abs(v).max()
    assert np.abs(so31_commutator(u, v) + so31_commutator(v, u)).max() < 1e-14 * scale
    assert np.abs(so31_commutator(u, u)).max() == 0.0


@settings(max_examples=100, deadline=None)
@given(vec6, vec6)
def test_commutator_matches_matrix_oracle(u, v):
    scale = 1 + np.abs(u).max() * np.abs(v).max()
    np.testing.assert_allclose(so31_commutator(u, v), loop_commutator(u, v), atol=1e-13 * scale)


def test_jacobi_identity_random_triples():
    rng = np.random.default_rng(0)
    for _ in range(100):
        u, v, w = rng.uniform(-1, 1, (3, 6))
        c = so31_commutator
        jac = c(u, c(v, w)) + c(v, c(w, u)) + c(w, c(u, v))
        assert np.abs(jac).max() < 1e-12


def test_broadcasting():
    rng = np.random.default_rng(1)
    u = rng.normal(size=(5, 3, 6))
    v = rng.normal(size=(6,))
    out = so31_commutator(u, v)
    assert out.shape == (5, 3, 6)
    np.testing.assert_allclose(out[2, 1], so31_commutator(u[2, 1], v))


def test_lower_raise_and_pairing():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=(2, 6))
    np.testing.assert_array_equal(raise_(lower(x)), x)
    # full contraction X^{IJ} Y_{IJ} summed over all ordered (I, J)
    X, Y = dense(x), dense(y)
    full = sum(X[i, j] * ETA[i] * ETA[j] * Y[i, j] for i in range(4) for j in range(4))
    assert np.isclose(pairing(x, lower(y)), full)


def test_invariant_pairing_under_rotation():
    # <[e, x], y> + <x, [e, y]> = 0 for the Killing-type pairing
    rng = np.random.default_rng(3)
    e, x, y = rng.normal(size=(3, 6))
    lhs = pairing(so31_commutator(e, x), lower(y)) + pairing(x, lower(so31_commutator(e, y)))
    assert abs(lhs) < 1e-12
