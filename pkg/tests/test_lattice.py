import numpy as np
import pytest

from bfdirac import models as M
from bfdirac.lattice import (
    FieldLayout,
    LatticeGeometry,
    UnknownStateKind,
    central_difference,
    covariant_divergence,
    curvature,
    make_state,
    pack,
    read_state_text,
    unpack,
    write_state_text,
)
from bfdirac.models import ModelSpec

ETA = [-1.0, 1.0, 1.0, 1.0]
LEX = [(i, j) for i in range(4) for j in range(4) if i < j]


def dense(u):
    m = np.zeros(u.shape[:-1] + (4, 4))
    for s, (i, j) in enumerate(LEX):
        m[..., i, j], m[..., j, i] = u[..., s], -u[..., s]
    return m


def undense(m):
    return np.stack([m[..., i, j] for i, j in LEX], axis=-1)


def test_geometry_validation():
    with pytest.raises(ValueError):
        LatticeGeometry(1)
    with pytest.raises(ValueError):
        LatticeGeometry(3, h=0.0)
    g = LatticeGeometry(3)
    assert g.n_sites == 27 and g.size == 120 * 27


def test_layout_roundtrip_every_offset():
    geom = LatticeGeometry(2)
    lay = FieldLayout(geom)
    for o in range(geom.size):
        assert lay.encode(*lay.decode(o)) == o
    with pytest.raises(IndexError):
        lay.decode(geom.size)


def test_layout_matches_unpack():
    geom = LatticeGeometry(3)
    lay = FieldLayout(geom)
    s = np.arange(geom.size, dtype=float)
    f = unpack(s, geom)
    site = lay.site_index(1, 2, 0)
    assert f.A[1, 2, 0, 3, 4] == lay.encode("A", site, 3, 4)
    assert f.B[1, 2, 0, 5, 1] == lay.encode("B", site, 5, 1)
    assert f.PiA[1, 2, 0, 0, 2] == 0.5 * lay.encode("pA", site, 0, 2)
    assert f.PiB[1, 2, 0, 4, 0] == 0.25 * lay.encode("pB", site, 4, 0)
    np.testing.assert_array_equal(pack(f), s)


def test_central_difference_examples():
    f = np.full((4, 4, 4), 2.5)
    assert np.all(central_difference(f, 1) == 0)
    x = np.arange(4)
    f = np.broadcast_to(np.sin(2 * np.pi * x / 4)[:, None, None], (4, 4, 4))
    assert np.isclose(central_difference(f, 1)[0, 0, 0], 1.0)


def test_summation_by_parts():
    rng = np.random.default_rng(0)
    for N in (3, 4, 5):
        f, g = rng.normal(size=(2, N, N, N))
        for a in (1, 2, 3):
            lhs = np.sum(f * central_difference(g, a))
            rhs = -np.sum(central_difference(f, a) * g)
            assert abs(lhs - rhs) < 1e-12


def test_central_difference_direction_axis():
    rng = np.random.default_rng(1)
    f = rng.normal(size=(4, 4, 4))
    d2 = central_difference(f, 2)
    np.testing.assert_allclose(d2[1, 2, 3], (f[1, 3, 3] - f[1, 1, 3]) / 2)
    d3 = central_difference(f, 3, h=0.5)
    np.testing.assert_allclose(d3[1, 2, 3], (f[1, 2, 0] - f[1, 2, 2]) / 1.0)


def _stencil(X, a):
    N = X.shape[0]
    out = np.zeros_like(X)
    for x in np.ndindex(N, N, N):
        up, dn = list(x), list(x)
        up[a - 1] = (x[a - 1] + 1) % N
        dn[a - 1] = (x[a - 1] - 1) % N
        out[x] = (X[tuple(up)] - X[tuple(dn)]) / 2
    return out


def test_curvature_zero_and_constant():
    N = 3
    assert np.all(curvature(np.zeros((N, N, N, 4, 6)), 1.0, 1.0) == 0)
    M6 = np.random.default_rng(2).normal(size=6)
    A = np.zeros((N, N, N, 4, 6))
    for a, c in zip((1, 2, 3), (0.3, -1.2, 2.0)):
        A[..., a, :] = c * M6
    assert np.abs(curvature(A, 1.0, 1.0)).max() < 1e-14


def test_curvature_matrix_oracle():
    rng = np.random.default_rng(3)
    N = 3
    A = rng.uniform(-1, 1, (N, N, N, 4, 6))
    F = curvature(A, 1.0, 1.0)
    Am = dense(A)
    E = np.diag(ETA)
    for s, (b, c) in enumerate([(1, 2), (1, 3), (2, 3)]):
        dAc = _stencil(Am[..., c, :, :], b)
        dAb = _stencil(Am[..., b, :, :], c)
        comm = Am[..., b, :, :] @ E @ Am[..., c, :, :] - Am[..., c, :, :] @ E @ Am[..., b, :, :]
        np.testing.assert_allclose(F[..., s, :], undense(dAc - dAb + comm), atol=1e-13)


def test_covariant_divergence():
    rng = np.random.default_rng(4)
    N = 3
    A0 = np.zeros((N, N, N, 4, 6))
    V = np.broadcast_to(rng.normal(size=(3, 6)), (N, N, N, 3, 6))
    assert np.abs(covariant_divergence(A0, V, 1.0, 1.0)).max() < 1e-14
    V = rng.normal(size=(N, N, N, 3, 6))
    expect = sum(_stencil(V[..., a - 1, :], a) for a in (1, 2, 3))
    np.testing.assert_allclose(covariant_divergence(A0, V, 1.0, 1.0), expect, atol=1e-13)
    A = rng.normal(size=(N, N, N, 4, 6))
    np.testing.assert_allclose(covariant_divergence(A, V, 0.0, 1.0), expect, atol=1e-13)


def test_covariant_divergence_lower_index_action():
    # (D_a V^a)_{IJ} = Delta V + A_{aI}^K V_{KJ} + A_{aJ}^K V_{IK}
    rng = np.random.default_rng(5)
    N = 3
    A = rng.normal(size=(N, N, N, 4, 6))
    V = rng.normal(size=(N, N, N, 3, 6))
    E = np.diag(ETA)
    out = sum(_stencil(V[..., a - 1, :], a) for a in (1, 2, 3))
    for a in (1, 2, 3):
        Am = dense(A[..., a, :])  # A^{IJ}
        Vm = dense(V[..., a - 1, :])  # V_{IJ}
        mixed = E @ Am  # A_I^K = eta_IL A^{LK}
        # A_J^K V_{IK} = -(A_J^K V_{KI}) = -(mixed @ Vm)^T
        term = mixed @ Vm - (mixed @ Vm).swapaxes(-1, -2)
        out = out + undense(term)
    np.testing.assert_allclose(covariant_divergence(A, V, 1.0, 1.0), out, atol=1e-12)


@pytest.mark.parametrize("kind", ["BF", "GBF"])
def test_onshell_states_satisfy_all_constraints(kind):
    m = ModelSpec(kind, LatticeGeometry(3))
    for seed in range(3):
        s = make_state(f"onshell-{kind.lower()}", seed, m)
        fams = M.PRIMARY + M.SECONDARY + M.FIRST_CLASS + M.SECOND_CLASS
        assert np.abs(M.constraint_values(m, s, fams)).max() < 1e-12


def test_make_state_determinism_and_errors():
    m = ModelSpec("BF", LatticeGeometry(3))
    a = make_state("random", 5, m)
    b = make_state("random", 5, m)
    assert a.tobytes() == b.tobytes()
    assert np.all(np.abs(a) <= 1)
    with pytest.raises(UnknownStateKind):
        make_state("bogus", 0, m)


def test_periodic_shift_invariance():
    geom = LatticeGeometry(3)
    m = ModelSpec("BF", geom)
    s = make_state("random", 1, m).reshape(3, 3, 3, 120)
    shifted = np.roll(s, 1, axis=1).reshape(-1)
    vals = M.constraint_values(m, s.reshape(-1), M.ALL_CONSTRAINTS)
    vals_shift = M.constraint_values(m, shifted, M.ALL_CONSTRAINTS)
    assert np.isclose(np.sort(vals).sum(), np.sort(vals_shift).sum())
    full = np.roll(s, 3, axis=0).reshape(-1)
    assert np.array_equal(full, s.reshape(-1))
    # family-wise: shifting the state shifts every per-site value
    g1 = M.FAMILIES["gammaa"][1](m, unpack(s.reshape(-1), geom))
    g2 = M.FAMILIES["gammaa"][1](m, unpack(shifted, geom))
    np.testing.assert_allclose(np.roll(g1, 1, axis=1), g2, atol=1e-14)


def test_state_text_roundtrip(tmp_path):
    m = ModelSpec("BF", LatticeGeometry(2))
    s = make_state("random", 3, m)
    path = tmp_path / "state.txt"
    write_state_text(s, path)
    first = path.read_text().splitlines()[0].split()
    assert first[0] == "0"
    np.testing.assert_array_equal(read_state_text(path), s)
