import json

import numpy as np
import pytest

from bfdirac import analysis as A
from bfdirac import models as M
from bfdirac.brackets import constraint_jacobian, symplectic_product
from bfdirac.derivatives import gradient
from bfdirac.lattice import FieldLayout, LatticeGeometry, make_state
from bfdirac.models import ModelSpec

BF2 = ModelSpec("BF", LatticeGeometry(2))
GBF2 = ModelSpec("GBF", LatticeGeometry(2))
BF3 = ModelSpec("BF", LatticeGeometry(3))
GBF3 = ModelSpec("GBF", LatticeGeometry(3))


def test_velocity_hessian_toy_and_quadratic():
    assert A.toy_hessian_rank() == 1
    # L = v.Q.v / 2 with a rank-3 Q
    rng = np.random.default_rng(0)
    U = rng.normal(size=(6, 3))
    Q = U @ U.T
    H = A.velocity_hessian(lambda v: 0.5 * np.einsum("...i,ij,...j->...", v, Q, v), rng.normal(size=6))
    np.testing.assert_allclose(H, Q, atol=1e-12)


@pytest.mark.parametrize("model", [BF2, GBF2], ids=["BF", "GBF"])
def test_hessian_rank_zero(model):
    assert A.hessian_rank(model, seed=1) == 0


def test_dof_count_examples():
    assert A.dof_count(120, 42, 36) == 0
    assert A.dof_count(2, 0, 0) == 1
    assert A.dof_count(4, 1, 0) == 1
    with pytest.raises(A.CountingInconsistency):
        A.dof_count(120, 42, 35)
    with pytest.raises(A.CountingInconsistency):
        A.dof_count(10, 6, 0)


def test_consistency_zero_state_and_fit():
    for model in (BF3, GBF3):
        out = A.consistency_check(model, seeds=range(3))
        assert out["c1_residual"] < 1e-10 and out["c2_residual"] < 1e-10
        assert np.isclose(out["c1"], 1.0) and np.isclose(out["c2"], 0.5)
        # the canonical Hamiltonian flow at the zero state vanishes
        z = np.zeros(model.geometry.size)
        H = lambda s: M.canonical_hamiltonian(model, s)  # noqa: E731
        assert not np.any(A._bracket_with(model, ("phi0", "phi0a"), H, z))


def test_consistency_mismatch_raised(monkeypatch):
    """A Hamiltonian whose flow is not proportional to psi is rejected."""
    H = M.canonical_hamiltonian
    monkeypatch.setattr(M, "canonical_hamiltonian", lambda m, z: H(m, z) + np.sum(z**2, axis=-1))
    with pytest.raises(A.ConsistencyMismatch):
        A.consistency_check(BF3, seeds=range(2))


@pytest.mark.parametrize("model", [BF2, GBF2], ids=["BF", "GBF"])
def test_classification_at_n2(model):
    s = make_state(A.onshell_kind(model), 0, model)
    c = A.classify_constraints(model, s)
    n = model.geometry.n_sites
    assert (c.rank.rank, c.rank.nullity) == (36 * n, 48 * n)
    assert c.closure_max < 1e-10
    assert c.projection_residual < 1e-8 and c.null_residual < 1e-8
    assert c.second_class_sigma_min > 0.05


def test_first_class_closure_only_weak():
    """Closure holds on the constraint surface but not at a random state."""
    on = make_state("onshell-bf", 1, BF3)
    off = make_state("random", 1, BF3)
    assert A.first_class_closure(BF3, on) < 1e-10
    assert A.first_class_closure(BF3, off) > 1e-3


def test_reducibility_count_bf_and_gbf():
    r = A.reducibility_count(BF3)
    # dense deficiency: 6 local relations per site plus 18 global torus relations
    assert r["jacobian_rows"] == 84 * 27
    assert r["deficiency"] == 6 * 27 + 18 and r["jacobian_rank"] == 2088
    assert r["local_per_site"] == 6 and r["global_relations"] == 18
    assert r["residual_g0"] < 1e-12 and r["gap_ratio"] > 1e6
    g = A.reducibility_count(GBF3)
    assert g["deficiency"] == 6 * 27 and g["local_per_site"] == 6
    assert g["global_relations"] == 0


def test_fourier_deficiency_of_a_pure_shift_operator():
    """Rows J(x) = f(x + e1) - f(x) lose rank exactly on the k1 = 0 plane."""
    geom = LatticeGeometry(3)
    m = ModelSpec("BF", geom)
    n = geom.n_sites
    J = np.zeros((n, geom.size))
    for site in range(n):
        x = np.unravel_index(site, (3, 3, 3))
        y = ((x[0] + 1) % 3, x[1], x[2])
        J[site, site * 120] = -1.0
        J[site, np.ravel_multi_index(y, (3, 3, 3)) * 120] = 1.0
    # pretend the rows form a one-component family by using phi0-shaped slots
    rows = np.zeros((6 * n, geom.size))
    rows[::6] = J
    out = A.fourier_deficiencies(m, rows, families=("phi0",))
    assert all(v == (6 if k[0] == 0 else 5) for k, v in out.items())


def test_reducibility_convergence_order():
    out = A.reducibility_convergence(BF3.with_(g=1.0), sizes=(4, 8, 16), seed=0)
    assert [lv["N"] for lv in out["levels"]] == [4, 8, 16]
    assert out["order"] >= 0.9
    res = [lv["residual"] for lv in out["levels"]]
    assert res[0] > res[1] > res[2]


@pytest.mark.parametrize("model", [BF3, GBF3], ids=["BF", "GBF"])
def test_dirac_bracket_annihilates_second_class(model):
    on = make_state(A.onshell_kind(model), 0, model)
    db = A.DiracBracket(model, on)
    probes = np.random.default_rng(0).standard_normal((10, model.geometry.size))
    vals = db.from_gradients(db.Jx, probes)
    assert np.abs(vals).max() < 1e-8 * np.abs(probes).max()
    # antisymmetric
    P = db.from_gradients(probes, probes)
    assert np.abs(P + P.T).max() < 1e-10


def test_dirac_equals_poisson_for_pi0_functionals():
    """Pi^0 and Pi^{0a} commute with every second-class constraint, so their
    Dirac and Poisson brackets agree."""
    on = make_state("onshell-bf", 0, BF3)
    db = A.DiracBracket(BF3, on)
    lay = FieldLayout(BF3.geometry)
    f = lambda z: z[..., lay.encode("pA", 5, 0, 1)] * z[..., lay.encode("pB", 5, 2, 4)]  # noqa: E731
    g = lambda z: np.sum(z[..., :: 7] ** 2, axis=-1)  # noqa: E731
    gf, gg = gradient(f, on), gradient(g, on)
    plain = symplectic_product(gf[None], gg[None], BF3.geometry)[0, 0]
    assert np.isclose(db.from_gradients(gf, gg)[0, 0], plain, rtol=1e-10, atol=1e-12)
    assert np.isclose(db(f, g), plain, rtol=1e-10, atol=1e-12)


def test_dirac_bracket_brute_force_assembly():
    """{A_a, B_bc}_D from an explicit inverse of the chi-chi matrix."""
    on = make_state("onshell-bf", 2, BF2)
    geom = BF2.geometry
    lay = FieldLayout(geom)
    Jx = constraint_jacobian(BF2, on, M.SECOND_CLASS)
    n = geom.size
    Jm = np.zeros((n, n))
    for site in range(geom.n_sites):
        for local in range(60):
            Jm[site * 120 + local, site * 120 + 60 + local] = 1.0
            Jm[site * 120 + 60 + local, site * 120 + local] = -1.0
    C = Jx @ Jm @ Jx.T
    Cinv = np.linalg.inv(C)
    ia = lay.encode("A", 0, 1, 3)
    ib = lay.encode("B", 0, 5, 3)
    ea, eb = np.eye(n)[ia], np.eye(n)[ib]
    brute = ea @ Jm @ eb - (ea @ Jm @ Jx.T) @ Cinv @ (Jx @ Jm @ eb)
    got = A.DiracBracket(BF2, on).from_gradients(ea, eb)[0, 0]
    assert np.isclose(got, brute, atol=1e-12)
    assert abs(got) > 1e-3  # A and B no longer commute


def test_multiplier_residual_and_tertiary():
    for model in (BF3, GBF3):
        on = make_state(A.onshell_kind(model), 0, model)
        assert A.multiplier_residual(model, on) < 1e-10
        assert A.tertiary_check(model, 0) < 1e-10


def test_run_analysis_counts_and_report():
    rep = A.run_analysis(BF3, seed=0, stages=("hessian", "primary", "classify", "dirac", "dof"))
    c = rep.per_site_counts
    assert c["n_primary"] == 60 and c["rank_primary_bracket"] == 36 and c["n_primary_null"] == 24
    assert c["n_first_class"] == 48 and c["n_second_class"] == 36
    assert c["dof"] == 0 and c["n_first_class_independent"] == 42
    assert rep.passed
    d = json.loads(rep.to_json())
    for key in ("model", "lattice", "seed", "per_site_counts", "totals", "ranks",
                "residuals", "adopted_signs", "fitted_constants", "pass"):
        assert key in d
    assert "PASS" in rep.to_text()


def test_report_json_is_finite_and_deterministic():
    kw = dict(seed=3, stages=("primary", "classify", "dirac"))
    a = A.run_analysis(GBF3, **kw).to_json()
    b = A.run_analysis(GBF3, **kw).to_json()
    assert a == b
    assert "NaN" not in a and "Infinity" not in a
    assert A._clean({"x": float("inf"), "y": np.int64(2)}) == {"x": 1e300, "y": 2}


def test_dof_invariant_over_seeds():
    for seed in range(5):
        rep = A.run_analysis(BF2, seed=seed, stages=("classify", "dof"))
        assert rep.per_site_counts["dof"] == 0


def test_stage_error_wraps_failures():
    # no singular-value gap can reach this threshold
    with pytest.raises(A.StageError) as err:
        A.run_analysis(BF3, stages=("primary",), gap_threshold=1e300)
    assert err.value.stage == "primary"
