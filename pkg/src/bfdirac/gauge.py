"""Gauge generator, gauge transformations, diffeomorphisms and the
equations of motion of the extended Hamiltonian.

Gauge parameters carry upper internal indices.  Transformations are returned
as flat state increments ``delta z = {z, G}``, so momentum slots hold the
increments of the raw conjugate momenta (2 * delta Pi^mu, 4 * delta Pi^{mu nu}).
"""

from dataclasses import dataclass

import numpy as np

from . import models as M
from .brackets import symplectic_gradient
from .derivatives import gradient
from .lattice import (
    SPATIAL_PAIRS,
    Fields,
    central_difference,
    cov,
    diff,
    pack,
    spatial_B,
    two_form,
    unpack,
)
from .lorentz import lower, pairing, raise_, so31_commutator


@dataclass
class GaugeParams:
    """Smearing fields of the gauge generator, ``(N, N, N, ...)`` per site.

    ``e0dot`` and ``e0adot`` stand for the time derivatives of the
    parameters eps_0 and eps_{0a}; the lattice has no time direction, so they
    are independent inputs.  ``eps_a`` stacks a = 1..3 on axis -2.
    """

    eps: np.ndarray
    eps_a: np.ndarray
    e0dot: np.ndarray
    e0adot: np.ndarray
    eps0: np.ndarray = None
    eps0a: np.ndarray = None
    xi: np.ndarray = None

    @classmethod
    def zeros(cls, geometry):
        N = geometry.N
        one, three = (N, N, N, 6), (N, N, N, 3, 6)
        return cls(np.zeros(one), np.zeros(three), np.zeros(one), np.zeros(three))

    @classmethod
    def random(cls, geometry, seed, scale=1.0):
        rng = np.random.default_rng(seed)
        N = geometry.N
        one, three = (N, N, N, 6), (N, N, N, 3, 6)
        r = lambda s: scale * rng.uniform(-1.0, 1.0, s)  # noqa: E731
        return cls(r(one), r(three), r(one), r(three))

    def scaled(self, c):
        mul = lambda x: None if x is None else c * x  # noqa: E731
        return GaugeParams(
            c * self.eps, c * self.eps_a, c * self.e0dot, c * self.e0adot,
            mul(self.eps0), mul(self.eps0a), self.xi,
        )


def generator(model, state, params):
    """G = sum_x h^3 [e0dot.gamma^0 + e0adot.gamma^{0a} + eps.gamma + eps_a.gamma^a].

    The 2-form pair (0a) is contracted over both orderings."""
    f = unpack(state, model.geometry)
    dens = (
        pairing(params.e0dot, f.PiA[..., 0, :])
        + 2.0 * pairing(params.e0adot, f.PiB[..., 0:3, :]).sum(axis=-1)
        + pairing(params.eps, M.gauss(model, f))
        + pairing(params.eps_a, M._gammaa(model, f)).sum(axis=-1)
    )
    return model.geometry.volume * dens.sum(axis=(-3, -2, -1))


def hamiltonian_flow(functional, state, geometry):
    """Flat vector of {z, H} for every phase-space coordinate z."""
    return symplectic_gradient(gradient(functional, state), geometry)


def gauge_transform_bracket(model, state, params):
    return hamiltonian_flow(lambda z: generator(model, z, params), state, model.geometry)


def _empty(f):
    return [np.zeros(x.shape, dtype=np.result_type(x, float)) for x in f]


def _gauss_part(model, f, eps, out):
    """Closed-form action of the Gauss constraint smeared with ``eps``."""
    dA, dB, dPA, dPB = out
    g, h = model.g, model.geometry.h
    for a in (1, 2, 3):
        dA[..., a, :] -= cov(f.A, eps, a, g, h)
    if g:
        e = eps[..., None, :]
        dPA[..., 1:, :] += g * lower(so31_commutator(e, raise_(f.PiA[..., 1:, :])))
        dB[..., 3:, :] += g * so31_commutator(e, f.B[..., 3:, :])
        dPB[..., 3:, :] += g * lower(so31_commutator(e, raise_(f.PiB[..., 3:, :])))


def _gammaa_part(model, f, eps_a, out):
    """Closed-form action of gamma^a smeared with ``eps_a``."""
    dA, dB, dPA, dPB = out
    g, h, c = model.g, model.geometry.h, model.curl_coeff
    P2 = f.PiB[..., 3:, :]
    ea = [eps_a[..., i, :] for i in range(3)]
    if g:
        for cc in (1, 2, 3):
            acc = sum(
                so31_commutator(ea[a - 1], raise_(two_form(P2, cc, a))) for a in (1, 2, 3)
            )
            dPA[..., cc, :] += c * g * lower(acc)
    # delta B_bc = (c / 2) (D_c eps_b - D_b eps_c)
    for s, (b, cc) in enumerate(SPATIAL_PAIRS):
        dB[..., 3 + s, :] += 0.5 * c * (cov(f.A, ea[b - 1], cc, g, h) - cov(f.A, ea[cc - 1], b, g, h))
    if model.is_gbf:
        dA[..., 1:, :] += model.k * eps_a
    else:
        dPA[..., 1:, :] -= lower(M._curl_upper(f.A, ea, g, h))


def gauge_transform_closed_form(model, state, params):
    f = unpack(state, model.geometry)
    out = _empty(f)
    out[0][..., 0, :] += params.e0dot
    out[1][..., 0:3, :] += params.e0adot
    _gauss_part(model, f, params.eps, out)
    _gammaa_part(model, f, params.eps_a, out)
    return pack(Fields(*out))


# ----------------------------------------------------------- diffeomorphisms


def diffeo_params(model, state, xi):
    """Gauge parameters reproducing the diffeomorphism along ``xi`` (N,N,N,4):
    eps = -eps_0 = -xi^rho A_rho and eps_mu = xi^rho B_{mu rho}.

    The time-derivative smearings are zero (static parameters)."""
    f = unpack(state, model.geometry)
    xi = np.asarray(xi, dtype=float)
    eps = -np.einsum("...r,...ri->...i", xi, f.A)
    Bfull = _full_two_form(f.B)  # (..., 4, 4, 6)
    eps_mu = np.einsum("...r,...mri->...mi", xi, Bfull)
    z = np.zeros_like(eps_mu[..., 1:, :])
    return GaugeParams(
        eps, eps_mu[..., 1:, :], np.zeros_like(eps), z,
        eps0=-eps, eps0a=-eps_mu[..., 1:, :], xi=xi,
    )


def _full_two_form(B):
    """Antisymmetric (..., 4, 4, 6) array from the mu<nu slots."""
    from .lorentz import PAIRS

    out = np.zeros(B.shape[:-2] + (4, 4, 6), dtype=B.dtype)
    for s, (m, n) in enumerate(PAIRS):
        out[..., m, n, :] = B[..., s, :]
        out[..., n, m, :] = -B[..., s, :]
    return out


def primary_flow_configuration(model, state):
    """{A_mu, H_P} and {B_{mu nu}, H_P} in closed form, with the multipliers
    of :func:`models.multiplier_solve` (lambda^0 and lambda_{0a} set to 0)."""
    geom = model.geometry
    f = unpack(state, geom)
    g, h = model.g, geom.h
    lam = M.multiplier_solve(model, state)
    Adot = np.zeros_like(f.A)
    Bdot = np.zeros_like(f.B)
    A0 = f.A[..., 0, :]
    for a in (1, 2, 3):
        Adot[..., a, :] = cov(f.A, A0, a, g, h) + lam["la"][..., a - 1, :]
        if model.is_gbf:
            Adot[..., a, :] -= model.k * f.B[..., a - 1, :]
    Bdot[..., 3:, :] = lam["lab"]
    return Adot, Bdot


def diffeo_residual(model, state, xi):
    """Compare the gauge transformation with parameters :func:`diffeo_params`
    to the lattice Lie derivative of the spatial fields (A_a, B_ab).

    Time derivatives inside the Lie derivative are replaced by Hamilton's
    equations under the primary Hamiltonian with the solved multipliers,
    and ``xi^0`` must be constant.  Returns the max norms of
    ``delta - Lie - corrections`` (``residual``), ``delta - Lie``
    (``lie_only``) and of the corrections, where the corrections are
    xi^rho (F_{a rho} + k B_{a rho}) for A_a and -xi^rho (DB)_{rho b c}
    for B_bc.
    """
    geom = model.geometry
    g, h, k = model.g, geom.h, (model.k if model.is_gbf else 0.0)
    xi = np.asarray(xi, dtype=float)
    if np.ptp(xi[..., 0]) > 0:
        raise ValueError("xi^0 must be constant on the lattice")
    f = unpack(state, geom)
    delta = unpack(gauge_transform_closed_form(model, state, diffeo_params(model, state, xi)), geom)

    A, B = f.A, _full_two_form(f.B)
    Adot, Bdot = primary_flow_configuration(model, state)
    Bdot = _full_two_form(Bdot)
    x = [xi[..., r, None] for r in range(4)]

    def dxi(r, a):
        return central_difference(xi[..., r], a, h)[..., None]

    def D(mu, X):
        # spatial covariant derivative; mu = 0 uses the supplied time flow
        return cov(A, X, mu, g, h)

    res, lie_only, corr = 0.0, 0.0, 0.0
    F = {}
    Fs = M._F(model, f)
    for s, (b, c) in enumerate(SPATIAL_PAIRS):
        F[(b, c)], F[(c, b)] = Fs[..., s, :], -Fs[..., s, :]
    for a in (1, 2, 3):
        F[(a, a)] = np.zeros_like(A[..., 0, :])
        # F_{a0} = D_a A_0 - dA_a/dt
        F[(a, 0)] = D(a, A[..., 0, :]) - Adot[..., a, :]
    for a in (1, 2, 3):
        lie = x[0] * Adot[..., a, :]
        lie = lie + sum(x[b] * diff(A[..., a, :], b, h) + A[..., b, :] * dxi(b, a) for b in (1, 2, 3))
        cor = sum(x[r] * (F[(a, r)] + k * B[..., a, r, :]) for r in range(4))
        d = delta.A[..., a, :]
        res = max(res, float(np.abs(d - lie - cor).max()))
        lie_only = max(lie_only, float(np.abs(d - lie).max()))
        corr = max(corr, float(np.abs(cor).max()))

    def DB(r, b, c):
        # (DB)_{rbc} = D_r B_bc + D_b B_cr + D_c B_rb, D_0 B = dB/dt + g[A_0, B]
        def d(mu, X):
            if mu == 0:
                raise AssertionError
            return D(mu, X)

        terms = 0.0
        for p, q, s in ((r, b, c), (b, c, r), (c, r, b)):
            X = B[..., q, s, :]
            if p == 0:
                t = Bdot[..., q, s, :]
                if g:
                    t = t + g * so31_commutator(A[..., 0, :], X)
            else:
                t = d(p, X)
            terms = terms + t
        return terms

    for s, (b, c) in enumerate(SPATIAL_PAIRS):
        lie = x[0] * Bdot[..., b, c, :]
        lie = lie + sum(x[d] * diff(B[..., b, c, :], d, h) for d in (1, 2, 3))
        lie = lie + sum(
            B[..., r, c, :] * dxi(r, b) + B[..., b, r, :] * dxi(r, c) for r in (1, 2, 3)
        )
        cor = -sum(x[r] * DB(r, b, c) for r in range(4))
        dd = delta.B[..., 3 + s, :]
        res = max(res, float(np.abs(dd - lie - cor).max()))
        lie_only = max(lie_only, float(np.abs(dd - lie).max()))
        corr = max(corr, float(np.abs(cor).max()))
    return {"residual": res, "lie_only": lie_only, "correction": corr}


def smooth_xi(geometry, seed, length=1.0, xi0=0.3):
    """Low-frequency spatial vector field with constant time component."""
    rng = np.random.default_rng(seed)
    amp = rng.uniform(-1.0, 1.0, (3, 3))
    phase = rng.uniform(0.0, 2 * np.pi, (3, 3))
    x = np.arange(geometry.N) * geometry.h * 2 * np.pi / length
    X = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1)
    xi = np.empty(X.shape[:3] + (4,))
    xi[..., 0] = xi0
    for r in range(3):
        xi[..., r + 1] = sum(amp[r, d] * np.sin(X[..., d] + phase[r, d]) for d in range(3))
    return xi


# --------------------------------------------------------- equations of motion


def extended_eom_closed_form(model, state, mult):
    """Time derivatives under the total Hamiltonian H + u.gamma + v.chi.

    The gamma part acts like a gauge transformation with eps = u - A_0 and
    eps_a = u_a - B_0a; Pi^0 and Pi^{0a} pick up the constraints multiplying
    A_0 and B_0a, and the v terms shift the configuration velocities.
    """
    geom = model.geometry
    m = mult.filled(geom)
    f = unpack(state, geom)
    g, h = model.g, geom.h
    out = _empty(f)
    dA, dB, dPA, dPB = out
    dA[..., 0, :] += m.u0
    dB[..., 0:3, :] += m.u0a
    _gauss_part(model, f, m.u - f.A[..., 0, :], out)
    _gammaa_part(model, f, m.ua - f.B[..., 0:3, :], out)
    dPA[..., 0, :] += M.gauss(model, f)
    dPB[..., 0:3, :] += 0.5 * M._gammaa(model, f)
    # second-class multipliers
    dA[..., 1:, :] += m.va
    dB[..., 3:, :] += m.vab
    va = [m.va[..., i, :] for i in range(3)]
    if model.is_gbf:
        dPB[..., 3:, :] += model.k * lower(_unstar_upper(m.va))
        dPA[..., 1:, :] += 2.0 * lower(M._curl_upper(f.A, va, g, h))
    else:
        dPB[..., 3:, :] += 0.5 * lower(_unstar_upper(m.va))
    return pack(Fields(*out))


def _unstar_upper(v):
    """eta^{abc} v_a for b<c, ``(..., 3, 6)`` in SPATIAL_PAIRS order."""
    from .lattice import unstar

    return unstar(v)


def extended_eom_bracket(model, state, mult):
    return hamiltonian_flow(lambda z: M.total_hamiltonian(model, z, mult), state, model.geometry)


def extended_eom_check(model, state, mult):
    """Max discrepancy per field kind between {z, H_T} and the closed forms."""
    geom = model.geometry
    a = unpack(extended_eom_bracket(model, state, mult), geom)
    b = unpack(extended_eom_closed_form(model, state, mult), geom)
    out = {name: float(np.abs(x - y).max()) for name, x, y in zip(Fields._fields, a, b)}
    out["max"] = max(out.values())
    return out


def variation_rank(model, state, gap_threshold=1e6):
    """Rank of the map from gauge parameters to field variations at ``state``.

    The generator is linear in the parameters, so the variation matrix is
    assembled column by column from unit smearings.
    """
    from .brackets import numerical_rank

    geom = model.geometry
    N = geom.N
    zero = GaugeParams.zeros(geom)
    shapes = [("eps", (N, N, N, 6)), ("eps_a", (N, N, N, 3, 6)),
              ("e0dot", (N, N, N, 6)), ("e0adot", (N, N, N, 3, 6))]
    cols = []
    for name, shape in shapes:
        for idx in np.ndindex(*shape):
            p = GaugeParams(zero.eps.copy(), zero.eps_a.copy(), zero.e0dot.copy(), zero.e0adot.copy())
            getattr(p, name)[idx] = 1.0
            cols.append(gauge_transform_closed_form(model, state, p))
    V = np.array(cols).T
    return numerical_rank(V, gap_threshold, null_basis=False)


__all__ = [
    "GaugeParams",
    "generator",
    "gauge_transform_bracket",
    "gauge_transform_closed_form",
    "diffeo_params",
    "diffeo_residual",
    "smooth_xi",
    "extended_eom_closed_form",
    "extended_eom_check",
    "variation_rank",
    "spatial_B",
]
