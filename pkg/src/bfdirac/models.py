"""Constraint families, Hamiltonians and Lagrangians of the lattice BF and
generalized BF (GBF) theories.

Every evaluator accepts a flat state with optional leading batch axes (real
or complex; complex inputs are used for exact forward-mode derivatives) and
returns per-site components ``(..., N, N, N, arity)`` with lower internal
indices.  ``g`` scales every commutator term; ``g = 0`` is the abelian
truncation.
"""

from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    SPATIAL_PAIRS,
    LatticeGeometry,
    cov,
    cov_lower,
    covariant_divergence,
    curvature,
    spatial_B,
    star,
    two_form,
    unpack,
    unstar,
)
from .lorentz import lower, pairing, raise_, so31_commutator

#: sign of the B-rotation term in the Gauss constraint, fixed by first-class closure
GAUSS_SIGN = 1.0
#: coefficient c of c * D_b Pi^{ba} in gamma^a, fixed by first-class closure
CURL_COEFF = 2.0


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    kind: str  # "BF" or "GBF"
    geometry: LatticeGeometry = field(default_factory=lambda: LatticeGeometry(3))
    k: float = 1.0
    g: float = 1.0
    gauss_sign: float = GAUSS_SIGN
    curl_coeff: float = CURL_COEFF

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in ("BF", "GBF"):
            raise ModelError(f"unknown model kind {self.kind!r}")
        if kind == "GBF" and self.k == 0:
            raise ModelError("k = 0 degenerates the GBF second-class matrix")

    def with_(self, **kw):
        d = dict(
            kind=self.kind, geometry=self.geometry, k=self.k, g=self.g,
            gauss_sign=self.gauss_sign, curl_coeff=self.curl_coeff,
        )
        d.update(kw)
        return ModelSpec(**d)

    @property
    def is_gbf(self):
        return self.kind == "GBF"


# -------------------------------------------------------------- building blocks


def _spatial(X):
    return X[..., 1:, :]


def _pi2(PiB):
    """Spatial momenta Pi^{ab} (a<b) as a 2-form ``(..., 3, 6)``."""
    return PiB[..., 3:6, :]


def _flat(X):
    return X.reshape(X.shape[:-2] + (-1,))


def _rotation(Bs, P2):
    """2 sum_{b<c} [B_bc, Pi^{bc}] with the result lowered."""
    return 2.0 * lower(so31_commutator(Bs, raise_(P2)).sum(axis=-2))


def _curl_momentum(m, f):
    """c * sum_b D_b Pi^{ba} for a = 1..3, ``(..., 3, 6)``."""
    P2 = _pi2(f.PiB)
    h, g = m.geometry.h, m.g
    out = []
    for a in (1, 2, 3):
        out.append(sum(cov_lower(f.A, two_form(P2, b, a), b, g, h) for b in (1, 2, 3)))
    return m.curl_coeff * np.stack(out, axis=-2)


def _F(m, f):
    return curvature(f.A, m.g, m.geometry.h)


def _psi(m, f):
    return covariant_divergence(f.A, _spatial(f.PiA), m.g, m.geometry.h)


# ---------------------------------------------------------------- families


def phi0(m, f):
    return f.PiA[..., 0, :]


def phi0a(m, f):
    return _flat(f.PiB[..., 0:3, :])


def phiab(m, f):
    return _flat(_pi2(f.PiB))


def _phia(m, f):
    Bs = spatial_B(f.B)
    if m.is_gbf:
        return _spatial(f.PiA) - 2.0 * lower(star(_F(m, f) + m.k * Bs))
    return _spatial(f.PiA) - lower(star(Bs))


def phia(m, f):
    return _flat(_phia(m, f))


def psi(m, f):
    return _psi(m, f)


def psi0a(m, f):
    if m.is_gbf:
        return _flat(m.k * _spatial(f.PiA))
    return _flat(lower(star(_F(m, f))))


def gauss(m, f):
    out = _psi(m, f)
    if m.g:
        out = out + m.gauss_sign * m.g * _rotation(spatial_B(f.B), _pi2(f.PiB))
    return out


def _gammaa(m, f):
    if m.is_gbf:
        head = m.k * _spatial(f.PiA)
    else:
        head = lower(star(_F(m, f)))
    return head + _curl_momentum(m, f)


def gammaa(m, f):
    return _flat(_gammaa(m, f))


def gauss_momentum_form(m, f):
    """Gauss constraint written with Pi^a Pi^{bc}; equals :func:`gauss` up to
    terms quadratic in the second-class constraints (BF only)."""
    P = raise_(_spatial(f.PiA))
    Q = raise_(_pi2(f.PiB))
    # eta_{abc} Pi^a Pi^{bc} summed over b, c  ->  2 * Pi^a (*Pi)^a
    return _psi(m, f) + m.gauss_sign * m.g * 2.0 * lower(
        so31_commutator(unstar(P), Q).sum(axis=-2)
    )


FAMILIES = {
    "phi0": (6, phi0),
    "phia": (18, phia),
    "phi0a": (18, phi0a),
    "phiab": (18, phiab),
    "psi": (6, psi),
    "psi0a": (18, psi0a),
    "gamma0": (6, phi0),
    "gamma0a": (18, phi0a),
    "gamma": (6, gauss),
    "gammaa": (18, gammaa),
    "chia": (18, phia),
    "chiab": (18, phiab),
}

PRIMARY = ("phi0", "phia", "phi0a", "phiab")
SECONDARY = ("psi", "psi0a")
FIRST_CLASS = ("gamma0", "gamma0a", "gamma", "gammaa")
SECOND_CLASS = ("chia", "chiab")
ALL_CONSTRAINTS = FIRST_CLASS + SECOND_CLASS


class ConstraintFamily:
    """A labelled constraint family with evaluation and Jacobian-row access."""

    def __init__(self, label, model):
        if label not in FAMILIES:
            raise KeyError(label)
        self.label = label
        self.model = model
        self.arity, self._fn = FAMILIES[label]

    def __repr__(self):
        return f"ConstraintFamily({self.label!r}, arity={self.arity})"

    def evaluate(self, state):
        """Per-site values ``(..., n_sites, arity)``."""
        vals = self._fn(self.model, unpack(state, self.model.geometry))
        return vals.reshape(vals.shape[:-4] + (-1, self.arity))

    def component(self, site, comp):
        def f(state):
            return self.evaluate(state)[..., site, comp]

        return f

    def jacobian_row(self, state, site, comp):
        from .derivatives import gradient

        return gradient(self.component(site, comp), state)


def constraint_values(model, state, families):
    """Concatenated constraint vector, family-major then site then component."""
    f = unpack(state, model.geometry)
    parts = []
    for name in families:
        arity, fn = FAMILIES[name]
        v = fn(model, f)
        parts.append(v.reshape(v.shape[:-4] + (-1,)))
    return np.concatenate(parts, axis=-1)


def constraint_labels(model, families):
    n = model.geometry.n_sites
    return [
        (name, site, comp)
        for name in families
        for site in range(n)
        for comp in range(FAMILIES[name][0])
    ]


def family_counts(families):
    return sum(FAMILIES[name][0] for name in families)


# ------------------------------------------------------------- Hamiltonians


def _lattice_sum(model, density):
    return model.geometry.volume * density.sum(axis=(-3, -2, -1))


def canonical_hamiltonian(model, state):
    f = unpack(state, model.geometry)
    A0 = f.A[..., 0, :]
    B0 = f.B[..., 0:3, :]
    dens = pairing(A0, _psi(model, f))
    if model.is_gbf:
        dens = dens + model.k * pairing(B0, _spatial(f.PiA)).sum(axis=-1)
    else:
        dens = dens + pairing(B0, lower(star(_F(model, f)))).sum(axis=-1)
    return -_lattice_sum(model, dens)


def first_class_hamiltonian(model, state):
    """H = -<A_0, gamma> - <B_0a, gamma^a>; agrees with the canonical
    Hamiltonian up to terms linear in the second-class constraints."""
    f = unpack(state, model.geometry)
    dens = pairing(f.A[..., 0, :], gauss(model, f))
    dens = dens + pairing(f.B[..., 0:3, :], _gammaa(model, f)).sum(axis=-1)
    return -_lattice_sum(model, dens)


@dataclass
class Multipliers:
    """Multiplier fields of the total Hamiltonian, upper internal indices.

    Shapes (per site): u0 6, u0a 3x6, u 6, ua 3x6, va 3x6, vab 3x6 (a<b).
    Missing entries are zero.
    """

    u0: np.ndarray = None
    u0a: np.ndarray = None
    u: np.ndarray = None
    ua: np.ndarray = None
    va: np.ndarray = None
    vab: np.ndarray = None

    @classmethod
    def random(cls, geometry, seed, scale=1.0):
        rng = np.random.default_rng(seed)
        N = geometry.N
        one = (N, N, N, 6)
        three = (N, N, N, 3, 6)
        r = lambda s: scale * rng.uniform(-1.0, 1.0, s)  # noqa: E731
        return cls(r(one), r(three), r(one), r(three), r(three), r(three))

    def filled(self, geometry):
        N = geometry.N
        z1 = np.zeros((N, N, N, 6))
        z3 = np.zeros((N, N, N, 3, 6))
        pick = lambda x, z: z if x is None else np.asarray(x)  # noqa: E731
        return Multipliers(
            pick(self.u0, z1), pick(self.u0a, z3), pick(self.u, z1),
            pick(self.ua, z3), pick(self.va, z3), pick(self.vab, z3),
        )


def total_hamiltonian(model, state, mult):
    """H plus every first- and second-class constraint with its multiplier.

    Index contractions are full: 2-form indexed pairs (0a), (ab) are summed
    over both orderings, which doubles the a<b sums.
    """
    m = mult.filled(model.geometry)
    f = unpack(state, model.geometry)
    dens = (
        pairing(m.u0, f.PiA[..., 0, :])
        + 2.0 * pairing(m.u0a, f.PiB[..., 0:3, :]).sum(axis=-1)
        + pairing(m.u, gauss(model, f))
        + pairing(m.ua, _gammaa(model, f)).sum(axis=-1)
        + pairing(m.va, _phia(model, f)).sum(axis=-1)
        + 2.0 * pairing(m.vab, _pi2(f.PiB)).sum(axis=-1)
    )
    return first_class_hamiltonian(model, state) + _lattice_sum(model, dens)


def primary_hamiltonian(model, state, lam):
    """H_c plus primary constraints; ``lam`` keys: l0, la, l0a, lab (upper)."""
    f = unpack(state, model.geometry)
    N = model.geometry.N
    z1 = np.zeros((N, N, N, 6))
    z3 = np.zeros((N, N, N, 3, 6))
    pick = lambda key, z: z if lam.get(key) is None else lam[key]  # noqa: E731
    l0 = pick("l0", z1)
    la = pick("la", z3)
    l0a = pick("l0a", z3)
    lab = pick("lab", z3)
    dens = (
        pairing(l0, f.PiA[..., 0, :])
        + pairing(la, _phia(model, f)).sum(axis=-1)
        + 2.0 * pairing(l0a, f.PiB[..., 0:3, :]).sum(axis=-1)
        + 2.0 * pairing(lab, _pi2(f.PiB)).sum(axis=-1)
    )
    return canonical_hamiltonian(model, state) + _lattice_sum(model, dens)


# ---------------------------------------------------------------- Lagrangian


def lagrangian(model, q, v):
    """Lattice Lagrangian L(q, qdot) for configuration ``q`` and velocity
    ``v``; both hold the 60 per-site (A, B) coordinates in layout order."""
    geom = model.geometry
    N = geom.N
    lead = np.shape(v)[:-1]
    q = np.broadcast_to(q, lead + np.shape(q)[-1:])
    qs = np.asarray(q).reshape(lead + (N, N, N, 60))
    vs = np.asarray(v).reshape(lead + (N, N, N, 60))
    A = qs[..., 0:24].reshape(lead + (N, N, N, 4, 6))
    B = qs[..., 24:60].reshape(lead + (N, N, N, 6, 6))
    Adot = vs[..., 0:24].reshape(lead + (N, N, N, 4, 6))
    g, h = model.g, geom.h
    F = curvature(A, g, h)
    Bs = spatial_B(B)
    B0 = B[..., 0:3, :]
    A0 = A[..., 0, :]
    # Adot_a - D_a A_0
    E = np.stack([Adot[..., a, :] - cov(A, A0, a, g, h) for a in (1, 2, 3)], axis=-2)
    if model.is_gbf:
        k = model.k
        dens = (
            pairing(2.0 * star(F + k * Bs), lower(E)).sum(axis=-1)
            + k * pairing(B0, lower(2.0 * star(F))).sum(axis=-1)
            + k * k * pairing(B0, lower(2.0 * star(Bs))).sum(axis=-1)
        )
    else:
        dens = pairing(B0, lower(star(F))).sum(axis=-1) + pairing(
            star(Bs), lower(E)
        ).sum(axis=-1)
    return geom.volume * dens.sum(axis=(-3, -2, -1))


# --------------------------------------------------------- closed-form pieces


def phia_hamiltonian_flow(model, state):
    """Closed form of {phi^a, H_c} per site, ``(N, N, N, 3, 6)``."""
    f = unpack(state, model.geometry)
    g, h = model.g, model.geometry.h
    A0 = f.A[..., 0, :]
    B0 = f.B[..., 0:3, :]
    Pi = _spatial(f.PiA)
    out = -g * lower(so31_commutator(A0[..., None, :], raise_(Pi))) if g else 0.0 * Pi
    if model.is_gbf:
        # {A_c, H_c} = D_c A_0 - k B_0c
        X = [cov(f.A, A0, c, g, h) - model.k * B0[..., c - 1, :] for c in (1, 2, 3)]
        curl = _curl_upper(f.A, X, g, h)
        return out - 2.0 * lower(curl)
    curl = _curl_upper(f.A, [B0[..., a, :] for a in range(3)], g, h)
    return out - lower(curl)


def _curl_upper(A, X, g, h):
    """(curl X)^c = sum_{a,b} eta^{abc} D_a X_b for upper pair fields."""
    from .lorentz import EPS3

    out = []
    for c in range(3):
        acc = 0.0
        for a in range(3):
            for b in range(3):
                e = EPS3[a, b, c]
                if e:
                    acc = acc + e * cov(A, X[b], a + 1, g, h)
        out.append(acc)
    return np.stack(out, axis=-2)


def multiplier_solve(model, state):
    """Multipliers fixed by preserving phi^a and phi^{ab}.

    Returns a dict with ``la`` (identically zero) and ``lab`` (the 2-form
    lambda_{bc}, upper indices, ``(N, N, N, 3, 6)``); ``l0`` and ``l0a`` are
    reported as ``None`` since they stay arbitrary.
    """
    R = phia_hamiltonian_flow(model, state)
    # solves R + scale * star(lambda) = 0 with the model-specific phi^a/phi^{bc} block
    scale = 2.0 * model.k if model.is_gbf else -1.0
    lab = unstar(raise_(R)) / scale
    return {"la": np.zeros_like(lab), "lab": lab, "l0": None, "l0a": None}


def reducibility_residual(model, state):
    """Per-site residual of the Bianchi-induced relation among first-class
    constraints, ``(N, N, N, 6)``."""
    f = unpack(state, model.geometry)
    g, h = model.g, model.geometry.h
    Ga = _gammaa(model, f)
    r = sum(cov_lower(f.A, Ga[..., a - 1, :], a, g, h) for a in (1, 2, 3))
    F = _F(model, f)
    if model.is_gbf:
        r = r - model.k * gauss(model, f)
        F = F + model.k * spatial_B(f.B)
    if g:
        r = r + 2.0 * g * lower(so31_commutator(F, raise_(_pi2(f.PiB))).sum(axis=-2))
    return r


__all__ = [
    "ModelSpec",
    "ConstraintFamily",
    "FAMILIES",
    "PRIMARY",
    "SECONDARY",
    "FIRST_CLASS",
    "SECOND_CLASS",
    "ALL_CONSTRAINTS",
    "SPATIAL_PAIRS",
    "constraint_values",
    "canonical_hamiltonian",
    "first_class_hamiltonian",
    "total_hamiltonian",
    "primary_hamiltonian",
    "lagrangian",
    "multiplier_solve",
    "reducibility_residual",
]
