"""Periodic 3-lattice, phase-space layout and discrete gauge-field operators.

Flat state layout (site-major, then kind-major)::

    offset = site * 120 + local
    local  0..23   A_mu^{[IJ]}      mu*6 + pair
          24..59   B_{mu nu}^{[IJ]} slot*6 + pair, slot over mu<nu pairs
          60..83   p_A (conjugate to A), same ordering as A
          84..119  p_B (conjugate to B), same ordering as B

with ``site = (x1 * N + x2) * N + x3``.  The antisymmetrised momenta used in
every formula are Pi^mu = p_A / 2 and Pi^{mu nu} = p_B / 4, carrying lower
internal indices.  Pair-valued lattice fields are arrays ``(..., N, N, N, 6)``;
leading axes are batch axes and are carried through every operator.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .lorentz import PAIRS, lower, pair_index, so31_commutator

PER_SITE = 120
KINDS = {"A": (0, 4), "B": (24, 6), "pA": (60, 4), "pB": (84, 6)}

#: spatial (b, c) pairs with b < c, in the order used by 2-form arrays
SPATIAL_PAIRS = [(1, 2), (1, 3), (2, 3)]


@dataclass(frozen=True)
class LatticeGeometry:
    N: int
    h: float = 1.0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")

    @property
    def n_sites(self):
        return self.N**3

    @property
    def size(self):
        return PER_SITE * self.N**3

    @property
    def volume(self):
        """Cell volume h^3 (measure of the lattice sum)."""
        return self.h**3


class FieldLayout:
    """Bijection between (kind, site, slot, pair) and flat offsets."""

    def __init__(self, geometry):
        self.geometry = geometry

    def encode(self, kind, site, slot, pair):
        base, nslots = KINDS[kind]
        if not (0 <= slot < nslots and 0 <= pair < 6):
            raise IndexError((kind, slot, pair))
        if not 0 <= site < self.geometry.n_sites:
            raise IndexError(site)
        return site * PER_SITE + base + slot * 6 + pair

    def decode(self, offset):
        if not 0 <= offset < self.geometry.size:
            raise IndexError(offset)
        site, local = divmod(offset, PER_SITE)
        for kind, (base, nslots) in KINDS.items():
            if base <= local < base + 6 * nslots:
                slot, pair = divmod(local - base, 6)
                return kind, site, slot, pair
        raise AssertionError("unreachable")

    def site_index(self, x1, x2, x3):
        N = self.geometry.N
        return ((x1 % N) * N + x2 % N) * N + x3 % N

    def momentum_mask(self):
        local = np.zeros(PER_SITE, dtype=bool)
        local[60:] = True
        return np.tile(local, self.geometry.n_sites)


class Fields(NamedTuple):
    """Structured view of a state.  ``PiA`` and ``PiB`` are the
    antisymmetrised momenta (p_A / 2 and p_B / 4)."""

    A: np.ndarray  # (..., N, N, N, 4, 6)
    B: np.ndarray  # (..., N, N, N, 6, 6)
    PiA: np.ndarray  # (..., N, N, N, 4, 6)
    PiB: np.ndarray  # (..., N, N, N, 6, 6)


def unpack(state, geometry):
    N = geometry.N
    s = np.asarray(state).reshape(np.shape(state)[:-1] + (N, N, N, PER_SITE))
    A = s[..., 0:24].reshape(s.shape[:-1] + (4, 6))
    B = s[..., 24:60].reshape(s.shape[:-1] + (6, 6))
    PiA = 0.5 * s[..., 60:84].reshape(s.shape[:-1] + (4, 6))
    PiB = 0.25 * s[..., 84:120].reshape(s.shape[:-1] + (6, 6))
    return Fields(A, B, PiA, PiB)


def pack(fields):
    A, B, PiA, PiB = fields
    lead = A.shape[:-2]
    s = np.concatenate(
        [
            A.reshape(lead + (24,)),
            B.reshape(lead + (36,)),
            2.0 * PiA.reshape(lead + (24,)),
            4.0 * PiB.reshape(lead + (36,)),
        ],
        axis=-1,
    )
    return s.reshape(lead[:-3] + (-1,))


# ---------------------------------------------------------------- operators


def _shift(f, a, step, trailing):
    return np.roll(f, -step, axis=-(4 - a) - trailing)


def central_difference(f, a, h=1.0, trailing=0):
    """(f(x + e_a) - f(x - e_a)) / 2h with periodic wraparound.

    ``f`` has shape ``(..., N, N, N, *t)`` with ``len(t) == trailing``.
    """
    if a not in (1, 2, 3):
        raise ValueError(f"direction must be 1..3, got {a}")
    return (_shift(f, a, 1, trailing) - _shift(f, a, -1, trailing)) / (2.0 * h)


def diff(X, a, h):
    """Central difference of a pair-valued field ``(..., N, N, N, 6)``."""
    return central_difference(X, a, h, trailing=1)


def cov(A, X, b, g, h):
    """D_b X = Delta_b X + g [A_b, X] for an upper-index pair field."""
    out = diff(X, b, h)
    if g:
        out = out + g * so31_commutator(A[..., b, :], X)
    return out


def cov_lower(A, V, b, g, h):
    """Covariant derivative of a lower-index pair field."""
    return lower(cov(A, lower(V), b, g, h))


def two_form(X, b, c):
    """Component X_{bc} of a spatial 2-form stored as ``(..., 3, 6)``."""
    if b == c:
        return np.zeros_like(X[..., 0, :])
    if b < c:
        return X[..., SPATIAL_PAIRS.index((b, c)), :]
    return -X[..., SPATIAL_PAIRS.index((c, b)), :]


def star(X):
    """Spatial dual (1/2) eta^{abc} X_{bc} of a 2-form ``(..., 3, 6)``."""
    return np.stack([X[..., 2, :], -X[..., 1, :], X[..., 0, :]], axis=-2)


def unstar(Y):
    """Inverse of :func:`star`."""
    return np.stack([Y[..., 2, :], -Y[..., 1, :], Y[..., 0, :]], axis=-2)


def spatial_B(B):
    """Spatial components B_{bc} (b<c) as a 2-form ``(..., 3, 6)``."""
    return np.stack([B[..., pair_index(b, c)[0], :] for b, c in SPATIAL_PAIRS], axis=-2)


def curvature(A, g, h):
    """F_{bc} = Delta_b A_c - Delta_c A_b + g [A_b, A_c] for b<c, ``(..., 3, 6)``."""
    out = []
    for b, c in SPATIAL_PAIRS:
        F = diff(A[..., c, :], b, h) - diff(A[..., b, :], c, h)
        if g:
            F = F + g * so31_commutator(A[..., b, :], A[..., c, :])
        out.append(F)
    return np.stack(out, axis=-2)


def covariant_divergence(A, V, g, h):
    """sum_a D_a V^a for a lower-index vector field ``V`` of shape
    ``(..., N, N, N, 3, 6)`` (spatial index a = 1..3 on axis -2)."""
    return sum(cov_lower(A, V[..., a - 1, :], a, g, h) for a in (1, 2, 3))


# ------------------------------------------------------------- constructors


class UnknownStateKind(ValueError):
    pass


def make_state(kind, seed, model):
    """Deterministic test points.

    ``random``: i.i.d. uniform entries in [-1, 1].
    ``onshell-bf``: A = 0, constant B_ab, Pi^a = (1/2) eta^{abc} B_bc, random
    B_0a, every other momentum zero.
    ``onshell-gbf``: A = 0, B_ab = 0, all momenta zero, random B_0a.
    """
    geom = model.geometry
    N = geom.N
    rng = np.random.default_rng(seed)
    if kind == "random":
        return rng.uniform(-1.0, 1.0, geom.size)
    if kind not in ("onshell-bf", "onshell-gbf"):
        raise UnknownStateKind(kind)
    A = np.zeros((N, N, N, 4, 6))
    B = np.zeros((N, N, N, 6, 6))
    PiA = np.zeros_like(A)
    PiB = np.zeros_like(B)
    B[..., 0:3, :] = rng.uniform(-1.0, 1.0, (N, N, N, 3, 6))  # B_0a
    if kind == "onshell-bf":
        Bs = rng.uniform(-1.0, 1.0, (3, 6))
        for s, (b, c) in enumerate(SPATIAL_PAIRS):
            B[..., pair_index(b, c)[0], :] = Bs[s]
        PiA[..., 1:, :] = lower(star(spatial_B(B)))
    return pack(Fields(A, B, PiA, PiB))


def smooth_state(geometry, seed, length=1.0, modes=2):
    """Lattice samples of fixed low-frequency sinusoids on a box of side
    ``length``; the continuum fields depend only on ``seed``, so refining N
    (with h = length / N) samples the same functions."""
    rng = np.random.default_rng(seed)
    amp = rng.uniform(-0.5, 0.5, (PER_SITE, modes, 3))
    phase = rng.uniform(0.0, 2 * np.pi, (PER_SITE, modes, 3))
    x = np.arange(geometry.N) * geometry.h * 2 * np.pi / length
    X = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1)  # (N,N,N,3)
    out = np.zeros(X.shape[:3] + (PER_SITE,))
    for m in range(modes):
        for d in range(3):
            out += amp[:, m, d] * np.sin((m + 1) * X[..., d, None] + phase[:, m, d])
    return out.reshape(-1)


def write_state_text(state, path):
    with open(path, "w") as fh:
        for o, v in enumerate(np.asarray(state)):
            fh.write(f"{o} {float(v)!r}\n")


def read_state_text(path):
    offsets, values = [], []
    with open(path) as fh:
        for line in fh:
            o, v = line.split()
            offsets.append(int(o))
            values.append(float(v))
    state = np.empty(len(values))
    state[np.array(offsets)] = values
    return state


__all__ = [
    "LatticeGeometry",
    "FieldLayout",
    "Fields",
    "PAIRS",
    "SPATIAL_PAIRS",
    "unpack",
    "pack",
    "central_difference",
    "curvature",
    "covariant_divergence",
    "make_state",
    "smooth_state",
]
