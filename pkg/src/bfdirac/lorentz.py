"""Index machinery for so(3,1) in the antisymmetric pair basis.

Antisymmetric internal tensors X^{IJ} are stored by their six I<J
components in lexicographic order.  Spacetime 2-forms B_{mu nu} reuse the
same ordering for their (mu, nu) slot.  Stored fields always carry upper
internal indices; momenta carry lower ones.  ``lower``/``raise_`` convert
with the per-pair weight w_p = eta_II * eta_JJ.
"""

import itertools

import numpy as np

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])

PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
_SLOT = {p: i for i, p in enumerate(PAIRS)}

#: metric weight of each stored pair; -1 for pairs containing the index 0
PAIR_WEIGHTS = np.array([ETA[i, i] * ETA[j, j] for i, j in PAIRS])


class InvalidPairError(ValueError):
    pass


def pair_index(i, j):
    """Return ``(slot, sign)`` such that X^{ij} = sign * x[slot]."""
    if i == j:
        raise InvalidPairError(f"pair ({i}, {j}) has repeated index")
    if not (0 <= i <= 3 and 0 <= j <= 3):
        raise InvalidPairError(f"pair ({i}, {j}) out of range")
    if i < j:
        return _SLOT[(i, j)], 1
    return _SLOT[(j, i)], -1


def metric_eta(i):
    if not 0 <= i <= 3:
        raise IndexError(i)
    return -1 if i == 0 else 1


def epsilon_spatial(a, b, c):
    """Spatial Levi-Civita symbol on indices 1..3 with eps^{123} = +1."""
    idx = (a, b, c)
    if sorted(idx) != [1, 2, 3]:
        return 0
    # parity of the permutation
    inversions = sum(1 for x, y in itertools.combinations(idx, 2) if x > y)
    return -1 if inversions % 2 else 1


EPS3 = np.zeros((3, 3, 3))
for _a, _b, _c in itertools.permutations(range(3)):
    EPS3[_a, _b, _c] = epsilon_spatial(_a + 1, _b + 1, _c + 1)


def to_matrix(u):
    """Pair vector(s) ``(..., 6)`` -> antisymmetric ``(..., 4, 4)`` matrices."""
    u = np.asarray(u)
    m = np.zeros(u.shape[:-1] + (4, 4), dtype=u.dtype)
    for s, (i, j) in enumerate(PAIRS):
        m[..., i, j] = u[..., s]
        m[..., j, i] = -u[..., s]
    return m


def from_matrix(m):
    m = np.asarray(m)
    return np.stack([m[..., i, j] for i, j in PAIRS], axis=-1)


def _structure_constants():
    # [u, v] = u eta v - v eta u for upper-index matrices
    f = np.zeros((6, 6, 6))
    basis = np.eye(6)
    for p in range(6):
        for q in range(6):
            up, vq = to_matrix(basis[p]), to_matrix(basis[q])
            f[:, p, q] = from_matrix(up @ ETA @ vq - vq @ ETA @ up)
    return f


#: ``STRUCTURE[r, p, q]``: r-component of the commutator of basis pairs p, q
STRUCTURE = _structure_constants()
# sparse form: r-component collects c * (u_p v_q - u_q v_p) over p < q
_TERMS = [
    [(p, q, STRUCTURE[r, p, q]) for p in range(6) for q in range(p + 1, 6) if STRUCTURE[r, p, q]]
    for r in range(6)
]


def so31_commutator(u, v):
    """Commutator [u, v]^{IJ} of upper-index pair vectors, broadcasting."""
    u, v = np.broadcast_arrays(u, v)
    out = np.empty(u.shape, dtype=np.result_type(u, v))
    for r, terms in enumerate(_TERMS):
        acc = 0.0
        for p, q, c in terms:
            acc = acc + c * (u[..., p] * v[..., q] - u[..., q] * v[..., p])
        out[..., r] = acc
    return out


def lower(u):
    return u * PAIR_WEIGHTS


raise_ = lower  # the weights are their own inverse


def pairing(x, y):
    """Full contraction X^{IJ} Y_{IJ} of an upper and a lower pair vector."""
    return 2.0 * np.sum(x * y, axis=-1)
