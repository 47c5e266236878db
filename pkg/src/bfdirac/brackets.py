"""Canonical Poisson brackets, constraint bracket matrices and SVD ranks."""

from dataclasses import dataclass, field

import numpy as np

from .derivatives import gradient, jacobian
from .lattice import FieldLayout
from .models import constraint_labels, constraint_values


class IndeterminateRank(ArithmeticError):
    pass


def phase_indices(geometry):
    """Flat indices of (coordinates, conjugate momenta), paired slot by slot."""
    mask = FieldLayout(geometry).momentum_mask()
    return np.flatnonzero(~mask), np.flatnonzero(mask)


def symplectic_product(gf, gg, geometry):
    """{f, g} from gradient arrays ``gf (m, n)`` and ``gg (k, n)``.

    Site variables obey {q, p} = 1/h^3, the lattice image of delta^3(x - y).
    """
    q, p = phase_indices(geometry)
    gf = np.atleast_2d(gf)
    gg = np.atleast_2d(gg)
    out = gf[:, q] @ gg[:, p].T - gf[:, p] @ gg[:, q].T
    return out / geometry.volume


def symplectic_gradient(grad, geometry):
    """Hamiltonian vector field X_H with X_H(f) = {f, H}: dq = dH/dp, dp = -dH/dq."""
    q, p = phase_indices(geometry)
    out = np.zeros_like(grad)
    out[..., q] = grad[..., p]
    out[..., p] = -grad[..., q]
    return out / geometry.volume


def poisson_bracket(f, g, state, geometry):
    """{f, g} for scalar functionals (callables accepting batched states)."""
    return float(symplectic_product(gradient(f, state), gradient(g, state), geometry)[0, 0])


@dataclass
class BracketMatrix:
    matrix: np.ndarray
    rows: list
    cols: list
    state_kind: str = "unspecified"
    seed: int = None

    def antisymmetry_defect(self):
        M = self.matrix
        scale = max(1.0, np.abs(M).max())
        return float(np.abs(M + M.T).max() / scale)


def constraint_jacobian(model, state, families):
    return jacobian(lambda z: constraint_values(model, z, families), state)


def bracket_matrix(model, rows, cols, state, state_kind="unspecified", seed=None):
    """Matrix of brackets {row_i, col_j} between two lists of constraint families."""
    Jr = constraint_jacobian(model, state, rows)
    Jc = Jr if tuple(cols) == tuple(rows) else constraint_jacobian(model, state, cols)
    M = symplectic_product(Jr, Jc, model.geometry)
    return BracketMatrix(
        M,
        constraint_labels(model, rows),
        constraint_labels(model, cols),
        state_kind,
        seed,
    )


@dataclass
class RankReport:
    rank: int
    nullity: int
    singular_values: np.ndarray = field(repr=False)
    gap_ratio: float
    tolerance: float
    null_basis: np.ndarray = field(default=None, repr=False)

    def as_dict(self):
        return {
            "rank": self.rank,
            "nullity": self.nullity,
            "gap_ratio": _finite(self.gap_ratio),
            "tolerance": self.tolerance,
        }


def _finite(x):
    return float(x) if np.isfinite(x) else 1e300


def numerical_rank(M, gap_threshold=1e6, null_basis=True):
    """Rank from the largest gap in the singular spectrum.

    The cut is placed where s[r-1] / s[r] is largest; singular values below
    ``max(shape) * eps * s[0]`` are floored to that noise level so that an
    exactly rank-deficient matrix shows its gap against round-off.  Raises
    :class:`IndeterminateRank` if no gap reaches ``gap_threshold``.
    """
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    m, n = M.shape
    if M.size == 0 or not np.any(M):
        basis = np.eye(n) if null_basis else None
        return RankReport(0, n, np.zeros(min(m, n)), np.inf, gap_threshold, basis)
    if null_basis:
        _, s, Vh = np.linalg.svd(M, full_matrices=True)
    else:
        s = np.linalg.svd(M, compute_uv=False)
    floor = max(m, n) * np.finfo(float).eps * s[0]
    ext = np.append(np.maximum(s, floor), floor)
    ratios = ext[:-1] / ext[1:]
    r = int(np.argmax(ratios)) + 1
    gap = float(ratios[r - 1])
    if gap < gap_threshold:
        raise IndeterminateRank(
            f"largest singular-value gap {gap:.3g} below threshold {gap_threshold:.3g}"
        )
    basis = Vh[r:].T if null_basis else None
    return RankReport(r, n - r, s, gap, gap_threshold, basis)
