"""Forward-mode derivatives of lattice functionals.

All model functions are polynomials built from real arithmetic, rolls and
einsums, so they extend to complex arguments.  The complex-step rule
``Im f(x + i t e) / t`` then gives derivatives without subtractive
cancellation; with ``t = 1e-30`` the truncation error is far below double
precision.  Central finite differences are kept as an independent check.
"""

import numpy as np

STEP = 1e-30


class NumericFailure(ArithmeticError):
    pass


def _check(arr):
    if not np.all(np.isfinite(arr)):
        raise NumericFailure("non-finite derivative entries")
    return arr


def jvp(fn, x, directions):
    """Directional derivatives of ``fn`` at ``x`` along each row of
    ``directions``; returns ``(n_dir, *out_shape)``."""
    z = x[None, :] + 1j * STEP * np.asarray(directions)
    return _check(np.imag(fn(z)) / STEP)


def jacobian(fn, x, chunk=256, columns=None):
    """Dense Jacobian ``d fn / d x`` of shape ``(n_out, n_in)``.

    ``columns`` restricts differentiation to a subset of input coordinates.
    """
    x = np.asarray(x, dtype=float)
    cols = np.arange(x.size) if columns is None else np.asarray(columns)
    blocks = []
    for start in range(0, cols.size, chunk):
        idx = cols[start : start + chunk]
        E = np.zeros((idx.size, x.size))
        E[np.arange(idx.size), idx] = 1.0
        blocks.append(jvp(fn, x, E).reshape(idx.size, -1))
    J = np.concatenate(blocks, axis=0).T
    return J


def gradient(fn, x, chunk=256):
    """Gradient of a scalar functional."""
    return jacobian(fn, x, chunk=chunk)[0]


def fd_gradient(fn, x, rel_step=1e-6, columns=None):
    """Central finite-difference gradient with step ``rel_step * (1 + |f|)``."""
    x = np.asarray(x, dtype=float)
    f0 = float(np.real(fn(x)))
    step = rel_step * (1.0 + abs(f0))
    cols = np.arange(x.size) if columns is None else np.asarray(columns)
    out = np.zeros(x.size)
    for i in cols:
        e = np.zeros_like(x)
        e[i] = step
        out[i] = (np.real(fn(x + e)) - np.real(fn(x - e))) / (2 * step)
    return _check(out)


def fd_jacobian(fn, x, step=1e-6, columns=None):
    x = np.asarray(x, dtype=float)
    cols = np.arange(x.size) if columns is None else np.asarray(columns)
    E = np.zeros((cols.size, x.size))
    E[np.arange(cols.size), cols] = step
    plus = np.real(fn(x[None, :] + E))
    minus = np.real(fn(x[None, :] - E))
    return _check(((plus - minus) / (2 * step)).reshape(cols.size, -1).T)
