"""The multiplier ODE gdot = g Gamma - Gamma g as an isospectral flow."""

import numpy as np

from .linalg import jacobi_eigh
from .paths import MatrixPath, as_time_matrix, evaluate_numeric, grid_size

SKEW_TOL = 1e-12
SYM_TOL = 1e-10


def _check_skew(m, t):
    scale = max(1.0, float(np.max(np.abs(m))))
    err = float(np.max(np.abs(m + m.T)))
    if err > SKEW_TOL * scale:
        raise ValueError(f"connection is not skew at t={t} (|G + G^T| = {err:.3g})")


def lax_rhs(g, gamma):
    return g @ gamma - gamma @ g


def solve_lax(gamma, g0, tspan=(0.0, 1.0), h=1e-3):
    """Fixed-step RK4 for gdot = g Gamma - Gamma g; returns a MatrixPath on the grid."""
    if h <= 0:
        raise ValueError("step size must be positive")
    g0 = np.array(g0, dtype=float)
    if g0.ndim != 2 or g0.shape[0] != g0.shape[1]:
        raise ValueError("initial multiplier must be square")
    if np.max(np.abs(g0 - g0.T)) > SYM_TOL * max(1.0, float(np.max(np.abs(g0)))):
        raise ValueError("initial multiplier must be symmetric")
    gamma = as_time_matrix(gamma)
    t0, t1 = map(float, tspan)
    k = grid_size(t0, t1, h)
    h = (t1 - t0) / (k - 1)
    # connection at every node and half node
    half = t0 + 0.5 * h * np.arange(2 * k - 1)
    gam = np.array([evaluate_numeric(gamma, t) for t in half], dtype=float)
    if gam.shape[1:] != g0.shape:
        raise ValueError(f"connection shape {gam.shape[1:]} does not match multiplier {g0.shape}")
    for t, m in zip(half, gam):
        _check_skew(m, t)
    out = np.empty((k,) + g0.shape)
    out[0] = g = g0
    for i in range(k - 1):
        ga, gm, gb = gam[2 * i], gam[2 * i + 1], gam[2 * i + 2]
        k1 = lax_rhs(g, ga)
        k2 = lax_rhs(g + 0.5 * h * k1, gm)
        k3 = lax_rhs(g + 0.5 * h * k2, gm)
        k4 = lax_rhs(g + h * k3, gb)
        g = g + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = g
    return MatrixPath(t0, h, out)


def spectrum(path):
    """Sorted eigenvalues at every node, shape (K, n)."""
    values = path.values if isinstance(path, MatrixPath) else np.asarray(path, float)
    return jacobi_eigh(values)[0]


def eigen_drift(path):
    lam = spectrum(path)
    return float(np.max(np.abs(lam - lam[0])))


def trace_drift(path):
    tr = np.trace(path.values, axis1=1, axis2=2)
    return float(np.max(np.abs(tr - tr[0])))


def symmetry_error(path):
    v = path.values
    return float(np.max(np.abs(v - v.transpose(0, 2, 1))))


def crossings(path, gap_tol=1e-10, separated=1e-6):
    """Adjacent sorted-eigenvalue pairs that touch somewhere but are apart elsewhere.

    A pair that stays together (a constant multiplicity) is not a crossing.
    """
    lam = spectrum(path)
    gaps = np.diff(lam, axis=1)
    return [i for i in range(gaps.shape[1])
            if gaps[:, i].min() < gap_tol and gaps[:, i].max() > separated]


def export_csv(path, fh=None):
    return path.to_csv(fh)
