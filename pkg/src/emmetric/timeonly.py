"""Systems whose connection depends on time only.

With Udot = -Gamma U, U(t0) = I, the substitution x = U y removes the
velocity terms: the y-equations are ydot-free with potential W.  Conversely
any (W, S) with S Hess(W) symmetric and any orthogonal U(t) give a system

    A = Gamma(t) x,   V = W(t, U^T x) + 1/2 x^T Gamma^2 x,   Gamma = -Udot U^T

with multiplier g(t) = U S U^T.
"""

import numpy as np

from .expr import Expression, ad, parse
from .lax import _check_skew, solve_lax
from .linalg import object_matrix
from .model import EMSystem, sample_cloud, trace_field
from .paths import MatrixFunction, MatrixPath, as_time_matrix, evaluate_numeric, grid_size

WEQN_TOL = 1e-10


def solve_U(gamma, tspan=(0.0, 1.0), h=1e-3):
    """RK4 for Udot = -Gamma U with U(t0) = I; returns an orthogonal-tagged path."""
    if h <= 0:
        raise ValueError("step size must be positive")
    gamma = as_time_matrix(gamma)
    t0, t1 = map(float, tspan)
    k = grid_size(t0, t1, h)
    h = (t1 - t0) / (k - 1)
    half = t0 + 0.5 * h * np.arange(2 * k - 1)
    gam = np.array([evaluate_numeric(gamma, t) for t in half], dtype=float)
    for t, m in zip(half, gam):
        _check_skew(m, t)
    n = gam.shape[1]
    out = np.empty((k, n, n))
    out[0] = u = np.eye(n)
    for i in range(k - 1):
        ga, gm, gb = gam[2 * i], gam[2 * i + 1], gam[2 * i + 2]
        k1 = -ga @ u
        k2 = -gm @ (u + 0.5 * h * k1)
        k3 = -gm @ (u + 0.5 * h * k2)
        k4 = -gb @ (u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = u
    return MatrixPath(t0, h, out, orthogonal=True)


def _as_potential(W, n):
    if isinstance(W, str):
        return parse(W, n)
    return W


def weqn_residual(W, S, t, y):
    """Asymmetry of S Hess_y W at one point."""
    S = np.asarray(S, float)
    n = S.shape[0]
    _, _, hess = ad.hessian(lambda z: W(t, z), list(y))
    m = S @ np.array(hess, float)
    return float(np.max(np.abs(m - m.T))) if n else 0.0


def check_Weqn(W, S, points=None, samples=20, seed=0):
    """Max asymmetry of S Hess(W) over sample points (y read from their x)."""
    S = np.asarray(S, float)
    n = S.shape[0]
    if np.max(np.abs(S - S.T)) > 1e-12:
        raise ValueError("S must be symmetric")
    W = _as_potential(W, n)
    points = points or sample_cloud(n, samples, seed=seed)
    return max(weqn_residual(W, S, p.t, p.x) for p in points)


def connection_from_U(U):
    """Gamma = -Udot U^T; exact for functions, finite differences for paths."""
    if isinstance(U, MatrixPath):
        d1, _ = U.node_derivatives()
        vals = -np.einsum("kij,klj->kil", d1, U.values)
        # the exact value is skew; drop the symmetric finite-difference error
        return MatrixPath(U.t0, U.h, 0.5 * (vals - vals.transpose(0, 2, 1)))
    dU = U.derivative()

    def fn(t):
        u, du = U(t), dU(t)
        n = U.shape[0]
        return object_matrix([[-sum(du[a, c] * u[b, c] for c in range(n)) for b in range(n)]
                              for a in range(n)])
    if U.exprs is not None:
        return MatrixFunction.traced(fn, U.shape)
    return MatrixFunction(fn, U.shape)


def admissible_V(W, gamma, U):
    """V(t, x) = W(t, U^T x) + 1/2 x^T Gamma^2 x, generic in (t, x)."""
    n = U.shape[0]
    W = _as_potential(W, n)
    gamma = as_time_matrix(gamma)
    U = as_time_matrix(U)

    def V(t, x):
        u, g = U(t), gamma(t)
        y = [sum(u[b, a] * x[b] for b in range(n)) for a in range(n)]
        gx = [sum(g[a, b] * x[b] for b in range(n)) for a in range(n)]
        # x^T Gamma^2 x = -(Gamma x).(Gamma x) for skew Gamma
        return W(t, y) - 0.5 * sum(v * v for v in gx)
    return V


def _vector_potential(gamma, n):
    def comp(a):
        return lambda t, x: (lambda g: sum(g[a, b] * x[b] for b in range(n)))(gamma(t))
    return [comp(a) for a in range(n)]


def multiplier_from_S(U, S):
    """g(t) = U S U^T, as a path for sampled U and as a function otherwise."""
    S = np.asarray(S, float)
    if isinstance(U, MatrixPath):
        return MatrixPath(U.t0, U.h, np.einsum("kij,jl,kml->kim", U.values, S, U.values))
    n = S.shape[0]

    def fn(t):
        u = U(t)
        return object_matrix([[sum(u[a, c] * S[c, d] * u[b, d] for c in range(n) for d in range(n))
                              for b in range(n)] for a in range(n)])
    if getattr(U, "exprs", None) is not None:
        return MatrixFunction.traced(fn, S.shape)
    return MatrixFunction(fn, S.shape)


def construct_system(W, S, U, gamma=None, tol=WEQN_TOL, points=None):
    """Build the electromagnetic system and its multiplier from (W, S, U).

    ``gamma`` defaults to -Udot U^T.  Returns (EMSystem, MultiplierCandidate).
    """
    from .helmholtz import MultiplierCandidate

    S = np.asarray(S, float)
    n = S.shape[0]
    W = _as_potential(W, n)
    U = as_time_matrix(U)
    if U.shape != (n, n):
        raise ValueError("U and S must have the same size")
    res = check_Weqn(W, S, points)
    if res > tol:
        raise ValueError(f"S Hess(W) is not symmetric (residual {res:.3g})")
    gamma = connection_from_U(U) if gamma is None else as_time_matrix(gamma)
    V = admissible_V(W, gamma, U)
    A = _vector_potential(gamma, n)
    sampled = isinstance(U, MatrixPath) or isinstance(gamma, MatrixPath)
    if not sampled and isinstance(W, Expression) and getattr(U, "exprs", None) is not None:
        V = trace_field(V, n)
        A = [trace_field(a, n) for a in A]
    system = EMSystem(n, V, A, name="time-only", exact=not sampled,
                      meta={"gamma_source": "path" if sampled else "exact"})
    return system, MultiplierCandidate(multiplier_from_S(U, S))


def lax_route(U, S):
    """The same multiplier obtained by integrating the Lax equation from S."""
    gamma = connection_from_U(U)
    if isinstance(U, MatrixPath):
        return solve_lax(gamma, S, (U.t0, U.t1), U.h)
    raise TypeError("lax_route expects a sampled U")
