"""Diagonalizing a multiplier path and checking that the system decouples.

With x = P(t) y the transformed forces are

    Ft(t, y, ydot) = P^-1 (F(t, P y, Pdot y + P ydot) - Pddot y - 2 Pdot ydot)

and a multiplier with constant eigenvalues splits them into independent
blocks, one per distinct eigenvalue.
"""

import json
from dataclasses import dataclass

import numpy as np

from .expr import ad
from .lax import crossings, eigen_drift
from .linalg import group_eigenvalues, jacobi_eigh, polar_rotation
from .model import EMSystem, sample_cloud, trace_field
from .paths import MatrixFunction, MatrixPath, as_time_matrix, evaluate_numeric

DRIFT_TOL = 1e-5
BLOCK_GAP = 1e-6


@dataclass(frozen=True)
class BlockStructure:
    """Distinct eigenvalues and the coordinate indices (0-based) of their blocks."""

    eigenvalues: tuple
    indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", tuple(float(v) for v in self.eigenvalues))
        object.__setattr__(self, "indices", tuple(tuple(int(i) for i in b) for b in self.indices))
        if len(self.eigenvalues) != len(self.indices):
            raise ValueError("one index set per eigenvalue")
        flat = [i for b in self.indices for i in b]
        if any(len(b) == 0 for b in self.indices):
            raise ValueError("index sets must be non-empty")
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("index sets must partition 0..n-1")

    @classmethod
    def from_eigenvalues(cls, eigs, rel_tol=BLOCK_GAP):
        groups = group_eigenvalues(np.sort(np.asarray(eigs, float)), rel_tol)
        return cls([g[0] for g in groups], [g[1] for g in groups])

    @classmethod
    def single(cls, n, value=1.0):
        return cls([value], [tuple(range(n))])

    @property
    def n(self):
        return sum(len(b) for b in self.indices)

    def block_of(self):
        out = np.empty(self.n, dtype=int)
        for k, b in enumerate(self.indices):
            out[list(b)] = k
        return out

    def cross_mask(self):
        """mask[a, b] is True when coordinates a and b lie in different blocks."""
        lab = self.block_of()
        return lab[:, None] != lab[None, :]

    def to_dict(self):
        return {"eigenvalues": list(self.eigenvalues),
                "blocks": [[i + 1 for i in b] for b in self.indices]}


def _align(prev, cur, blocks):
    out = cur.copy()
    for b in blocks:
        b = list(b)
        out[:, b] = cur[:, b] @ polar_rotation(cur[:, b].T @ prev[:, b])
    return out


def diagonalize_path(g, drift_tol=DRIFT_TOL, rel_tol=BLOCK_GAP):
    """Orthogonal path P with P^T g P diagonal, eigenvector frames continued smoothly.

    Returns (P, eigenvalues, BlockStructure).  Within a block of equal
    eigenvalues each frame is the closest (Procrustes) rotation of the previous
    one, which also fixes signs.
    """
    if not isinstance(g, MatrixPath):
        raise TypeError("diagonalize_path expects a MatrixPath")
    drift = eigen_drift(g)
    if drift > drift_tol:
        raise ValueError(f"eigenvalue drift {drift:.3g} exceeds {drift_tol:g}: not a Lax path")
    if crossings(g):
        raise ValueError("eigenvalues of distinct blocks cross; continuation is ill-posed")
    lam, vecs = jacobi_eigh(g.values)
    eigs = lam.mean(axis=0)
    blocks = BlockStructure.from_eigenvalues(eigs, rel_tol)
    frames = np.empty_like(vecs)
    frames[0] = vecs[0]
    for k in range(1, len(vecs)):
        frames[k] = _align(frames[k - 1], vecs[k], blocks.indices)
    return MatrixPath(g.t0, g.h, frames, orthogonal=True), eigs, blocks


def transformed_connection(gamma, P):
    """Gt = P^T Gamma P + P^T Pdot at the nodes of P."""
    gamma = as_time_matrix(gamma)
    if isinstance(P, MatrixPath):
        pdot = P.grid_derivative(1)
        vals = []
        for t, p, pd in zip(P.times, P.values, pdot):
            gm = evaluate_numeric(gamma, float(t))
            vals.append(p.T @ gm @ p + p.T @ pd)
        return MatrixPath(P.t0, P.h, vals)
    dP = P.derivative()

    def fn(t):
        p, pd, gm = evaluate_numeric(P, t), evaluate_numeric(dP, t), evaluate_numeric(gamma, t)
        return p.T @ gm @ p + p.T @ pd
    return MatrixFunction(fn, P.shape)


def _path_frames(P, t):
    """(P, Pdot, Pddot) at time t; grid nodes for a path, exact AD otherwise."""
    if isinstance(P, MatrixPath):
        i = P.node_index(t)
        d1, d2 = P.node_derivatives()
        return P.values[i], d1[i], d2[i], float(P.times[i])
    d1 = P.derivative()
    d2 = d1.derivative()
    return evaluate_numeric(P, t), evaluate_numeric(d1, t), evaluate_numeric(d2, t), t


def transformed_forces(sys, P, t, y, ydot, orthogonal=True):
    """Ft at (t, y, ydot); generic in y and ydot (jets allowed)."""
    p, pd, pdd, t = _path_frames(P, t)
    x = [sum(p[a, b] * y[b] for b in range(sys.n)) for a in range(sys.n)]
    xd = [sum(pd[a, b] * y[b] + p[a, b] * ydot[b] for b in range(sys.n)) for a in range(sys.n)]
    f = sys.forces(t, x, xd)
    r = [f[a] - sum(pdd[a, b] * y[b] + 2.0 * pd[a, b] * ydot[b] for b in range(sys.n))
         for a in range(sys.n)]
    pinv = p.T if orthogonal else np.linalg.inv(p)
    return [sum(pinv[a, b] * r[b] for b in range(sys.n)) for a in range(sys.n)]


def transformed_jacobian(sys, P, t, y, ydot, orthogonal=True):
    """(dFt/dy, dFt/dydot) as two n x n arrays via forward-mode AD."""
    n = sys.n
    jy, jv = np.zeros((n, n)), np.zeros((n, n))
    for b in range(n):
        tag = ad.new_tag()
        yy = list(y)
        yy[b] = ad.Dual(y[b], 1.0, tag)
        jy[:, b] = [ad.eps_part(v, tag) for v in transformed_forces(sys, P, t, yy, ydot, orthogonal)]
        tag = ad.new_tag()
        vv = list(ydot)
        vv[b] = ad.Dual(ydot[b], 1.0, tag)
        jv[:, b] = [ad.eps_part(v, tag) for v in transformed_forces(sys, P, t, y, vv, orthogonal)]
    return jy, jv


@dataclass
class DecouplingReport:
    blocks: BlockStructure
    cross_position: float
    cross_velocity: float
    samples: int
    tol: float = 1e-5

    @property
    def residual(self):
        return max(self.cross_position, self.cross_velocity)

    @property
    def passed(self):
        return self.residual <= self.tol

    def to_dict(self):
        return {**self.blocks.to_dict(), "cross_position": self.cross_position,
                "cross_velocity": self.cross_velocity, "residual": self.residual,
                "tol": self.tol, "pass": self.passed, "samples": self.samples}

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _snap(P, t):
    if isinstance(P, MatrixPath):
        i = int(round((t - P.t0) / P.h))
        return float(P.times[min(max(i, 0), len(P) - 1)])
    return t


def check_decoupling(sys, P, blocks, points=None, orthogonal=True, tol=1e-5, samples=50, seed=0):
    """Largest cross-block partial of the transformed forces over the sample points.

    For sampled P the sample times are snapped to grid nodes, where the finite
    difference derivatives of P live.
    """
    P = as_time_matrix(P)
    if isinstance(P, MatrixPath) and len(P) < 7:
        raise ValueError("decoupling check needs a path with at least 7 nodes")
    if points is None:
        window = (P.t0, P.t1) if isinstance(P, MatrixPath) else (sys.window or (0.0, 1.0))
        points = sample_cloud(sys.n, samples, seed=seed, window=window)
    mask = blocks.cross_mask()
    cy = cv = 0.0
    for p in points:
        t = _snap(P, p.t)
        if isinstance(P, MatrixPath):
            m = P.values[P.node_index(t)]
            if abs(np.linalg.det(m)) < 1e-12:
                raise ValueError(f"transformation is singular at t={t}")
        jy, jv = transformed_jacobian(sys, P, t, list(p.x), list(p.xdot), orthogonal)
        if mask.any():
            cy = max(cy, float(np.max(np.abs(jy[mask]))))
            cv = max(cv, float(np.max(np.abs(jv[mask]))))
    return DecouplingReport(blocks, cy, cv, len(points), tol)


def _concat_subsystems(subsystems):
    dims = [s.n for s in subsystems]
    offsets = np.cumsum([0] + dims)

    def vbar(t, y):
        return sum(s.V(t, y[o:o + s.n]) for s, o in zip(subsystems, offsets))

    def abar(t, y):
        out = []
        for s, o in zip(subsystems, offsets):
            out.extend(a(t, y[o:o + s.n]) for a in s.A)
        return out
    return int(offsets[-1]), vbar, abar


def compose_coupled(subsystems, lambdas, P):
    """Couple independent systems through x = P(t) y with orthogonal P.

    Returns (EMSystem, MultiplierCandidate) with multiplier P diag(lambda) P^T.
    """
    from .helmholtz import MultiplierCandidate

    if len(subsystems) != len(lambdas):
        raise ValueError("one eigenvalue per subsystem")
    lam = [float(v) for v in lambdas]
    if any(v == 0.0 for v in lam):
        raise ValueError("eigenvalues must be nonzero")
    if len(set(lam)) != len(lam):
        raise ValueError("eigenvalues must be distinct")
    n, vbar, abar = _concat_subsystems(subsystems)
    P = as_time_matrix(P)
    if P.shape != (n, n):
        raise ValueError(f"transformation shape {P.shape} does not match total dimension {n}")
    if isinstance(P, MatrixPath) and not P.orthogonal:
        raise ValueError("composition needs an orthogonal-tagged path")
    if not isinstance(P, MatrixPath):
        for t in np.linspace(0.0, 1.0, 5):
            p = evaluate_numeric(P, t)
            if np.max(np.abs(p.T @ p - np.eye(n))) > 1e-10:
                raise ValueError(f"transformation is not orthogonal at t={t}")
    dP = P.derivative()

    def frames(t, x):
        p, pd = P(t), dP(t)
        y = [sum(p[b, a] * x[b] for b in range(n)) for a in range(n)]  # P^T x
        w = [sum(pd[b, a] * x[b] for b in range(n)) for a in range(n)]  # Pdot^T x
        return p, y, w

    def A_comp(k):
        def f(t, x):
            p, y, w = frames(t, x)
            ab = abar(t, y)
            return sum(p[k, a] * (w[a] + ab[a]) for a in range(n))
        return f

    def V(t, x):
        p, y, w = frames(t, x)
        ab = abar(t, y)
        return vbar(t, y) - 0.5 * sum(v * v for v in w) - sum(a * v for a, v in zip(ab, w))

    diag = np.concatenate([[l] * s.n for s, l in zip(subsystems, lam)])
    gfun = MatrixFunction(lambda t: _sandwich(P(t), diag), (n, n))
    if getattr(P, "exprs", None) is not None:
        gfun = MatrixFunction.traced(gfun.fn, (n, n))
    exact = not isinstance(P, MatrixPath) and all(s.exact for s in subsystems)
    A = [A_comp(k) for k in range(n)]
    if getattr(P, "exprs", None) is not None and all(s.is_expression for s in subsystems):
        V, A = trace_field(V, n), [trace_field(a, n) for a in A]
    system = EMSystem(n, V, A, name="composed", exact=exact)
    return system, MultiplierCandidate(gfun)


def _sandwich(p, diag):
    n = len(diag)
    return np.array([[sum(p[a, c] * diag[c] * p[b, c] for c in range(n)) for b in range(n)]
                     for a in range(n)], dtype=object if p.dtype == object else float)

