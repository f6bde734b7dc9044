"""Second-order systems of electromagnetic type.

A system is given by a scalar potential V(t, x) and a vector potential
A^a(t, x).  The Lagrangian ``1/2 |xdot|^2 + A.xdot - V`` produces the forces

    F^a = (dA^b/dx^a - dA^a/dx^b) xdot^b - dV/dx^a - dA^a/dt

and from them the connection, Jacobi endomorphism and curvature.  All partial
derivatives come from forward-mode AD, so every quantity here can itself be
evaluated on jets (needed when differentiating through the forces).
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .expr import EvalPoint, Expression, ad, parse, symbols
from .linalg import object_matrix
from .paths import rk4


def _as_field(f, n):
    if isinstance(f, str):
        f = parse(f, n)
    if isinstance(f, Expression):
        if f.max_index() > n:
            raise ValueError(f"{f} uses an index beyond dimension {n}")
        return f
    if not callable(f):
        raise TypeError("potentials must be expressions, strings or callables f(t, x)")
    return f


def _vector(values):
    if all(ad._is_plain(v) and np.ndim(v) == 0 for v in values):
        return np.array(values, dtype=float)
    out = np.empty(len(values), dtype=object)
    out[:] = list(values)
    return out


class EMSystem:
    """An electromagnetic-type SODE ``xddot = F(t, x, xdot)`` on R^n.

    ``V`` and each entry of ``A`` are expressions, strings in the expression
    grammar, or jet-generic callables ``f(t, x)``.  ``exact`` is False when a
    potential involves sampled paths (finite-difference time derivatives);
    ``window`` restricts the admissible time interval if not None.
    """

    def __init__(self, n, V, A, name=None, exact=True, window=None, meta=None):
        if n < 1:
            raise ValueError("dimension must be at least 1")
        if len(A) != n:
            raise ValueError(f"need {n} vector potential components, got {len(A)}")
        self.n = n
        self.V = _as_field(V, n)
        self.A = [_as_field(a, n) for a in A]
        self.name = name
        self.exact = exact
        self.window = window
        self.meta = dict(meta or {})
        self._compiled = None
        self._strip_velocity_terms()

    @classmethod
    def from_strings(cls, n, V, A, **kw):
        return cls(n, V, A, **kw)

    def _strip_velocity_terms(self, points=None):
        """Check potentials do not depend on velocities, then drop any xdot leaves."""
        fields = [self.V] + self.A
        if not any(isinstance(f, Expression) and f.depends_on("xdot") for f in fields):
            return
        points = points or sample_cloud(self.n, 20, seed=0)
        for f in fields:
            if not (isinstance(f, Expression) and f.depends_on("xdot")):
                continue
            for p in points:
                for i in range(self.n):
                    tag = ad.new_tag()
                    xd = list(p.xdot)
                    xd[i] = ad.Dual(xd[i], 1.0, tag)
                    d = float(ad.eps_part(f(p.t, p.x, xd), tag))
                    if abs(d) > 1e-12:
                        raise ValueError(f"potential {f} depends on xdot{i + 1}")
        t, x, _ = symbols(self.n)
        zero = [0.0] * self.n
        strip = lambda f: f(t, x, zero) if isinstance(f, Expression) else f
        self.V = strip(self.V)
        self.A = [strip(a) for a in self.A]

    @property
    def is_expression(self):
        return isinstance(self.V, Expression) and all(isinstance(a, Expression) for a in self.A)

    def to_dict(self):
        if not self.is_expression:
            return None
        return {"n": self.n, "V": str(self.V), "A": [str(a) for a in self.A]}

    # pointwise evaluation (generic: t, x, xdot may be jets) --------------
    def _grad(self, f, t, x):
        return ad.gradient(lambda z: f(z[0], z[1:]), [t] + list(x))

    def _compiled_forces(self):
        """Compiled symbolic forces for plain-float evaluation (expression systems only)."""
        if self._compiled is None:
            t, x, xdot = symbols(self.n)
            dV = [self.V.diff(v) for v in x]
            dA = [[a.diff(v) for v in x] for a in self.A]
            comps = []
            for a in range(self.n):
                f = -dV[a] - self.A[a].diff(t)
                for b in range(self.n):
                    f = f + (dA[b][a] - dA[a][b]) * xdot[b]
                comps.append(f.compile())
            self._compiled = comps
        return self._compiled

    def forces(self, t, x, xdot):
        n = self.n
        if self.is_expression and all(ad._is_plain(v) for v in [t, *x, *xdot]):
            return np.array([f(t, x, xdot) for f in self._compiled_forces()], dtype=float)
        gA = [self._grad(a, t, x) for a in self.A]
        gV = self._grad(self.V, t, x)
        out = []
        for a in range(n):
            s = -gV[1 + a] - gA[a][0]
            for b in range(n):
                s = s + (gA[b][1 + a] - gA[a][1 + b]) * xdot[b]
            out.append(s)
        return _vector(out)

    def connection(self, t, x):
        n = self.n
        gA = [self._grad(a, t, x) for a in self.A]
        return object_matrix([[0.5 * (gA[a][1 + b] - gA[b][1 + a]) for b in range(n)]
                              for a in range(n)])

    def local(self, t, x):
        """Second-order jet data of the potentials at one (float) point."""
        z = [float(t)] + [float(v) for v in x]
        f = lambda g: (lambda zz: g(zz[0], zz[1:]))
        _, gV, hV = ad.hessian(f(self.V), z)
        gA, hA = [], []
        for a in self.A:
            _, g, hh = ad.hessian(f(a), z)
            gA.append(g)
            hA.append(hh)
        return LocalJet(np.array(gV, float), np.array(hV, float),
                        np.array(gA, float), np.array(hA, float))


@dataclass
class LocalJet:
    """Gradients and Hessians of V and A over z = (t, x1..xn) at one point."""

    gradV: np.ndarray
    hessV: np.ndarray
    gradA: np.ndarray  # (n, n+1)
    hessA: np.ndarray  # (n, n+1, n+1)

    @property
    def n(self):
        return self.gradA.shape[0]

    @property
    def gamma(self):
        dA = self.gradA[:, 1:]
        return 0.5 * (dA - dA.T)

    @property
    def dgamma(self):
        """dGamma[a, b, r] = d Gamma^a_b / d z^r with z = (t, x)."""
        h = self.hessA[:, 1:, :]  # [a, b, r] = d^2 A^a / dx^b dz^r
        return 0.5 * (h - h.transpose(1, 0, 2))

    @property
    def dgamma_x(self):
        return self.dgamma[:, :, 1:]

    @property
    def dgamma_t(self):
        return self.dgamma[:, :, 0]

    def forces(self, xdot):
        xdot = np.asarray(xdot, float)
        return -2.0 * self.gamma @ xdot - self.gradV[1:] - self.gradA[:, 0]

    def jacobi(self, xdot):
        xdot = np.asarray(xdot, float)
        hx = self.hessA[:, 1:, 1:]  # [a, c, b] = d^2 A^a / dx^c dx^b
        vel = 0.5 * (np.einsum("acb,b->ac", hx, xdot) + np.einsum("cab,b->ac", hx, xdot)
                     - 2.0 * np.einsum("bac,b->ac", hx, xdot))
        g = self.gamma
        ht = self.hessA[:, 0, 1:]  # [a, c] = d^2 A^a / dt dx^c
        return vel - g @ g + self.hessV[1:, 1:] + 0.5 * (ht + ht.T)

    def curvature(self):
        """R[a, b, c] = dGamma^a_b/dx^c - dGamma^a_c/dx^b."""
        d = self.dgamma_x
        return d - d.transpose(0, 2, 1)

    def potential_block(self):
        """The bracket of the (Veqn) condition: Hess V + sym(d^2A/dt dx) - Gamma^2."""
        g = self.gamma
        ht = self.hessA[:, 0, 1:]
        return self.hessV[1:, 1:] + 0.5 * (ht + ht.T) - g @ g


def trace_field(f, n):
    """Symbolic form of a jet-generic field f(t, x), or f itself if it cannot be traced."""
    if isinstance(f, Expression):
        return f
    t, x, _ = symbols(n)
    try:
        e = f(t, list(x))
    except TypeError:
        return f
    return e if isinstance(e, Expression) else parse(repr(float(e)), n)


def _point(p, n=None):
    if isinstance(p, EvalPoint):
        return p
    t, x, *rest = p
    return EvalPoint(t, x, rest[0] if rest else ())


def forces(sys, p):
    p = _point(p)
    return sys.local(p.t, p.x).forces(p.xdot)


def connection(sys, p):
    p = _point(p)
    return sys.local(p.t, p.x).gamma


def jacobi(sys, p):
    p = _point(p)
    return sys.local(p.t, p.x).jacobi(p.xdot)


def curvature(sys, p):
    p = _point(p)
    return sys.local(p.t, p.x).curvature()


def sode_rhs(sys, t, state):
    """First-order right-hand side (xdot, F) for the state (x, xdot)."""
    n = sys.n
    state = np.asarray(state, float)
    x, v = state[:n], state[n:]
    f = np.asarray(sys.forces(t, list(x), list(v)), float)
    return np.concatenate([v, f])


def integrate(sys, x0, v0, t0, t1, h=1e-3):
    """RK4 trajectory; returns (times, positions, velocities)."""
    y0 = np.concatenate([np.asarray(x0, float), np.asarray(v0, float)])
    times, ys = rk4(lambda t, y: sode_rhs(sys, t, y), y0, t0, t1, h)
    return times, ys[:, :sys.n], ys[:, sys.n:]


def sample_cloud(n, size=20, seed=0, window=(-1.0, 1.0), box=1.0):
    """Deterministic quasi-random points (t, x, xdot) in window x [-box, box]^(2n)."""
    sampler = qmc.Halton(d=2 * n + 1, scramble=True, seed=seed)
    u = sampler.random(size)
    t0, t1 = window
    pts = []
    for row in u:
        t = t0 + (t1 - t0) * row[0]
        x = box * (2.0 * row[1:n + 1] - 1.0)
        v = box * (2.0 * row[n + 1:] - 1.0)
        pts.append(EvalPoint(t, tuple(x), tuple(v)))
    return pts
