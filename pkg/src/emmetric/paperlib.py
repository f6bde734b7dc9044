"""Built-in parametric families of systems with alternative multipliers.

* ``N2Family``: planar systems with a time-dependent magnetic term and a
  quadratic potential; the multiplier is known in closed form.
* ``N3Family``: three-dimensional systems whose connection depends on x
  through one free function f(t, u, v).
* ``sec5_build``: a cubic potential driven by a rotation about the first axis.

Expressions for time functions are strings in the expression grammar over
``t``; for functions of (u, v) or z the variables are written ``x1``, ``x2``.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from .decouple import BlockStructure
from .expr import Expression, ad, parse
from .linalg import generic_inv, object_matrix
from .model import EMSystem
from .paths import MatrixFunction
from .timeonly import construct_system


class QuadratureError(ArithmeticError):
    pass


def _time_expr(e):
    return e if isinstance(e, Expression) else parse(str(e), 0)


def adaptive_simpson(f, a, b, tol=1e-10, max_depth=50):
    """Integral of a scalar float function over [a, b]."""
    if a == b:
        return 0.0

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth >= max_depth:
            raise QuadratureError("adaptive Simpson did not converge")
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (rec(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + rec(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


def lift(value, d1, d2):
    """Turn a float function with known derivatives into a jet-generic one."""
    def fn(t):
        if isinstance(t, ad._Jet):
            return t._apply(fn, d1, d2)
        if isinstance(t, Expression):
            raise TypeError("function has no symbolic form")
        return value(float(t))
    return fn


# n = 2 -----------------------------------------------------------------------

@dataclass
class N2Family:
    """sigma, k, m are functions of t; A, B, C constants; l = (m - k) rho."""

    sigma: object = "1"
    k: object = "0"
    m: object = "1"
    A: float = 0.5
    B: float = 1.0
    C: float = 3.0
    t0: float = 0.0
    l_perturbation: float = 0.0
    quad_tol: float = 1e-10

    def __post_init__(self):
        self.sigma = _time_expr(self.sigma)
        self.k = _time_expr(self.k)
        self.m = _time_expr(self.m)
        if self.B == 0:
            raise ValueError("B = 0 makes the multiplier a multiple of the identity")
        self._dsigma = self.sigma.diff("t")
        integral = functools.lru_cache(maxsize=4096)(
            lambda t: adaptive_simpson(lambda s: float(self.sigma(s)), self.t0, t, self.quad_tol))
        self.alpha = lift(lambda t: -2.0 * integral(t) + self.A,
                          lambda t: -2.0 * self.sigma(t), lambda t: -2.0 * self._dsigma(t))

    def rho(self, t):
        return 0.5 * ad.tan(self.alpha(t))

    def l(self, t):
        return (self.m(t) - self.k(t)) * self.rho(t) + self.l_perturbation

    def multiplier(self, t):
        al = self.alpha(t)
        c, s = ad.cos(al), ad.sin(al)
        return object_matrix([[0.5 * (self.C + self.B * c), -0.5 * self.B * s],
                              [-0.5 * self.B * s, 0.5 * (self.C - self.B * c)]])

    def eigenvalues(self):
        return sorted([0.5 * (self.C - self.B), 0.5 * (self.C + self.B)])

    def transform_blocks(self):
        """Coordinates of y = T x: y1 pairs with (C - B)/2, y2 with (C + B)/2."""
        return BlockStructure([0.5 * (self.C - self.B), 0.5 * (self.C + self.B)], [(0,), (1,)])

    def transform(self, t):
        """Rows (sin a, cos a + 1) and (sin a, cos a - 1): y = T x."""
        al = self.alpha(t)
        c, s = ad.cos(al), ad.sin(al)
        return object_matrix([[s, c + 1.0], [s, c - 1.0]])

    def safe_window(self, t0, t1, margin=1e-2, need_transform=True, samples=2001):
        """Largest sub-interval of [t0, t1] clear of the poles of rho (and of det T = 0)."""
        ts = np.linspace(t0, t1, samples)
        al = np.array([self.alpha(float(t)) for t in ts])
        ok = np.abs(np.cos(al)) >= margin
        if need_transform:
            ok &= np.abs(np.sin(al)) >= margin
        best, start = None, None
        for i, flag in enumerate(list(ok) + [False]):
            if flag and start is None:
                start = i
            elif not flag and start is not None:
                if best is None or i - 1 - start > best[1] - best[0]:
                    best = (start, i - 1)
                start = None
        if best is None or best[1] == best[0]:
            raise ValueError("no pole-free sub-interval in the requested window")
        return float(ts[best[0]]), float(ts[best[1]])


def n2_build(family, window=None):
    """(EMSystem, MultiplierCandidate, transform P with x = P y)."""
    from .helmholtz import MultiplierCandidate

    fam = family
    if fam.k is not None and fam.m is not None:
        probe = [float(fam.m(t) - fam.k(t)) for t in np.linspace(fam.t0, fam.t0 + 1.0, 11)]
        if all(abs(v) < 1e-14 for v in probe):
            raise ValueError("m = k is the degenerate case and is not supported")

    def V(t, x):
        return 0.5 * fam.k(t) * x[0] * x[0] + fam.l(t) * x[0] * x[1] + 0.5 * fam.m(t) * x[1] * x[1]

    A = [lambda t, x: fam.sigma(t) * x[1], lambda t, x: -fam.sigma(t) * x[0]]
    system = EMSystem(2, V, A, name="n2", window=window, meta={"family": "n2"})
    g = MultiplierCandidate(MatrixFunction(fam.multiplier, (2, 2)))
    P = MatrixFunction(lambda t: generic_inv(fam.transform(t)), (2, 2))
    return system, g, P


# n = 3 -----------------------------------------------------------------------

_GL = {k: np.polynomial.legendre.leggauss(k) for k in (16, 32)}


def _gl_nodes(k, a=0.0, b=1.0):
    x, w = _GL[k] if k in _GL else np.polynomial.legendre.leggauss(k)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _moment(f, t, u, v, nodes, weights):
    vals = f(t, [u * nodes, v * nodes])
    return ad.jet_sum(vals * (weights * nodes))


def radial_moment(f, t, u, v, rel_tol=1e-13, max_panels=64):
    """int_0^1 s f(t, s u, s v) ds with Gauss-Legendre; jets in (t, u, v) allowed.

    Tries 16 against 32 nodes; if they disagree, refines by composite
    32-node panels until two successive levels agree.
    """
    x16, w16 = _gl_nodes(16)
    x32, w32 = _gl_nodes(32)
    i16 = _moment(f, t, u, v, x16, w16)
    i32 = _moment(f, t, u, v, x32, w32)
    scale = max(1.0, abs(float(ad.real(i32))))
    if abs(float(ad.real(i16)) - float(ad.real(i32))) <= rel_tol * scale:
        return i32
    prev, panels = i32, 2
    while panels <= max_panels:
        edges = np.linspace(0.0, 1.0, panels + 1)
        nodes = np.concatenate([_gl_nodes(32, a, b)[0] for a, b in zip(edges[:-1], edges[1:])])
        weights = np.concatenate([_gl_nodes(32, a, b)[1] for a, b in zip(edges[:-1], edges[1:])])
        cur = _moment(f, t, u, v, nodes, weights)
        if abs(float(ad.real(cur)) - float(ad.real(prev))) <= rel_tol * scale:
            return cur
        prev, panels = cur, 2 * panels
    raise QuadratureError("radial moment did not converge")


def _uv_field(f):
    """f given as expression in (t, x1=u, x2=v) or callable f(t, (u, v))."""
    if isinstance(f, str):
        f = parse(f, 2)
    return f


@dataclass
class N3Family:
    """a(t) free; b = sqrt(c1 - a^2), c = c2 - b^2, rho = 1; f(t, u, v) free."""

    a: object = "0.5*sin(t)"
    c1: float = 1.0
    c2: float = 3.0
    f: object = "x1*x2"
    window: tuple = (0.0, 1.0)

    def __post_init__(self):
        self.a = _time_expr(self.a)
        self.f = _uv_field(self.f)
        ts = np.linspace(self.window[0], self.window[1], 201)
        amax = max(abs(float(self.a(t))) for t in ts)
        if self.c1 <= amax * amax:
            raise ValueError(f"c1 = {self.c1} must exceed max a(t)^2 = {amax * amax:.6g}")
        self.b = parse(f"sqrt({self.c1!r} - ({self.a})^2)", 0)
        self.c = parse(f"{self.c2!r} - ({self.b})^2", 0)
        self.a_tilde = -self.b.diff("t")
        self.b_tilde = self.a.diff("t")

    def coefficients(self, t):
        return self.a(t), self.b(t), self.c(t), self.a_tilde(t), self.b_tilde(t)

    def multiplier(self, t):
        a, b, c, _, _ = self.coefficients(t)
        return object_matrix([[c, a * b, -b],
                              [a * b, c + b * b - a * a, a],
                              [-b, a, c + b * b - 1.0]])

    def eigenvalues(self):
        """(single, double) = (c2 - c1 - 1, c2)."""
        return self.c2 - self.c1 - 1.0, self.c2

    def transform_blocks(self):
        """(u, v) share the double eigenvalue c2, z carries c2 - c1 - 1."""
        single, double = self.eigenvalues()
        return BlockStructure([double, single], [(0, 1), (2,)])

    def to_uvz(self, t, x):
        a, b = self.a(t), self.b(t)
        return [x[0] - b * x[2], x[1] + a * x[2], x[2] + b * x[0] - a * x[1]]

    def from_uvz(self, t, w):
        a, b = self.a(t), self.b(t)
        k = a * a + b * b + 1.0
        u, v, z = w
        return [((a * a + 1.0) * u + a * b * v + b * z) / k,
                (a * b * u + (b * b + 1.0) * v - a * z) / k,
                (-b * u + a * v + z) / k]

    def inverse_matrix(self, t):
        a, b = self.a(t), self.b(t)
        k = a * a + b * b + 1.0
        return object_matrix([[(a * a + 1.0) / k, a * b / k, b / k],
                              [a * b / k, (b * b + 1.0) / k, -a / k],
                              [-b / k, a / k, 1.0 / k]])

    def connection12(self, t, x):
        u, v, _ = self.to_uvz(t, x)
        return self.f(t, [u, v])

    def vector_potential(self):
        fam = self

        def moment(t, x):
            u, v, _ = fam.to_uvz(t, x)
            return u, v, radial_moment(fam.f, t, u, v)

        def A1(t, x):
            u, v, I = moment(t, x)
            return 2.0 * v * I + fam.a_tilde(t) * x[2]

        def A2(t, x):
            u, v, I = moment(t, x)
            return -2.0 * u * I + fam.b_tilde(t) * x[2]

        def A3(t, x):
            u, v, I = moment(t, x)
            return (-2.0 * (fam.a(t) * u + fam.b(t) * v) * I
                    - fam.a_tilde(t) * x[0] - fam.b_tilde(t) * x[1])
        return [A1, A2, A3]


def n3_vector_potential(family):
    return family.vector_potential()


def curl_residuals(family, points):
    """Max deviations of the three curl relations of the vector potential."""
    A = family.vector_potential()
    out = np.zeros(3)
    for p in points:
        grads = [ad.gradient(lambda x: Ai(p.t, x), list(p.x)) for Ai in A]
        d = lambda i, j: float(grads[i][j])
        f = float(family.connection12(p.t, p.x))
        a, b, _, at, bt = (float(v) for v in family.coefficients(p.t))
        out = np.maximum(out, [abs(d(0, 1) - d(1, 0) - 2.0 * f),
                               abs(d(0, 2) - d(2, 0) - 2.0 * a * f - 2.0 * at),
                               abs(d(1, 2) - d(2, 1) - 2.0 * b * f - 2.0 * bt)])
    return out


def n3_dotg_residuals(family, times):
    """Residuals of the six component equations for gdot with rho = 1."""
    out = np.zeros(6)
    for t in times:
        tag = ad.new_tag()
        tt = ad.Dual(float(t), 1.0, tag)
        a, b, c = family.a(tt), family.b(tt), family.c(tt)
        d = lambda q: float(ad.eps_part(q, tag))
        av, bv = float(ad.real(a)), float(ad.real(b))
        at, bt = float(family.a_tilde(float(t))), float(family.b_tilde(float(t)))
        out = np.maximum(out, np.abs([
            d(c) - 2.0 * at * bv,
            d(c + b * b - a * a) + 2.0 * bt * av,
            d(c + b * b) - 2.0 * (bt * av - at * bv),
            d(a * b) - (bv * bt - av * at),
            d(a) - (bt * (1.0 - av * av) + at * av * bv),
            d(-b) - (at * (1.0 - bv * bv) + bt * av * bv),
        ]))
    return out


def n3_build(family, U_pot="x1^2 + x2^2", Z_pot="x1^2"):
    """(EMSystem, MultiplierCandidate, P) with V = U_pot(t, u, v) + Z_pot(t, z), x = P (u, v, z)."""
    from .helmholtz import MultiplierCandidate

    U_pot = _uv_field(U_pot)
    Z_pot = parse(Z_pot, 1) if isinstance(Z_pot, str) else Z_pot
    fam = family

    def V(t, x):
        u, v, z = fam.to_uvz(t, x)
        return U_pot(t, [u, v]) + Z_pot(t, [z])

    system = EMSystem(3, V, fam.vector_potential(), name="n3", window=fam.window,
                      meta={"family": "n3"})
    g = MultiplierCandidate(MatrixFunction(fam.multiplier, (3, 3)))
    P = MatrixFunction(fam.inverse_matrix, (3, 3))
    return system, g, P


# rotation-driven cubic example --------------------------------------------------

SEC5_S = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def sec5_rotation(theta):
    th = str(_time_expr(theta))
    return MatrixFunction.from_expressions([["1", "0", "0"],
                                            ["0", f"cos({th})", f"-sin({th})"],
                                            ["0", f"sin({th})", f"cos({th})"]])


def sec5_potential(a):
    return parse(f"({_time_expr(a)}) * (x1 - x2)^3", 3)


def sec5_build(a="1", theta="t"):
    """Cubic potential W = a(t)(y1 - y2)^3 with S of eigenvalues {0, 1, 2}, rotated by theta."""
    return construct_system(sec5_potential(a), SEC5_S, sec5_rotation(theta))


def sec5_y_system(a="1"):
    """The velocity-free y-equations ydd = -dW/dy."""
    return EMSystem(3, sec5_potential(a), ["0", "0", "0"], name="sec5-y")


def sec5_expected_multiplier(theta="t"):
    th = _time_expr(theta)
    return lambda t: np.array([[1.0, math.cos(th(t)), math.sin(th(t))],
                               [math.cos(th(t)), 1.0, 0.0],
                               [math.sin(th(t)), 0.0, 1.0]])
