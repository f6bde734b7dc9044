"""Independent reference computations used by the tests.

Nothing here calls into the package's differentiation, integration or
eigen-solvers; references come from finite differences, scipy and closed forms.
"""

import numpy as np
from scipy.linalg import expm


def fd1(f, x, h=1e-3):
    """Five-point central first derivative (error O(h^4))."""
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def fd2(f, x, h=1e-3):
    """Five-point central second derivative (error O(h^4))."""
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def fd_mixed(f, x, y, h=1e-3):
    """d^2 f / dx dy by nesting the five-point first derivative."""
    return fd1(lambda xx: fd1(lambda yy: f(xx, yy), y, h), x, h)


_LEAVES = ["t", "x1", "x2", "xdot1", "0.5", "1.3", "2"]


def random_expression(rng, depth=3):
    """A random expression string that is smooth and finite on [-1, 1]^k."""
    if depth == 0 or rng.random() < 0.2:
        return str(rng.choice(_LEAVES))
    a = random_expression(rng, depth - 1)
    kind = rng.integers(9)
    if kind == 0:
        return f"sin({a})"
    if kind == 1:
        return f"cos({a})"
    if kind == 2:
        return f"exp(0.3*{a})"
    if kind == 3:
        return f"log(1 + ({a})^2)"
    if kind == 4:
        return f"sqrt(2 + sin({a}))"
    if kind == 5:
        return f"({a})^{int(rng.integers(2, 4))}"
    b = random_expression(rng, depth - 1)
    if kind == 6:
        return f"({a}) + ({b})"
    if kind == 7:
        return f"({a}) * ({b})"
    return f"({a}) / (1 + ({b})^2)"


def random_skew(rng, n):
    m = rng.standard_normal((n, n))
    return m - m.T


def random_skew_path(rng, n, terms=3):
    """Gamma(t) = sum_i K_i phi_i(t) with random skew K_i and smooth phi_i."""
    ks = [random_skew(rng, n) for _ in range(terms)]
    freqs = rng.uniform(0.5, 3.0, terms)
    phases = rng.uniform(0, 2 * np.pi, terms)

    def gamma(t):
        return sum(k * np.cos(w * t + p) for k, w, p in zip(ks, freqs, phases))
    return gamma


def random_symmetric(rng, n):
    m = rng.standard_normal((n, n))
    return 0.5 * (m + m.T)


def lax_constant_reference(gamma, g0, t):
    """g(t) for gdot = g Gamma - Gamma g with constant Gamma: exp(-Gamma t) g0 exp(Gamma t)."""
    e = expm(gamma * t)
    return e.T @ g0 @ e


def rotation_constant_reference(gamma, t):
    """U(t) for Udot = -Gamma U, U(0) = I, with constant Gamma."""
    return expm(-gamma * t)


def n2_alpha(s0, s1, w, A, t):
    """alpha = -2 int_0^t sigma + A for sigma = s0 + s1 cos(w t), integrated by hand."""
    return -2.0 * (s0 * t + s1 * np.sin(w * t) / w) + A


def n2_multiplier(alpha, B, C):
    c, s = np.cos(alpha), np.sin(alpha)
    return 0.5 * np.array([[C + B * c, -B * s], [-B * s, C - B * c]])


def commutator_sym_residual(g, m):
    """max |g m - (g m)^T|."""
    p = g @ m
    return float(np.max(np.abs(p - p.T)))
