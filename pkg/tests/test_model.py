import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from emmetric.expr import EvalPoint
from emmetric.model import (EMSystem, connection, curvature, forces, integrate, jacobi,
                            sample_cloud, trace_field)
from oracles import fd1

V_TEXT = "0.5*x1^2 + x1*x2^3*cos(t) + 0.1*x2^4"
A_TEXT = ["sin(t)*x2*x1^2", "-x1*exp(0.3*x2) + t*x2"]


@pytest.fixture
def system():
    return EMSystem(2, V_TEXT, A_TEXT)


def _forces_float(sys, t, x, v):
    return np.asarray(sys.forces(t, list(x), list(v)), float)


def test_uniform_magnetic_field():
    # A = (B/2)(-x2, x1) gives F = B (xdot2, -xdot1) with Gamma = [[0, -B/2], [B/2, 0]]
    sys = EMSystem(2, "0", ["-0.5*2*x2", "0.5*2*x1"])
    p = EvalPoint(0.0, (0.3, -0.1), (1.0, 2.0))
    assert_allclose(forces(sys, p), [2.0 * 2.0, -2.0 * 1.0])
    assert_allclose(connection(sys, p), [[0, -1.0], [1.0, 0]])


def test_connection_is_minus_half_velocity_jacobian(system):
    p = EvalPoint(0.4, (0.2, -0.7), (0.5, 0.1))
    gamma = connection(system, p)
    for b in range(2):
        def f(dv, b=b):
            v = list(p.xdot)
            v[b] += dv
            return _forces_float(system, p.t, p.x, v)
        assert_allclose(-0.5 * fd1(f, 0.0), gamma[:, b], atol=1e-9)
    assert_allclose(gamma, -gamma.T, atol=0)


def test_jacobi_matches_definition(system):
    """Phi = -dF/dx - Gamma Gamma - dGamma/dt along the flow, by finite differences."""
    p = EvalPoint(0.4, (0.2, -0.7), (0.5, 0.1))
    t, x, v = p.t, np.array(p.x), np.array(p.xdot)
    n = 2
    dFdx = np.column_stack([fd1(lambda d, b=b: _forces_float(system, t, x + d * np.eye(n)[b], v), 0.0)
                            for b in range(n)])
    gam = lambda tt, xx: np.asarray(system.connection(tt, list(xx)), float)
    # total derivative: Gamma depends on (t, x) only
    gdot = fd1(lambda d: gam(t + d, x + d * v), 0.0)
    phi_ref = -dFdx - gam(t, x) @ gam(t, x) - gdot
    assert_allclose(jacobi(system, p), phi_ref, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_jacobi_symmetric_for_electromagnetic_systems(seed):
    rng = np.random.default_rng(seed)
    p = EvalPoint(rng.uniform(-1, 1), tuple(rng.uniform(-1, 1, 2)), tuple(rng.uniform(-1, 1, 2)))
    phi = jacobi(EMSystem(2, V_TEXT, A_TEXT), p)
    assert_allclose(phi, phi.T, atol=1e-12)


def test_curvature_antisymmetric_in_last_pair(system):
    r = curvature(system, EvalPoint(0.1, (0.3, 0.4)))
    assert_allclose(r, -r.transpose(0, 2, 1), atol=0)


def test_velocity_dependent_potential_rejected():
    with pytest.raises(ValueError):
        EMSystem(1, "xdot1^2", ["0"])


def test_velocity_free_xdot_terms_are_dropped():
    sys = EMSystem(1, "x1^2 + 0*xdot1", ["0"])
    assert not sys.V.depends_on("xdot")


def test_dimension_validation():
    with pytest.raises(ValueError):
        EMSystem(2, "x3", ["0", "0"])
    with pytest.raises(ValueError):
        EMSystem(2, "0", ["0"])


def test_callable_potentials_agree_with_expressions(system):
    call = EMSystem(2, lambda t, x: system.V(t, x), [lambda t, x, a=a: a(t, x) for a in system.A])
    p = EvalPoint(0.2, (0.1, 0.5), (0.3, -0.4))
    assert_allclose(forces(call, p), forces(system, p), atol=1e-14)
    assert trace_field(call.V, 2) is not call.V


def test_energy_conserved_for_static_potentials():
    """The magnetic force does no work; E = |v|^2/2 + V is constant."""
    sys = EMSystem(2, "0.5*x1^2 + 0.25*x2^4", ["-x2*(1 + x1^2)", "x1"])
    times, xs, vs = integrate(sys, [0.5, 0.0], [0.0, 0.3], 0.0, 2.0, 1e-3)
    energy = 0.5 * np.sum(vs ** 2, axis=1) + 0.5 * xs[:, 0] ** 2 + 0.25 * xs[:, 1] ** 4
    assert np.max(np.abs(energy - energy[0])) < 1e-10


def test_sample_cloud_deterministic_and_bounded():
    a = sample_cloud(3, 20, seed=4, window=(0.5, 0.7))
    b = sample_cloud(3, 20, seed=4, window=(0.5, 0.7))
    assert a == b
    assert all(0.5 <= p.t <= 0.7 and max(map(abs, p.x + p.xdot)) <= 1.0 for p in a)
    assert sample_cloud(3, 20, seed=5) != a
