import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from emmetric.expr import ad, parse
from emmetric.linalg import (fd_weights, generic_inv, group_eigenvalues, jacobi_eigh,
                             object_matrix, polar_rotation)
from emmetric.paths import MatrixFunction, MatrixPath, as_time_matrix, grid_size, rk4
from oracles import random_symmetric


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 7))
def test_jacobi_matches_lapack(seed, n):
    a = random_symmetric(np.random.default_rng(seed), n)
    w, v = jacobi_eigh(a)
    assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-12)
    assert_allclose(v.T @ v, np.eye(n), atol=1e-12)
    assert_allclose(v @ np.diag(w) @ v.T, a, atol=1e-12)


def test_jacobi_batched_and_degenerate():
    rng = np.random.default_rng(1)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    a = q @ np.diag([2.0, 2.0, 2.0, -1.0]) @ q.T
    batch = np.stack([a, np.eye(4), np.zeros((4, 4))])
    w, v = jacobi_eigh(batch)
    assert w.shape == (3, 4) and v.shape == (3, 4, 4)
    assert_allclose(w[0], [-1, 2, 2, 2], atol=1e-13)
    assert_allclose(w[2], 0.0)


def test_group_eigenvalues():
    blocks = group_eigenvalues([1.0, 3.0, 3.0 + 1e-9, 5.0])
    assert [b[1] for b in blocks] == [(0,), (1, 2), (3,)]
    assert blocks[1][0] == pytest.approx(3.0)


@pytest.mark.parametrize("offsets, order, expected", [
    ((-1, 0, 1), 1, [-0.5, 0.0, 0.5]),
    ((-1, 0, 1), 2, [1.0, -2.0, 1.0]),
    ((-2, -1, 0, 1, 2), 1, [1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]),
    ((0, 1, 2), 1, [-1.5, 2.0, -0.5]),
])
def test_fd_weights_known_stencils(offsets, order, expected):
    assert_allclose(fd_weights(offsets, order), expected, atol=1e-15)


def test_generic_inv_on_jets():
    tag = ad.new_tag()
    t = ad.Dual(0.4, 1.0, tag)
    m = object_matrix([[ad.cos(t), -ad.sin(t) * 2], [ad.sin(t), ad.cos(t) + 1]])
    inv = generic_inv(m)
    real = np.array([[float(ad.real(v)) for v in row] for row in m])
    assert_allclose([[float(ad.real(v)) for v in row] for row in inv], np.linalg.inv(real), atol=1e-14)
    # d(M^-1) = -M^-1 dM M^-1
    dm = np.array([[float(ad.eps_part(v, tag)) for v in row] for row in m])
    ref = -np.linalg.inv(real) @ dm @ np.linalg.inv(real)
    assert_allclose([[float(ad.eps_part(v, tag)) for v in row] for row in inv], ref, atol=1e-13)


def test_polar_rotation_is_orthogonal():
    rng = np.random.default_rng(2)
    m = rng.standard_normal((3, 3))
    r = polar_rotation(m)
    assert_allclose(r.T @ r, np.eye(3), atol=1e-14)
    assert np.all(np.linalg.eigvalsh(r.T @ m + (r.T @ m).T) > -1e-12)


def test_grid_size_rejects_non_dividing_step():
    assert grid_size(0.0, 1.0, 0.25) == 5
    with pytest.raises(ValueError):
        grid_size(0.0, 1.0, 0.3)
    with pytest.raises(ValueError):
        grid_size(1.0, 0.0, 0.1)


def test_matrix_function_expressions_and_derivative():
    f = MatrixFunction.from_expressions([["cos(t)", "t^2"], ["0", "exp(t)"]])
    assert_allclose(f(0.5), [[np.cos(0.5), 0.25], [0.0, np.exp(0.5)]])
    assert_allclose(f.derivative()(0.5), [[-np.sin(0.5), 1.0], [0.0, np.exp(0.5)]], atol=1e-15)
    with pytest.raises(ValueError):
        MatrixFunction.from_expressions([[parse("x1", 1)]])


def test_traced_function_gets_expressions():
    f = MatrixFunction.traced(lambda t: object_matrix([[t * t, 1.0]]), (1, 2))
    assert f.to_strings() is not None
    assert_allclose(f.derivative()(3.0), [[6.0, 0.0]])


def test_path_derivatives_fourth_order():
    f = lambda t: np.array([[np.sin(2 * t), t ** 3], [np.exp(-t), 1.0]])
    df = lambda t: np.array([[2 * np.cos(2 * t), 3 * t ** 2], [-np.exp(-t), 0.0]])
    errs = []
    for h in (1e-2, 5e-3):
        p = MatrixPath.from_function(f, 0.0, 1.0, h)
        d1 = p.grid_derivative(1)
        errs.append(max(np.max(np.abs(d1[k] - df(t))) for k, t in enumerate(p.times)))
    assert errs[0] < 1e-7
    assert errs[0] / errs[1] > 12  # about 2^4


def test_path_hermite_interpolation_and_jets():
    f = lambda t: np.array([[np.sin(t)]])
    p = MatrixPath.from_function(f, 0.0, 1.0, 1e-2)
    assert p(0.123)[0, 0] == pytest.approx(np.sin(0.123), abs=1e-9)
    tag = ad.new_tag()
    d = p(ad.Dual(0.123, 1.0, tag))[0, 0]
    assert float(ad.eps_part(d, tag)) == pytest.approx(np.cos(0.123), abs=1e-6)
    with pytest.raises(ValueError):
        p(1.5)
    with pytest.raises(ValueError):
        p.node_index(0.125)


def test_csv_round_trip():
    rng = np.random.default_rng(0)
    p = MatrixPath(0.0, 0.1, rng.standard_normal((6, 2, 2)))
    text = p.to_csv()
    assert text.splitlines()[0] == "t,m11,m12,m21,m22"
    q = MatrixPath.from_csv(io.StringIO(text))
    assert_allclose(q.values, p.values, rtol=0, atol=0)
    assert q.h == pytest.approx(0.1)


def test_orthogonal_tag_validated():
    with pytest.raises(ValueError):
        MatrixPath(0.0, 0.1, np.ones((3, 2, 2)), orthogonal=True)


def test_as_time_matrix_accepts_constants_and_strings():
    assert_allclose(as_time_matrix(np.eye(2))(3.0), np.eye(2))
    assert_allclose(as_time_matrix([["t", "1"], ["0", "t"]])(2.0), [[2, 1], [0, 2]])


def test_rk4_exponential():
    times, ys = rk4(lambda t, y: -y, [1.0], 0.0, 1.0, 1e-2)
    assert ys[-1, 0] == pytest.approx(np.exp(-1.0), abs=1e-10)
    assert times[-1] == pytest.approx(1.0)
