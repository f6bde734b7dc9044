import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emmetric.expr import ad
from emmetric.helmholtz import (MultiplierCandidate, check_constant, check_curv, check_dotg,
                                check_phi_symmetry, check_R_condition, check_skewderiv,
                                check_veqn, identity_candidate, multiplier_flags, verify_all)
from emmetric.linalg import object_matrix
from emmetric.model import EMSystem, sample_cloud
from emmetric.paperlib import sec5_build
from emmetric.paths import MatrixFunction, MatrixPath
from oracles import fd1


def _const(m):
    return MultiplierCandidate(MatrixFunction.constant(np.array(m, float)))


def _dgamma_fd(sys, p):
    """dG[a, b, r] = dGamma^a_b / dx^r by finite differences of the connection."""
    x = np.array(p.x)
    cols = [fd1(lambda d, r=r: np.asarray(sys.connection(p.t, list(x + d * np.eye(sys.n)[r])), float), 0.0)
            for r in range(sys.n)]
    return np.stack(cols, axis=-1)


def _curv_oracle(g, dG):
    n = g.shape[0]
    d = lambda b, a, r: sum(g[a, c] * dG[c, r, b] for c in range(n))  # d_b (g Gamma)_{ar}
    return max(abs(d(b, a, r) + d(r, b, a) + d(a, r, b))
               for a in range(n) for b in range(n) for r in range(n))


def _r_oracle(g, dG):
    n = g.shape[0]
    R = lambda r, b, c: dG[r, b, c] - dG[r, c, b]
    m = lambda a, b, c: sum(g[a, r] * R(r, b, c) for r in range(n))
    return max(abs(m(a, b, c) + m(b, c, a) + m(c, a, b))
               for a in range(n) for b in range(n) for c in range(n))


ROTATING = EMSystem(2, "0.5*(x1^2 + x2^2)", ["x2", "-x1"])  # Gamma = [[0, 1], [-1, 0]]
X_DEPENDENT = EMSystem(2, "x1^2", ["x1*x2", "0"])  # Gamma^1_2 = x1/2
N3_CROSS = EMSystem(3, "x1^2 + x2^2 + x3^2", ["x2*x3", "0", "0"])


def test_dotg_identity_is_zero():
    assert check_dotg(ROTATING, identity_candidate(2)).residual == 0.0


def test_dotg_constant_diagonal_residual_is_one():
    # g Gamma + (g Gamma)^T = [[0, -1], [-1, 0]] for g = diag(1, 2)
    r = check_dotg(ROTATING, _const(np.diag([1.0, 2.0])))
    assert r.residual == pytest.approx(1.0, abs=1e-12)
    assert not r.passed


def test_dotg_needs_enough_grid_points():
    with pytest.raises(ValueError):
        check_dotg(ROTATING, identity_candidate(2), grid=(0.0, 1.0, 0.5))


def test_skewderiv_zero_when_gamma_independent_of_x():
    assert check_skewderiv(ROTATING, _const(np.diag([1.0, 2.0]))).residual == 0.0


def test_skewderiv_identity_vanishes_for_skew_connection():
    assert check_skewderiv(X_DEPENDENT, identity_candidate(2)).residual == 0.0


def test_skewderiv_diagonal_residual():
    # g = diag(1, 3): residual = |1 - 3| * |dGamma^1_2/dx1| = 2 * 1/2
    r = check_skewderiv(X_DEPENDENT, _const(np.diag([1.0, 3.0])))
    assert r.residual == pytest.approx(1.0, abs=1e-12)


def test_curv_zero_for_constant_connection():
    assert check_curv(ROTATING, _const([[2.0, 0.3], [0.3, 1.0]])).residual == 0.0


def test_curv_and_R_against_finite_difference_oracle():
    g = np.diag([2.0, 2.0, 1.0])
    pts = sample_cloud(3, 6, seed=3)
    curv = check_curv(N3_CROSS, _const(g), pts)
    rcond = check_R_condition(N3_CROSS, _const(g), pts)
    ref_c = max(_curv_oracle(g, _dgamma_fd(N3_CROSS, p)) for p in pts)
    ref_r = max(_r_oracle(g, _dgamma_fd(N3_CROSS, p)) for p in pts)
    assert ref_c > 0.1 and ref_r > 0.1
    assert curv.residual == pytest.approx(ref_c, abs=1e-9)
    assert rcond.residual == pytest.approx(ref_r, abs=1e-9)


def test_R_condition_trivial_in_two_dimensions():
    assert check_R_condition(X_DEPENDENT, _const(np.diag([1.0, 3.0]))).residual == 0.0


def test_identity_curv_and_R_agree():
    pts = sample_cloud(3, 6, seed=1)
    c = check_curv(N3_CROSS, identity_candidate(3), pts).residual
    r = check_R_condition(N3_CROSS, identity_candidate(3), pts).residual
    assert c < 1e-14 and r < 1e-14


def test_veqn_identity_is_zero():
    assert check_veqn(X_DEPENDENT, identity_candidate(2)).residual < 1e-15


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_phi_symmetry_implies_veqn_for_constant_connection(seed):
    """With Gamma independent of x, g Phi and g M differ by nothing velocity-dependent."""
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((2, 2))
    g = _const(m + m.T)
    pts = sample_cloud(2, 5, seed=seed % 1000)
    assert check_veqn(ROTATING, g, pts).residual == pytest.approx(
        check_phi_symmetry(ROTATING, g, pts).residual, abs=1e-12)


def test_constant_check():
    assert check_constant(identity_candidate(2)).passed
    moving = MultiplierCandidate(MatrixFunction.from_expressions([["1", "t"], ["t", "1"]]))
    assert check_constant(moving).residual == pytest.approx(1.0)


def test_flags():
    flags, warnings = multiplier_flags(_const(2 * np.eye(2)), [0.0, 1.0])
    assert flags["multiple_of_identity"] and not flags["singular"]
    flags, warnings = multiplier_flags(_const([[1.0, 1.0], [1.0, 1.0]]), [0.0])
    assert flags["singular"] and any("singular" in w for w in warnings)
    flags, _ = multiplier_flags(_const([[1.0, 2.0], [0.0, 1.0]]), [0.0])
    assert not flags["symmetric"]


def test_verify_all_multiple_of_identity_passes_with_flag():
    rep = verify_all(X_DEPENDENT, _const(2 * np.eye(2)))
    assert rep.passed and rep.flags["multiple_of_identity"]


def test_verify_all_rejects_asymmetric_candidate():
    rep = verify_all(ROTATING, _const([[1.0, 0.5], [0.0, 1.0]]))
    assert not rep.passed


def test_verify_all_constant_claim_adds_check():
    cand = MultiplierCandidate(MatrixFunction.constant(np.eye(2)), claims_constant=True)
    rep = verify_all(ROTATING, cand)
    assert rep["constant"].passed


def test_verify_all_dimension_mismatch():
    with pytest.raises(ValueError):
        verify_all(ROTATING, identity_candidate(3))


def test_report_json_is_deterministic():
    sys, g = sec5_build()
    a = verify_all(sys, g, samples=8).to_json()
    b = verify_all(sys, g, samples=8).to_json()
    assert a == b
    d = json.loads(a)
    for key in ("version", "pass", "conditions", "flags", "warnings", "grid", "tolerance", "seed"):
        assert key in d


def test_random_symmetric_candidate_fails_on_rotation_example():
    sys, _ = sec5_build()
    rng = np.random.default_rng(0)
    for _ in range(5):
        k = rng.standard_normal((3, 3))
        k = k + k.T
        fn = lambda t, k=k: object_matrix([[v * (1.0 + 0.5 * ad.sin(t)) for v in row] for row in k])
        g = MultiplierCandidate(MatrixFunction(fn, (3, 3)))
        assert not verify_all(sys, g, samples=8).passed


def test_path_candidate_uses_path_tolerance():
    sys, g = sec5_build()
    path = MatrixPath.from_function(g, 0.0, 1.0, 1e-2)
    rep = verify_all(sys, MultiplierCandidate(path), samples=8)
    assert rep.meta["tolerance"] == pytest.approx(1e-5)
    assert rep.passed
