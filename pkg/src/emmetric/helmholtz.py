"""Multiplier conditions for electromagnetic-type systems.

A candidate multiplier g(t) is checked against:

* ``dotg``        gdot = g Gamma + (g Gamma)^T along a time grid
* ``skewderiv``   g dGamma/dx^r + (g dGamma/dx^r)^T = 0
* ``curv``        cyclic sum of d(g Gamma)_{ar}/dx^b vanishes
* ``R``           g_{ar} R^r_{bc} + cyclic = 0
* ``veqn``        g (Hess V + sym(d^2 A/dt dx) - Gamma^2) is symmetric
* ``phi_symmetry`` g Phi is symmetric (full Jacobi endomorphism, velocities included)

Residuals are absolute max-norms.  Symmetry, singularity and "multiple of the
identity" are reported as flags; only asymmetry is fatal.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .expr import EvalPoint
from .model import sample_cloud
from .paths import MatrixFunction, MatrixPath, as_time_matrix, evaluate_numeric, grid_size

EXPRESSION_TOL = 1e-8
PATH_TOL = 1e-5
SYMMETRY_TOL = 1e-10
SINGULAR_EPS = 1e-8
IDENTITY_TOL = 1e-8


@dataclass
class MultiplierCandidate:
    """A time-dependent symmetric matrix proposed as a multiplier."""

    g: object
    claims_constant: bool = False

    def __post_init__(self):
        self.g = as_time_matrix(self.g)
        shape = self.g.shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"multiplier must be square, got shape {shape}")

    @property
    def n(self):
        return self.g.shape[0]

    @property
    def is_path(self):
        return isinstance(self.g, MatrixPath)

    def __call__(self, t):
        return evaluate_numeric(self.g, t)

    def default_tol(self):
        return PATH_TOL if self.is_path else EXPRESSION_TOL


def _candidate(g):
    return g if isinstance(g, MultiplierCandidate) else MultiplierCandidate(g)


@dataclass
class ConditionResult:
    condition: str
    residual: float
    tol: float
    worst_point: dict = None

    @property
    def passed(self):
        return bool(self.residual <= self.tol)

    def to_dict(self):
        return {"condition": self.condition, "residual": float(self.residual),
                "tol": float(self.tol), "pass": self.passed, "worst_point": self.worst_point}


@dataclass
class ConditionReport:
    results: list
    flags: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r.passed for r in self.results) and self.flags.get("symmetric", True)

    def __getitem__(self, name):
        for r in self.results:
            if r.condition == name:
                return r
        raise KeyError(name)

    def to_dict(self):
        return {"version": __version__, "pass": self.passed,
                "conditions": [r.to_dict() for r in self.results],
                "flags": self.flags, "warnings": list(self.warnings), **self.meta}

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _point_dict(p):
    return {"t": p.t, "x": list(p.x), "xdot": list(p.xdot)}


def _worst(residuals, points):
    residuals = np.asarray(residuals, float)
    if residuals.size == 0:
        return 0.0, None
    i = int(np.argmax(residuals))
    return float(residuals[i]), _point_dict(points[i])


def _jets(sys, points, jets):
    return jets if jets is not None else [sys.local(p.t, p.x) for p in points]


def _points(sys, points, samples=20, seed=0, window=(0.0, 1.0)):
    if points is not None:
        return list(points)
    return sample_cloud(sys.n, samples, seed=seed, window=window)


# array-level residuals ---------------------------------------------------

def dotg_residual(g, gdot, gamma):
    gg = g @ gamma
    return float(np.max(np.abs(gdot - gg - gg.T)))


def skewderiv_residual(g, dgamma_x):
    """dgamma_x[c, b, r] = dGamma^c_b / dx^r."""
    m = np.einsum("ac,cbr->abr", g, dgamma_x)
    return float(np.max(np.abs(m + m.transpose(1, 0, 2)))) if m.size else 0.0


def curv_residual(g, dgamma_x):
    d = np.einsum("ac,crb->arb", g, dgamma_x)
    c = np.einsum("arb->abr", d) + np.einsum("rba->abr", d) + np.einsum("bar->abr", d)
    return float(np.max(np.abs(c))) if c.size else 0.0


def r_condition_residual(g, curvature):
    """curvature[r, b, c] = R^r_{bc}."""
    m = np.einsum("ar,rbc->abc", g, curvature)
    c = m + np.einsum("bca->abc", m) + np.einsum("cab->abc", m)
    return float(np.max(np.abs(c))) if c.size else 0.0


def asymmetry(m):
    return float(np.max(np.abs(m - m.T)))


# checks ------------------------------------------------------------------

def _time_grid(cand, grid):
    if cand.is_path:
        return cand.g.times
    t0, t1, h = grid
    return np.linspace(t0, t1, grid_size(t0, t1, h))


def check_dotg(sys, g, grid=(0.0, 1.0, 1e-2), points=None, tol=None):
    """Max over grid times of |gdot - g Gamma - (g Gamma)^T|.

    At grid time k the connection is evaluated at x from cloud point k mod N,
    so x-dependent connections are exercised too.
    """
    cand = _candidate(g)
    tol = cand.default_tol() if tol is None else tol
    times = _time_grid(cand, grid)
    if len(times) < 5:
        raise ValueError("time grid too coarse: need at least 5 points")
    pts = _points(sys, points, window=(times[0], times[-1]))
    if cand.is_path:
        gvals = cand.g.values
        gdots = cand.g.grid_derivative(1)
    else:
        dg = cand.g.derivative()
        gvals = [cand(t) for t in times]
        gdots = [evaluate_numeric(dg, t) for t in times]
    res, where = [], []
    for k, t in enumerate(times):
        x = pts[k % len(pts)].x
        gamma = np.asarray(sys.connection(float(t), list(x)), float)
        res.append(dotg_residual(np.asarray(gvals[k]), np.asarray(gdots[k]), gamma))
        where.append(EvalPoint(float(t), x))
    r, wp = _worst(res, where)
    return ConditionResult("dotg", r, tol, wp)


def _pointwise(name, fn, sys, g, points, tol, jets):
    cand = _candidate(g)
    tol = cand.default_tol() if tol is None else tol
    pts = _points(sys, points)
    jets = _jets(sys, pts, jets)
    res = [fn(cand(p.t), j, p) for p, j in zip(pts, jets)]
    r, wp = _worst(res, pts)
    return ConditionResult(name, r, tol, wp)


def check_skewderiv(sys, g, points=None, tol=None, jets=None):
    return _pointwise("skewderiv", lambda gm, j, p: skewderiv_residual(gm, j.dgamma_x),
                      sys, g, points, tol, jets)


def check_curv(sys, g, points=None, tol=None, jets=None):
    return _pointwise("curv", lambda gm, j, p: curv_residual(gm, j.dgamma_x),
                      sys, g, points, tol, jets)


def check_R_condition(sys, g, points=None, tol=None, jets=None):
    return _pointwise("R", lambda gm, j, p: r_condition_residual(gm, j.curvature()),
                      sys, g, points, tol, jets)


def check_veqn(sys, g, points=None, tol=None, jets=None):
    return _pointwise("veqn", lambda gm, j, p: asymmetry(gm @ j.potential_block()),
                      sys, g, points, tol, jets)


def check_phi_symmetry(sys, g, points=None, tol=None, jets=None):
    return _pointwise("phi_symmetry", lambda gm, j, p: asymmetry(gm @ j.jacobi(p.xdot)),
                      sys, g, points, tol, jets)


def check_constant(g, grid=(0.0, 1.0, 1e-2), tol=None):
    cand = _candidate(g)
    tol = cand.default_tol() if tol is None else tol
    times = _time_grid(cand, grid)
    if cand.is_path:
        gdots = cand.g.grid_derivative(1)
    else:
        dg = cand.g.derivative()
        gdots = [evaluate_numeric(dg, t) for t in times]
    res = [float(np.max(np.abs(d))) for d in gdots]
    i = int(np.argmax(res))
    return ConditionResult("constant", res[i], tol, {"t": float(times[i])})


def multiplier_flags(g, times, sym_tol=SYMMETRY_TOL, eps=SINGULAR_EPS, id_tol=IDENTITY_TOL):
    cand = _candidate(g)
    n = cand.n
    asym, min_det, id_dev = 0.0, np.inf, 0.0
    for t in times:
        m = cand(t)
        asym = max(asym, asymmetry(m))
        min_det = min(min_det, abs(float(np.linalg.det(m))))
        id_dev = max(id_dev, float(np.max(np.abs(m - np.trace(m) / n * np.eye(n)))))
    flags = {"symmetric": asym <= sym_tol, "asymmetry": asym,
             "singular": min_det < eps, "min_abs_det": min_det,
             "multiple_of_identity": id_dev <= id_tol}
    warnings = []
    if not flags["symmetric"]:
        warnings.append(f"candidate is not symmetric (max asymmetry {asym:.3g})")
    if flags["singular"]:
        warnings.append(f"candidate is singular or nearly so (min |det| {min_det:.3g})")
    if flags["multiple_of_identity"]:
        warnings.append("candidate is a multiple of the identity")
    return flags, warnings


def verify_all(sys, g, grid=(0.0, 1.0, 1e-2), points=None, tol=None, samples=20, seed=0):
    """Run every condition and collect flags into a ConditionReport."""
    cand = _candidate(g)
    if cand.n != sys.n:
        raise ValueError(f"multiplier is {cand.n}x{cand.n}, system has dimension {sys.n}")
    tol = cand.default_tol() if tol is None else tol
    times = _time_grid(cand, grid)
    window = (float(times[0]), float(times[-1]))
    pts = _points(sys, points, samples=samples, seed=seed, window=window)
    jets = [sys.local(p.t, p.x) for p in pts]
    results = [
        check_dotg(sys, cand, grid, pts, tol),
        check_skewderiv(sys, cand, pts, tol, jets),
        check_curv(sys, cand, pts, tol, jets),
        check_R_condition(sys, cand, pts, tol, jets),
        check_veqn(sys, cand, pts, tol, jets),
        check_phi_symmetry(sys, cand, pts, tol, jets),
    ]
    if cand.claims_constant:
        results.append(check_constant(cand, grid, tol))
    flags, warnings = multiplier_flags(cand, times)
    meta = {"grid": {"t0": window[0], "t1": window[1], "points": len(times)},
            "samples": len(pts), "seed": seed, "tolerance": tol,
            "candidate": "path" if cand.is_path else "function"}
    return ConditionReport(results, flags, warnings, meta)


def identity_candidate(n):
    return MultiplierCandidate(MatrixFunction.constant(np.eye(n)), claims_constant=True)

