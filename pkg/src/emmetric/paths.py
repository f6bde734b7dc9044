"""Matrix-valued functions of time.

Two interchangeable kinds are used everywhere a g(t), P(t), U(t) or Gamma(t)
is needed.  Both are callable on a time (float, jet or symbolic) and both
provide ``derivative()``:

* ``MatrixFunction`` wraps a jet-generic callable; derivatives are exact (AD).
* ``MatrixPath`` holds samples on a uniform grid; derivatives come from
  fourth-order finite differences and values between nodes from cubic
  Hermite interpolation.
"""

import csv
import io

import numpy as np

from .expr import Expression, ad, parse
from .linalg import fd_weights, is_numeric, object_matrix


class MatrixFunction:
    """A matrix function of time with exact derivatives by forward-mode AD."""

    def __init__(self, fn, shape, exprs=None, name=None):
        self.fn = fn
        self.shape = tuple(shape)
        self.exprs = exprs
        self.name = name

    @classmethod
    def from_expressions(cls, entries):
        rows = [[e if isinstance(e, Expression) else parse(str(e), 0) for e in row] for row in entries]
        for row in rows:
            for e in row:
                if any(k != "t" for k, _ in e.variables()):
                    raise ValueError(f"matrix entry {e} must depend on t only")
        shape = (len(rows), len(rows[0]))
        return cls(lambda t: object_matrix([[e(t) for e in row] for row in rows]), shape, exprs=rows)

    @classmethod
    def traced(cls, fn, shape):
        """Wrap ``fn``, attaching expressions when it can be evaluated symbolically."""
        t = parse("t", 0)
        try:
            m = fn(t)
        except TypeError:
            return cls(fn, shape)
        exprs = [[v if isinstance(v, Expression) else parse(repr(float(v)), 0) for v in row]
                 for row in m]
        return cls.from_expressions(exprs)

    @classmethod
    def constant(cls, m):
        m = np.array(m, dtype=float)
        return cls(lambda t: m.copy(), m.shape)

    def __call__(self, t):
        return self.fn(t)

    def derivative(self):
        if self.exprs is not None:
            return MatrixFunction.from_expressions([[e.diff("t") for e in row] for row in self.exprs])
        fn = self.fn

        def dfn(t):
            tag = ad.new_tag()
            m = fn(ad.Dual(t, 1.0, tag))
            return object_matrix([[ad.eps_part(v, tag) for v in row] for row in m])

        return MatrixFunction(dfn, self.shape)

    def sample(self, t0, t1, h):
        return MatrixPath.from_function(self, t0, t1, h)

    def to_strings(self):
        if self.exprs is None:
            return None
        return [[str(e) for e in row] for row in self.exprs]


def grid_size(t0, t1, h):
    if h <= 0:
        raise ValueError("step size must be positive")
    if t1 <= t0:
        raise ValueError("time window must satisfy t0 < t1")
    steps = (t1 - t0) / h
    n = int(round(steps))
    if n < 1 or abs(steps - n) > 1e-6 * max(1.0, steps):
        raise ValueError(f"step {h} does not divide the window [{t0}, {t1}]")
    return n + 1


def _fd_stencil(i, k, width):
    """Offsets of a ``width``-point stencil at node ``i`` of ``k``, centred where possible."""
    half = width // 2
    lo = min(max(i - half, 0), k - width)
    return tuple(j - i for j in range(lo, lo + width))


def grid_derivative(values, h, order=1):
    """Fourth-order finite-difference derivative along axis 0 of ``values``."""
    values = np.asarray(values, dtype=float)
    k = values.shape[0]
    width = 5 if order == 1 else 6
    if k < width:
        raise ValueError(f"need at least {width} grid points for derivative order {order}")
    out = np.empty_like(values)
    central = fd_weights((-2, -1, 0, 1, 2), order)
    interior = slice(2, k - 2)
    out[interior] = sum(w * values[2 + off:k - 2 + off] for off, w in zip(range(-2, 3), central))
    for i in list(range(2)) + list(range(k - 2, k)):
        offs = _fd_stencil(i, k, width)
        w = fd_weights(offs, order)
        out[i] = sum(wj * values[i + o] for o, wj in zip(offs, w))
    return out / h ** order


class MatrixPath:
    """Matrices sampled on a uniform time grid ``t0, t0 + h, ..., t0 + (K-1) h``."""

    def __init__(self, t0, h, values, orthogonal=False):
        values = np.array(values, dtype=float)
        if values.ndim != 3:
            raise ValueError("path values must have shape (K, n, m)")
        if values.shape[0] < 2:
            raise ValueError("a path needs at least two samples")
        if h <= 0:
            raise ValueError("grid step must be positive")
        self.t0 = float(t0)
        self.h = float(h)
        self.values = values
        self.orthogonal = orthogonal
        self._slopes = None
        self._fd = None
        if orthogonal:
            err = self.orthogonality_error()
            if err > 1e-8:
                raise ValueError(f"path tagged orthogonal but |M^T M - I| = {err:.3g}")

    @classmethod
    def from_function(cls, fn, t0, t1, h, orthogonal=False):
        k = grid_size(t0, t1, h)
        times = np.linspace(t0, t1, k)
        values = np.array([np.asarray(fn(float(t)), dtype=float) for t in times])
        return cls(t0, (t1 - t0) / (k - 1), values, orthogonal=orthogonal)

    @property
    def shape(self):
        return self.values.shape[1:]

    @property
    def times(self):
        return self.t0 + self.h * np.arange(len(self.values))

    @property
    def t1(self):
        return self.t0 + self.h * (len(self.values) - 1)

    def __len__(self):
        return len(self.values)

    def orthogonality_error(self):
        m = self.values
        eye = np.eye(m.shape[2])
        return float(np.max(np.abs(np.einsum("kji,kjl->kil", m, m) - eye)))

    def grid_derivative(self, order=1):
        return grid_derivative(self.values, self.h, order)

    def node_derivatives(self):
        """Cached (first, second) finite-difference derivatives at the nodes."""
        if self._fd is None:
            self._fd = (self.grid_derivative(1), self.grid_derivative(2))
        return self._fd

    def derivative(self):
        return MatrixPath(self.t0, self.h, self.grid_derivative(1))

    def node_index(self, t, tol=1e-9):
        """Index of the grid node at ``t``; raises if ``t`` is not a node."""
        s = (float(t) - self.t0) / self.h
        i = int(round(s))
        if abs(s - i) > tol * max(1.0, abs(s)) or not 0 <= i < len(self):
            raise ValueError(f"time {t} is not a grid node of the path")
        return i

    def _hermite_data(self):
        if self._slopes is None:
            if len(self) >= 5:
                self._slopes = self.grid_derivative(1)
            else:
                self._slopes = np.gradient(self.values, self.h, axis=0)
        return self._slopes

    def __call__(self, t):
        if isinstance(t, Expression):
            raise TypeError("a sampled path cannot be evaluated symbolically")
        tr = float(ad.real(t))
        span = self.t1 - self.t0
        if tr < self.t0 - 1e-9 * span or tr > self.t1 + 1e-9 * span:
            raise ValueError(f"time {tr} outside path window [{self.t0}, {self.t1}]")
        slopes = self._hermite_data()
        i = min(max(int(np.floor((tr - self.t0) / self.h)), 0), len(self) - 2)
        s = (t - (self.t0 + i * self.h)) * (1.0 / self.h)
        s2 = s * s
        s3 = s2 * s
        h00 = 2.0 * s3 - 3.0 * s2 + 1.0
        h10 = s3 - 2.0 * s2 + s
        h01 = -2.0 * s3 + 3.0 * s2
        h11 = s3 - s2
        y0, y1 = self.values[i], self.values[i + 1]
        m0, m1 = slopes[i] * self.h, slopes[i + 1] * self.h
        if ad._is_plain(t):
            return h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1
        n, m = self.shape
        return object_matrix([[h00 * y0[a, b] + h10 * m0[a, b] + h01 * y1[a, b] + h11 * m1[a, b]
                               for b in range(m)] for a in range(n)])

    # CSV ----------------------------------------------------------------
    def to_csv(self, fh=None):
        n, m = self.shape
        header = ["t"] + [f"m{a + 1}{b + 1}" if max(n, m) < 10 else f"m{a + 1}_{b + 1}"
                          for a in range(n) for b in range(m)]
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for t, mat in zip(self.times, self.values):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in mat.ravel()])
        return buf.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, fh, shape=None, orthogonal=False):
        if isinstance(fh, str):
            fh = io.StringIO(fh)
        rows = list(csv.reader(fh))
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        times = data[:, 0]
        entries = data.shape[1] - 1
        if shape is None:
            n = int(round(np.sqrt(entries)))
            if n * n != entries:
                raise ValueError("cannot infer a square shape; pass shape explicitly")
            shape = (n, n)
        h = (times[-1] - times[0]) / (len(times) - 1)
        if np.max(np.abs(np.diff(times) - h)) > 1e-9 * max(1.0, abs(h)):
            raise ValueError("CSV time column is not a uniform grid")
        return cls(times[0], h, data[:, 1:].reshape((-1,) + tuple(shape)), orthogonal=orthogonal)


def as_time_matrix(obj):
    """Accept MatrixFunction, MatrixPath, constant arrays or nested expression strings."""
    if isinstance(obj, (MatrixFunction, MatrixPath)):
        return obj
    if callable(obj):
        probe = np.asarray(obj(0.0))
        return MatrixFunction(obj, probe.shape)
    arr = np.asarray(obj, dtype=object)
    if arr.dtype == object and any(isinstance(v, (str, Expression)) for v in arr.ravel()):
        return MatrixFunction.from_expressions(obj)
    return MatrixFunction.constant(np.asarray(obj, dtype=float))


def evaluate_numeric(tm, t):
    m = tm(t)
    return m if is_numeric(m) else np.array(m, dtype=float)


def rk4(rhs, y0, t0, t1, h):
    """Classical fixed-step RK4; returns the grid and the states at every node."""
    k = grid_size(t0, t1, h)
    h = (t1 - t0) / (k - 1)
    y = np.array(y0, dtype=float)
    ys = np.empty((k,) + y.shape)
    ys[0] = y
    t = t0
    for i in range(1, k):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + i * h
        ys[i] = y
    return t0 + h * np.arange(k), ys
