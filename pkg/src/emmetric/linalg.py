"""Small dense linear algebra used throughout the package.

``jacobi_eigh`` is a batched cyclic Jacobi solver for real symmetric matrices;
``generic_inv`` works on object arrays of jets so inverses can be differentiated.
"""

import functools
import math
from fractions import Fraction

import numpy as np

from .expr import ad


def object_matrix(rows):
    """Build an (n, m) array from nested rows, keeping jets/expressions as objects."""
    rows = [list(r) for r in rows]
    n = len(rows)
    m = len(rows[0]) if n else 0
    if all(ad._is_plain(v) and np.ndim(v) == 0 for r in rows for v in r):
        return np.array(rows, dtype=float).reshape(n, m)
    out = np.empty((n, m), dtype=object)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            out[i, j] = v
    return out


def is_numeric(a):
    return isinstance(a, np.ndarray) and a.dtype != object


def generic_inv(m):
    """Gauss-Jordan inverse with partial pivoting on real parts; jet-safe."""
    if is_numeric(m):
        return np.linalg.inv(m)
    n = m.shape[0]
    a = np.empty((n, 2 * n), dtype=object)
    a[:, :n] = m
    a[:, n:] = np.eye(n)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(float(ad.real(a[r, col]))))
        if float(ad.real(a[piv, col])) == 0.0:
            raise np.linalg.LinAlgError("singular matrix")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
        inv_p = 1.0 / a[col, col]
        a[col] = [v * inv_p for v in a[col]]
        for r in range(n):
            if r != col:
                f = a[r, col]
                a[r] = [a[r, k] - f * a[col, k] for k in range(2 * n)]
    return a[:, n:]


def jacobi_eigh(a, tol=1e-15, max_sweeps=50):
    """Eigen-decomposition of symmetric matrices by the cyclic Jacobi method.

    ``a`` has shape (..., n, n).  Returns eigenvalues sorted ascending with
    shape (..., n) and orthonormal eigenvectors as columns, shape (..., n, n).
    All matrices in the batch are rotated together, one (p, q) pair at a time.
    """
    a = np.array(a, dtype=float)
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    a = a.reshape((-1, n, n)).copy()
    v = np.broadcast_to(np.eye(n), a.shape).copy()
    scale = np.maximum(np.sqrt(np.sum(a * a, axis=(1, 2))), np.finfo(float).tiny)
    offmask = 1.0 - np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum((a * offmask) ** 2, axis=(1, 2)))
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = np.abs(apq) > tol * 1e-3 * scale
                if not np.any(active):
                    continue
                safe = np.where(active, apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(theta == 0.0, 1.0, t)
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                c3 = c[:, None]
                s3 = s[:, None]
                cp, cq = a[:, :, p].copy(), a[:, :, q].copy()
                a[:, :, p] = c3 * cp - s3 * cq
                a[:, :, q] = s3 * cp + c3 * cq
                rp, rq = a[:, p, :].copy(), a[:, q, :].copy()
                a[:, p, :] = c3 * rp - s3 * rq
                a[:, q, :] = s3 * rp + c3 * rq
                a[:, p, q] = np.where(active, 0.0, a[:, p, q])
                a[:, q, p] = a[:, p, q]
                vp, vq = v[:, :, p].copy(), v[:, :, q].copy()
                v[:, :, p] = c3 * vp - s3 * vq
                v[:, :, q] = s3 * vp + c3 * vq
    w = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(w, axis=1)
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w.reshape(batch_shape + (n,)), v.reshape(batch_shape + (n, n))


def eigvalsh(a):
    return jacobi_eigh(a)[0]


def group_eigenvalues(eigs, rel_tol=1e-6):
    """Partition sorted eigenvalues into blocks of (numerically) equal values.

    Returns a list of (mean eigenvalue, index tuple).
    """
    eigs = np.asarray(eigs, dtype=float)
    scale = max(1.0, float(np.max(np.abs(eigs)))) if eigs.size else 1.0
    blocks = [[0]]
    for i in range(1, len(eigs)):
        if eigs[i] - eigs[i - 1] <= rel_tol * scale:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    return [(float(np.mean(eigs[b])), tuple(b)) for b in blocks]


@functools.lru_cache(maxsize=None)
def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative at offset 0.

    Solved exactly in rationals from the moment conditions
    ``sum_j w_j s_j**k = k! [k == order]``.
    """
    offsets = [Fraction(s) for s in offsets]
    k = len(offsets)
    rows = [[s ** p for s in offsets] + [Fraction(math.factorial(order) if p == order else 0)]
            for p in range(k)]
    for col in range(k):
        piv = next(r for r in range(col, k) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        pv = rows[col][col]
        rows[col] = [v / pv for v in rows[col]]
        for r in range(k):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return np.array([float(r[-1]) for r in rows])


def polar_rotation(m):
    """Orthogonal factor of the polar decomposition of a square matrix."""
    u, _, vt = np.linalg.svd(m)
    return u @ vt
