"""Forward-mode automatic differentiation with dual and hyper-dual numbers.

Components of a jet may be floats, numpy arrays (vectorised evaluation),
other jets (nesting), or symbolic expressions (tracing).  Every jet carries
an integer tag; when two jets with different tags meet, the one with the
larger tag is the outer structure and treats the other as a constant.  New
seeds always get a fresh, larger tag, so nested differentiation does not
suffer from perturbation confusion.
"""

import itertools

import numpy as np

_tag_counter = itertools.count(1)


class DomainError(ArithmeticError):
    """Raised for log/sqrt of a non-positive value or division by zero."""


def new_tag():
    return next(_tag_counter)


class _Jet:
    __slots__ = ()
    __array_ufunc__ = None


def real(x):
    """Innermost real part of a (possibly nested) jet."""
    while isinstance(x, _Jet):
        x = x.re
    return x


def _is_plain(x):
    return isinstance(x, (int, float, np.floating, np.integer, np.ndarray))


def _check_nonzero(x, what):
    if _is_plain(x) and np.any(np.asarray(x) == 0):
        raise DomainError(f"{what}: division by zero")


def _check_positive(x, what, strict=True):
    if not _is_plain(x):
        return
    arr = np.asarray(x)
    bad = np.any(arr <= 0) if strict else np.any(arr < 0)
    if bad:
        raise DomainError(f"{what} of non-positive value {arr.min()!r}")


class Dual(_Jet):
    """First-order jet ``re + eps*e`` with ``e**2 = 0``."""

    __slots__ = ("re", "eps", "tag")

    def __init__(self, re, eps=0.0, tag=0):
        self.re = re
        self.eps = eps
        self.tag = tag

    def __repr__(self):
        return f"Dual({self.re!r}, {self.eps!r}, tag={self.tag})"

    def _parts(self, other):
        if isinstance(other, _Jet):
            if other.tag == self.tag:
                if not isinstance(other, Dual):
                    raise TypeError("cannot mix Dual and HyperDual with the same tag")
                return other.re, other.eps
            if other.tag > self.tag:
                return None
        return other, 0.0

    def _apply(self, f, df, d2f=None):
        return Dual(f(self.re), df(self.re) * self.eps, self.tag)

    def __neg__(self):
        return Dual(-self.re, -self.eps, self.tag)

    def __pos__(self):
        return self

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__radd__(self)
        return Dual(self.re + p[0], self.eps + p[1], self.tag)

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__rsub__(self)
        return Dual(self.re - p[0], self.eps - p[1], self.tag)

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__sub__(self)
        return Dual(p[0] - self.re, p[1] - self.eps, self.tag)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__rmul__(self)
        return Dual(self.re * p[0], self.re * p[1] + self.eps * p[0], self.tag)

    __rmul__ = __mul__

    def reciprocal(self):
        return self._apply(_recip, _drecip)

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__rtruediv__(self)
        if isinstance(other, _Jet) and other.tag == self.tag:
            return self * other.reciprocal()
        return self * _recip(other)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__truediv__(self)
        return other * self.reciprocal()

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)


class HyperDual(_Jet):
    """Second-order jet ``re + e1*E1 + e2*E2 + e12*E1E2`` with ``E1**2 = E2**2 = 0``.

    Seeding one input with ``E1`` and another with ``E2`` yields the mixed
    second partial in ``e12`` from a single evaluation.
    """

    __slots__ = ("re", "e1", "e2", "e12", "tag")

    def __init__(self, re, e1=0.0, e2=0.0, e12=0.0, tag=0):
        self.re = re
        self.e1 = e1
        self.e2 = e2
        self.e12 = e12
        self.tag = tag

    def __repr__(self):
        return f"HyperDual({self.re!r}, {self.e1!r}, {self.e2!r}, {self.e12!r}, tag={self.tag})"

    def _parts(self, other):
        if isinstance(other, _Jet):
            if other.tag == self.tag:
                if not isinstance(other, HyperDual):
                    raise TypeError("cannot mix Dual and HyperDual with the same tag")
                return other.re, other.e1, other.e2, other.e12
            if other.tag > self.tag:
                return None
        return other, 0.0, 0.0, 0.0

    def _apply(self, f, df, d2f):
        a = self.re
        d1 = df(a)
        return HyperDual(f(a), d1 * self.e1, d1 * self.e2,
                         d1 * self.e12 + d2f(a) * (self.e1 * self.e2), self.tag)

    def __neg__(self):
        return HyperDual(-self.re, -self.e1, -self.e2, -self.e12, self.tag)

    def __pos__(self):
        return self

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__radd__(self)
        return HyperDual(self.re + p[0], self.e1 + p[1], self.e2 + p[2], self.e12 + p[3], self.tag)

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__rsub__(self)
        return HyperDual(self.re - p[0], self.e1 - p[1], self.e2 - p[2], self.e12 - p[3], self.tag)

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__sub__(self)
        return HyperDual(p[0] - self.re, p[1] - self.e1, p[2] - self.e2, p[3] - self.e12, self.tag)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__rmul__(self)
        a, b, c, d = self.re, self.e1, self.e2, self.e12
        a2, b2, c2, d2 = p
        return HyperDual(a * a2, a * b2 + b * a2, a * c2 + c * a2,
                         a * d2 + b * c2 + c * b2 + d * a2, self.tag)

    __rmul__ = __mul__

    def reciprocal(self):
        return self._apply(_recip, _drecip, _d2recip)

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__rtruediv__(self)
        if isinstance(other, _Jet) and other.tag == self.tag:
            return self * other.reciprocal()
        return self * _recip(other)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return other.__truediv__(self)
        return other * self.reciprocal()

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)


def _symbolic(x, name):
    hook = getattr(x, "_unary_node", None)
    return hook(name) if hook is not None else None


def _recip(a):
    if isinstance(a, _Jet):
        return a.reciprocal()
    _check_nonzero(real(a), "reciprocal")
    return 1.0 / a


def _drecip(a):
    return -_recip(a * a)


def _d2recip(a):
    return 2.0 * _recip(a * a * a)


def sin(x):
    if isinstance(x, _Jet):
        return x._apply(sin, cos, _neg_sin)
    s = _symbolic(x, "sin")
    return np.sin(x) if s is None else s


def cos(x):
    if isinstance(x, _Jet):
        return x._apply(cos, _neg_sin, _neg_cos)
    s = _symbolic(x, "cos")
    return np.cos(x) if s is None else s


def _neg_sin(x):
    return -sin(x)


def _neg_cos(x):
    return -cos(x)


def tan(x):
    if isinstance(x, _Jet):
        return x._apply(tan, _dtan, _d2tan)
    s = _symbolic(x, "tan")
    return np.tan(x) if s is None else s


def _dtan(x):
    t = tan(x)
    return 1.0 + t * t


def _d2tan(x):
    t = tan(x)
    return 2.0 * t * (1.0 + t * t)


def exp(x):
    if isinstance(x, _Jet):
        return x._apply(exp, exp, exp)
    s = _symbolic(x, "exp")
    return np.exp(x) if s is None else s


def log(x):
    if isinstance(x, _Jet):
        _check_positive(real(x), "log")
        return x._apply(log, _recip, _drecip)
    s = _symbolic(x, "log")
    if s is not None:
        return s
    _check_positive(x, "log")
    return np.log(x)


def sqrt(x):
    if isinstance(x, _Jet):
        # the derivative blows up at 0, so jets need a strictly positive argument
        _check_positive(real(x), "sqrt")
        return x._apply(sqrt, _dsqrt, _d2sqrt)
    s = _symbolic(x, "sqrt")
    if s is not None:
        return s
    _check_positive(x, "sqrt", strict=False)
    return np.sqrt(x)


def _dsqrt(x):
    return 0.5 * _recip(sqrt(x))


def _d2sqrt(x):
    return -0.25 * _recip(x * sqrt(x))


def divide(a, b):
    if not isinstance(b, _Jet) and _is_plain(b):
        _check_nonzero(b, "divide")
    return a / b


def _int_power(x, k):
    if isinstance(x, _Jet) or not _is_plain(x):
        result = None
        base = x
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result
    return x ** k


def power(base, exponent):
    """``base**exponent``; integer constant exponents use repeated multiplication."""
    if getattr(base, "_symbolic", False) or getattr(exponent, "_symbolic", False):
        return base ** exponent
    if _is_plain(exponent) and np.ndim(exponent) == 0 and float(exponent).is_integer():
        k = int(exponent)
        if k == 0:
            return 1.0 if _is_plain(base) or isinstance(base, _Jet) else base ** 0
        if k > 0:
            return _int_power(base, k)
        if _is_plain(real(base)):
            _check_nonzero(real(base), "power")
        return _recip(_int_power(base, -k))
    if not isinstance(base, _Jet) and not isinstance(exponent, _Jet) and not _is_plain(base):
        return base ** exponent
    _check_positive(real(base), "power with non-integer exponent")
    return exp(exponent * log(base))


def jet_sum(x, axis=None):
    """Sum array-valued jet components (e.g. quadrature nodes) along ``axis``."""
    if isinstance(x, Dual):
        return Dual(jet_sum(x.re, axis), jet_sum(x.eps, axis), x.tag)
    if isinstance(x, HyperDual):
        return HyperDual(jet_sum(x.re, axis), jet_sum(x.e1, axis), jet_sum(x.e2, axis),
                         jet_sum(x.e12, axis), x.tag)
    if isinstance(x, np.ndarray):
        return np.sum(x, axis=axis)
    return x


def eps_part(out, tag):
    """Derivative carried by a Dual with ``tag`` (0 if ``out`` does not depend on it)."""
    if isinstance(out, Dual) and out.tag == tag:
        return out.eps
    return 0.0


def hyper_parts(out, tag):
    if isinstance(out, HyperDual) and out.tag == tag:
        return out.re, out.e1, out.e2, out.e12
    return out, 0.0, 0.0, 0.0


def derivative(f, x):
    """d f / dx for a scalar-argument function, by a single Dual evaluation."""
    tag = new_tag()
    return eps_part(f(Dual(x, 1.0, tag)), tag)


def second_derivative(f, x):
    tag = new_tag()
    return hyper_parts(f(HyperDual(x, 1.0, 1.0, 0.0, tag)), tag)[3]


def gradient(f, z, idx=None):
    """Partials of ``f(z)`` with respect to ``z[i]`` for ``i`` in ``idx`` (default: all)."""
    z = list(z)
    idx = range(len(z)) if idx is None else idx
    out = []
    for i in idx:
        tag = new_tag()
        zz = list(z)
        zz[i] = Dual(z[i], 1.0, tag)
        out.append(eps_part(f(zz), tag))
    return out


def hessian(f, z, idx=None):
    """Value, gradient and Hessian of ``f(z)`` over the indices ``idx``.

    One hyper-dual evaluation per unordered pair.  Returned as nested lists so
    that jet-valued entries (nested differentiation) survive untouched.
    """
    z = list(z)
    idx = list(range(len(z))) if idx is None else list(idx)
    m = len(idx)
    grad = [0.0] * m
    hess = [[0.0] * m for _ in range(m)]
    value = None
    for a in range(m):
        for b in range(a, m):
            tag = new_tag()
            zz = list(z)
            i, j = idx[a], idx[b]
            if i == j:
                zz[i] = HyperDual(z[i], 1.0, 1.0, 0.0, tag)
            else:
                zz[i] = HyperDual(z[i], 1.0, 0.0, 0.0, tag)
                zz[j] = HyperDual(z[j], 0.0, 1.0, 0.0, tag)
            re, e1, e2, e12 = hyper_parts(f(zz), tag)
            if value is None:
                value = re
            if a == b:
                grad[a] = e1
            hess[a][b] = e12
            hess[b][a] = e12
    if value is None:
        value = f(z)
    return value, grad, hess
