"""Expression language with exact first and second derivatives."""

from dataclasses import dataclass

import numpy as np

from . import ad
from .ad import DomainError, Dual, HyperDual
from .ast import Binary, Const, Expression, Unary, Var, as_expression, symbols
from .parser import IndexOutOfRangeError, ParseError, UnknownIdentifierError, parse

__all__ = [
    "ad", "Binary", "Const", "DomainError", "Dual", "EvalPoint", "Expression",
    "HyperDual", "IndexOutOfRangeError", "ParseError", "Unary",
    "UnknownIdentifierError", "Var", "as_expression", "deriv", "evaluate",
    "parse", "symbols",
]


@dataclass(frozen=True)
class EvalPoint:
    t: float
    x: tuple
    xdot: tuple = ()

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        xdot = tuple(float(v) for v in self.xdot) if len(self.xdot) else (0.0,) * len(x)
        if len(xdot) != len(x):
            raise ValueError("x and xdot must have the same length")
        if not (np.isfinite(self.t) and np.all(np.isfinite(x)) and np.all(np.isfinite(xdot))):
            raise ValueError("evaluation point must be finite")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xdot", xdot)

    @property
    def n(self):
        return len(self.x)


def _check_dim(e, p):
    if e.max_index() > p.n:
        raise ValueError(f"expression needs dimension {e.max_index()}, point has {p.n}")


def evaluate(e, p):
    _check_dim(e, p)
    return float(e.evaluate(p))


def _slot(var):
    var = Var.from_name(var) if isinstance(var, str) else var
    return var.kind, var.index


def deriv(e, p, vars):
    """Partial derivative of order 1 or 2 of ``e`` at ``p``.

    ``vars`` is a sequence of variable names such as ``("x1",)`` or
    ``("t", "xdot2")``.
    """
    vars = [_slot(v) for v in vars]
    if len(vars) not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")
    _check_dim(e, p)
    for kind, idx in vars:
        if kind != "t" and not 1 <= idx <= p.n:
            raise ValueError(f"variable index {idx} out of range")
    tag = ad.new_tag()
    t, x, xdot = p.t, list(p.x), list(p.xdot)

    def seed(kind, idx, jet):
        nonlocal t
        if kind == "t":
            t = jet
        elif kind == "x":
            x[idx - 1] = jet
        else:
            xdot[idx - 1] = jet

    if len(vars) == 1:
        kind, idx = vars[0]
        seed(kind, idx, ad.Dual(p.t if kind == "t" else (p.x if kind == "x" else p.xdot)[idx - 1], 1.0, tag))
        return float(ad.eps_part(e(t, x, xdot), tag))

    (k1, i1), (k2, i2) = vars
    base = lambda k, i: p.t if k == "t" else (p.x if k == "x" else p.xdot)[i - 1]
    if (k1, i1) == (k2, i2):
        seed(k1, i1, ad.HyperDual(base(k1, i1), 1.0, 1.0, 0.0, tag))
    else:
        seed(k1, i1, ad.HyperDual(base(k1, i1), 1.0, 0.0, 0.0, tag))
        seed(k2, i2, ad.HyperDual(base(k2, i2), 0.0, 1.0, 0.0, tag))
    return float(ad.hyper_parts(e(t, x, xdot), tag)[3])
