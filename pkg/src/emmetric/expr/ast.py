"""Expression trees over (t, x1..xn, xdot1..xdotn).

Nodes are immutable.  Evaluation is generic: the same tree can be evaluated on
floats, numpy arrays, dual/hyper-dual jets, or on other expressions (which
substitutes and returns a new tree).
"""

from dataclasses import dataclass

import numpy as np

from . import ad

UNARY_FUNCS = ("sin", "cos", "tan", "exp", "log", "sqrt", "neg")

_UNARY_IMPL = {
    "sin": ad.sin,
    "cos": ad.cos,
    "tan": ad.tan,
    "exp": ad.exp,
    "log": ad.log,
    "sqrt": ad.sqrt,
    "neg": lambda v: -v,
}


def _fmt_number(v):
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def as_expression(value):
    """Wrap a number as a constant node; negative numbers become ``neg(c)``."""
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        v = float(value)
        if not np.isfinite(v):
            raise ValueError(f"non-finite constant {v!r}")
        if v < 0:
            return Unary("neg", Const(-v))
        return Const(v)
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def _const_value(e):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Unary) and e.op == "neg" and isinstance(e.arg, Const):
        return -e.arg.value
    return None


class Expression:
    """Base class of all expression nodes."""

    __slots__ = ()
    __array_ufunc__ = None
    _symbolic = True

    # evaluation ---------------------------------------------------------
    def __call__(self, t, x=(), xdot=()):
        return self._ev(t, x, xdot)

    def evaluate(self, point):
        return self._ev(point.t, point.x, point.xdot)

    def _ev(self, t, x, xdot):
        raise NotImplementedError

    def compile(self):
        """A Python function f(t, x, xdot) equivalent to evaluating the tree.

        Uses the same jet-aware primitives, so results and domain errors match
        ``__call__``; only the tree walk is removed.
        """
        return eval(f"lambda t, x, xdot: {self._code()}", dict(_COMPILE_NS))

    # structure ----------------------------------------------------------
    def variables(self):
        out = set()
        self._collect(out)
        return out

    def _collect(self, out):
        pass

    def max_index(self):
        return max((i for k, i in self.variables() if k != "t"), default=0)

    def depends_on(self, kind):
        return any(k == kind for k, _ in self.variables())

    def size(self):
        return 1

    def diff(self, var):
        """Symbolic derivative, obtained by tracing the tree with a dual seed."""
        var = Var.from_name(var) if isinstance(var, str) else var
        n = self.max_index()
        t = Var("t", 0)
        x = [Var("x", i) for i in range(1, n + 1)]
        xdot = [Var("xdot", i) for i in range(1, n + 1)]
        tag = ad.new_tag()
        seed = ad.Dual(var, 1.0, tag)
        if var.kind == "t":
            t = seed
        elif var.index <= n:
            (x if var.kind == "x" else xdot)[var.index - 1] = seed
        out = ad.eps_part(self._ev(t, x, xdot), tag)
        return as_expression(out)

    def _unary_node(self, name):
        return Unary(name, self)

    # construction -------------------------------------------------------
    def _binop(self, op, other, reflected=False):
        try:
            other = as_expression(other)
        except TypeError:
            return NotImplemented
        left, right = (other, self) if reflected else (self, other)
        lv, rv = _const_value(left), _const_value(right)
        if op == "+":
            if lv == 0:
                return right
            if rv == 0:
                return left
        elif op == "-":
            if rv == 0:
                return left
            if lv == 0:
                return Unary("neg", right)
        elif op == "*":
            if lv == 0 or rv == 0:
                return Const(0.0)
            if lv == 1:
                return right
            if rv == 1:
                return left
        elif op == "/":
            if lv == 0:
                return Const(0.0)
            if rv == 1:
                return left
        return Binary(op, left, right)

    def __add__(self, other):
        return self._binop("+", other)

    def __radd__(self, other):
        return self._binop("+", other, True)

    def __sub__(self, other):
        return self._binop("-", other)

    def __rsub__(self, other):
        return self._binop("-", other, True)

    def __mul__(self, other):
        return self._binop("*", other)

    def __rmul__(self, other):
        return self._binop("*", other, True)

    def __truediv__(self, other):
        return self._binop("/", other)

    def __rtruediv__(self, other):
        return self._binop("/", other, True)

    def __pow__(self, other):
        return self._binop("^", other)

    def __rpow__(self, other):
        return self._binop("^", other, True)

    def __neg__(self):
        v = _const_value(self)
        if v == 0:
            return Const(0.0)
        return Unary("neg", self)

    def __pos__(self):
        return self


@dataclass(frozen=True)
class Const(Expression):
    value: float

    def _ev(self, t, x, xdot):
        return self.value

    def _code(self):
        return repr(float(self.value))

    def __str__(self):
        if self.value < 0:
            return f"(-{_fmt_number(-self.value)})"
        return _fmt_number(self.value)


@dataclass(frozen=True)
class Var(Expression):
    kind: str  # "t", "x" or "xdot"
    index: int = 0

    @classmethod
    def from_name(cls, name):
        name = name.strip()
        if name == "t":
            return cls("t", 0)
        for kind in ("xdot", "x"):
            if name.startswith(kind) and name[len(kind):].isdigit():
                return cls(kind, int(name[len(kind):]))
        raise ValueError(f"not a variable name: {name!r}")

    def _ev(self, t, x, xdot):
        if self.kind == "t":
            return t
        seq = x if self.kind == "x" else xdot
        if self.index > len(seq):
            raise ValueError(f"{self} needs a point of dimension >= {self.index}")
        return seq[self.index - 1]

    def _collect(self, out):
        out.add((self.kind, self.index))

    def _code(self):
        if self.kind == "t":
            return "t"
        return f"{'x' if self.kind == 'x' else 'xdot'}[{self.index - 1}]"

    def __str__(self):
        return "t" if self.kind == "t" else f"{self.kind}{self.index}"


@dataclass(frozen=True)
class Unary(Expression):
    op: str
    arg: Expression

    def _ev(self, t, x, xdot):
        return _UNARY_IMPL[self.op](self.arg._ev(t, x, xdot))

    def _collect(self, out):
        self.arg._collect(out)

    def _code(self):
        if self.op == "neg":
            return f"(-{self.arg._code()})"
        return f"_{self.op}({self.arg._code()})"

    def size(self):
        return 1 + self.arg.size()

    def __str__(self):
        if self.op == "neg":
            return f"(-{self.arg})"
        return f"{self.op}({self.arg})"


@dataclass(frozen=True)
class Binary(Expression):
    op: str  # one of + - * / ^
    left: Expression
    right: Expression

    def _ev(self, t, x, xdot):
        a = self.left._ev(t, x, xdot)
        b = self.right._ev(t, x, xdot)
        op = self.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return ad.divide(a, b)
        return ad.power(a, b)

    def _collect(self, out):
        self.left._collect(out)
        self.right._collect(out)

    def _code(self):
        a, b = self.left._code(), self.right._code()
        if self.op == "/":
            return f"_div({a}, {b})"
        if self.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {self.op} {b})"

    def size(self):
        return 1 + self.left.size() + self.right.size()

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


_COMPILE_NS = {"__builtins__": {}, "_div": ad.divide, "_pow": ad.power,
               **{f"_{k}": v for k, v in _UNARY_IMPL.items() if k != "neg"}}


def symbols(n):
    """Symbolic ``t``, ``x`` and ``xdot`` for tracing generic functions into trees."""
    return (Var("t", 0), [Var("x", i) for i in range(1, n + 1)],
            [Var("xdot", i) for i in range(1, n + 1)])
