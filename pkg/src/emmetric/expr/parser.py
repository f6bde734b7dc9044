"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-'|'+') factor | power
    power  := base ('^' factor)?
    base   := number | ident | '(' expr ')' | func '(' expr ')'
    ident  := 't' | 'x'k | 'xdot'k

``^`` is right-associative and binds tighter than unary minus.
"""

import re

from .ast import UNARY_FUNCS, Binary, Const, Unary, Var


class ParseError(ValueError):
    def __init__(self, message, position=None):
        self.position = position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"{message}{where}")


class UnknownIdentifierError(ParseError):
    pass


class IndexOutOfRangeError(ParseError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = len(text) - len(text[pos:].lstrip()) if m is None else pos
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, n):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            e = Binary(op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            e = Binary(op, e, self.factor())
        return e

    def factor(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            arg = self.factor()
            return Unary("neg", arg) if val == "-" else arg
        return self.power()

    def power(self):
        e = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            e = Binary("^", e, self.factor())
        return e

    def base(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "ident":
            if val in UNARY_FUNCS:
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return Unary(val, e)
            return self.ident(val, pos)
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos)

    def ident(self, name, pos):
        if name == "t":
            return Var("t", 0)
        for kind in ("xdot", "x"):
            digits = name[len(kind):]
            if name.startswith(kind) and digits.isdigit():
                k = int(digits)
                if k < 1 or k > self.n:
                    raise IndexOutOfRangeError(
                        f"variable {name} out of range for dimension {self.n}", pos)
                return Var(kind, k)
        raise UnknownIdentifierError(f"unknown identifier {name!r}", pos)


def parse(text, n):
    """Parse ``text`` into an expression over ``t``, ``x1..xn``, ``xdot1..xdotn``.

    ``n = 0`` accepts expressions in ``t`` only.
    """
    if n < 0:
        raise ValueError("dimension must be non-negative")
    return _Parser(text, n).parse()
