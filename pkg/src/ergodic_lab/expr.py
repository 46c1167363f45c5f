"""Closed-form real functions of one variable ``x``.

Grammar (whitespace-insensitive)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := ("-")? power
    power  := atom ("^" factor)?
    atom   := number | "x" | ident "(" expr ")" | "(" expr ")"
    ident  := abs | sqrt | exp | log | sin | cos | tanh | sign

Exponents must be free of ``x``; they are folded to a float at parse time.

``abs`` differentiates to ``sign``, which is only valid away from the kink:
evaluating ``sign`` at 0 raises :class:`DomainError`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from . import _series as ser
from .errors import DomainError, ParseError

FUNCTIONS = ("abs", "sqrt", "exp", "log", "sin", "cos", "tanh", "sign")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or one of FUNCTIONS
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str  # + - * /
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: float


X = Var()


@dataclass(frozen=True)
class Expression:
    """An immutable parsed expression; ``root`` is the AST."""

    root: object

    def __str__(self):
        return to_string(self.root)

    def __repr__(self):
        return f"Expression({to_string(self.root)!r})"

    def __call__(self, x):
        return evaluate(self, x)

    @property
    def is_constant(self):
        return not _has_var(self.root)


def as_expression(e):
    if isinstance(e, Expression):
        return e
    if isinstance(e, str):
        return parse(e)
    if isinstance(e, (int, float)):
        return Expression(Const(float(e)))
    return Expression(e)


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            raise ParseError(pos, f"unexpected character {source[pos]!r}")
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        text = m.group(kind)
        if kind == "name" and text != "x" and text not in FUNCTIONS:
            raise ParseError(start, f"unknown identifier {text!r}")
        tokens.append((kind, text, start))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, t, pos = self.peek()
        if t != text or kind == "eof":
            what = "end of input" if kind == "eof" else repr(t)
            raise ParseError(pos, f"expected {text!r}, found {what}")
        return self.take()

    def fail(self, expected):
        kind, t, pos = self.peek()
        what = "end of input" if kind == "eof" else repr(t)
        raise ParseError(pos, f"expected {expected}, found {what}")

    def parse(self):
        node = self.expr()
        kind, t, pos = self.peek()
        if kind != "eof":
            raise ParseError(pos, f"unexpected {t!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Unary("neg", self.power())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            pos = self.peek()[2]
            exponent = self.factor()
            if _has_var(exponent):
                raise ParseError(pos, "exponent must not depend on x")
            try:
                value = evaluate(Expression(exponent), 0.0)
            except DomainError as exc:
                raise ParseError(pos, f"invalid exponent: {exc}") from None
            return Pow(base, value)
        return base

    def atom(self):
        kind, text, pos = self.peek()
        if kind == "num":
            self.take()
            return Const(float(text))
        if kind == "name":
            self.take()
            if text == "x":
                return X
            self.expect("(")
            arg = self.expr()
            if self.peek()[1] != ")" or self.peek()[0] == "eof":
                self.fail(f"')' closing {text}(")
            self.take()
            return Unary(text, arg)
        if kind == "op" and text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("a number, 'x', a function or '('")


def parse(source: str) -> Expression:
    """Parse ``source`` into an :class:`Expression` or raise :class:`ParseError`."""
    return Expression(_Parser(source).parse())


def _has_var(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, Const):
        return False
    if isinstance(node, Unary):
        return _has_var(node.arg)
    if isinstance(node, Pow):
        return _has_var(node.base)
    return _has_var(node.left) or _has_var(node.right)


# --------------------------------------------------------------------------
# printing

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def format_number(v):
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _prec(node):
    if isinstance(node, Binary):
        return _PREC_ADD if node.op in "+-" else _PREC_MUL
    if isinstance(node, Unary):
        return _PREC_NEG if node.op == "neg" else _PREC_ATOM
    if isinstance(node, Pow):
        return _PREC_POW
    if isinstance(node, Const) and (node.value < 0 or math.copysign(1.0, node.value) < 0):
        return _PREC_NEG
    return _PREC_ATOM


def _wrap(node, min_prec):
    text = to_string(node)
    return f"({text})" if _prec(node) < min_prec else text


def to_string(node) -> str:
    if isinstance(node, Expression):
        node = node.root
    if isinstance(node, Const):
        return format_number(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Unary):
        if node.op == "neg":
            return "-" + _wrap(node.arg, _PREC_POW)
        return f"{node.op}({to_string(node.arg)})"
    if isinstance(node, Pow):
        return _wrap(node.base, _PREC_ATOM) + "^" + format_number(node.exponent)
    p = _prec(node)
    left = _wrap(node.left, p)
    right = _wrap(node.right, p + 1)
    if node.op in "+-":
        return f"{left} {node.op} {right}"
    return f"{left}{node.op}{right}"


# --------------------------------------------------------------------------
# evaluation through truncated series

def _first_bad(xs, mask):
    idx = np.flatnonzero(np.asarray(mask).ravel())
    if idx.size == 0:
        return None
    return float(np.asarray(xs).ravel()[idx[0]])


def _series(node, xs, s):
    """Normalized Taylor coefficients of ``node`` at each of ``xs``; shape (s+1, len(xs))."""
    if isinstance(node, Const):
        out = np.zeros((s + 1,) + xs.shape)
        out[0] = node.value
        return out
    if isinstance(node, Var):
        out = np.zeros((s + 1,) + xs.shape)
        out[0] = xs
        if s >= 1:
            out[1] = 1.0
        return out
    if isinstance(node, Binary):
        a = _series(node.left, xs, s)
        b = _series(node.right, xs, s)
        if node.op == "+":
            out = a + b
        elif node.op == "-":
            out = a - b
        elif node.op == "*":
            out = ser.mul(a, b)
        else:
            bad = b[0] == 0
            if np.any(bad):
                raise DomainError("division by zero", to_string(node), _first_bad(xs, bad))
            out = ser.div(a, b)
        return _check_finite(out, node, xs)
    if isinstance(node, Pow):
        u = _series(node.base, xs, s)
        p = node.exponent
        if p.is_integer() and p >= 0:
            return _check_finite(ser.power_int(u, int(p)), node, xs)
        zero = u[0] == 0
        if not p.is_integer():
            bad = u[0] < 0
            if np.any(bad):
                raise DomainError("negative base with non-integer exponent",
                                  to_string(node), _first_bad(xs, bad))
        if np.any(zero):
            if p < 0:
                raise DomainError("zero base with negative exponent",
                                  to_string(node), _first_bad(xs, zero))
            if s >= 1:
                raise DomainError("power not differentiable at a zero base",
                                  to_string(node), _first_bad(xs, zero))
            out = np.zeros_like(u)
            out[0] = np.power(u[0], p)
            return out
        return _check_finite(ser.power_real(u, p), node, xs)
    # Unary
    u = _series(node.arg, xs, s)
    op = node.op
    if op == "neg":
        return -u
    if op == "exp":
        return _check_finite(ser.exp(u), node, xs)
    if op == "log":
        bad = u[0] <= 0
        if np.any(bad):
            raise DomainError("log of a non-positive argument", to_string(node), _first_bad(xs, bad))
        return ser.log(u)
    if op == "sqrt":
        bad = u[0] < 0
        if np.any(bad):
            raise DomainError("sqrt of a negative argument", to_string(node), _first_bad(xs, bad))
        zero = u[0] == 0
        if s >= 1 and np.any(zero):
            raise DomainError("sqrt not differentiable at 0", to_string(node), _first_bad(xs, zero))
        return ser.sqrt(u)
    if op == "sin":
        return ser.sincos(u)[0]
    if op == "cos":
        return ser.sincos(u)[1]
    if op == "tanh":
        return ser.tanh(u)[0]
    if op == "abs":
        zero = u[0] == 0
        if s >= 1 and np.any(zero):
            raise DomainError("abs not differentiable at 0", to_string(node), _first_bad(xs, zero))
        out = np.sign(u[0]) * u
        out[0] = np.abs(u[0])
        return out
    if op == "sign":
        zero = u[0] == 0
        if np.any(zero):
            raise DomainError("sign evaluated at 0", to_string(node), _first_bad(xs, zero))
        out = np.zeros_like(u)
        out[0] = np.sign(u[0])
        return out
    raise ValueError(f"unknown operator {op!r}")


def _check_finite(out, node, xs):
    bad = ~np.isfinite(out[0])
    if np.any(bad):
        raise DomainError("overflow or undefined value", to_string(node), _first_bad(xs, bad))
    return out


def taylor_coefficients(e: Expression, xs, s: int):
    """Normalized Taylor coefficients of ``e`` at each point of ``xs``.

    Returns an array of shape ``(s + 1, len(xs))``.
    """
    xs = np.asarray(xs, dtype=float)
    with np.errstate(all="ignore"):
        return _series(as_expression(e).root, xs, s)


def evaluate_array(e: Expression, xs) -> np.ndarray:
    """Vectorized evaluation; raises :class:`DomainError` if any point is outside the domain."""
    xs = np.asarray(xs, dtype=float)
    return taylor_coefficients(e, xs.ravel(), 0)[0].reshape(xs.shape)


def evaluate(e: Expression, x: float) -> float:
    return float(evaluate_array(e, np.array([float(x)]))[0])


def evaluate_safe(e: Expression, xs) -> np.ndarray:
    """Like :func:`evaluate_array` but returns NaN at points outside the domain."""
    xs = np.asarray(xs, dtype=float)
    try:
        return evaluate_array(e, xs)
    except DomainError:
        pass
    out = np.empty(xs.shape)
    for i, x in enumerate(xs.ravel()):
        try:
            out.flat[i] = evaluate(e, x)
        except DomainError:
            out.flat[i] = np.nan
    return out


# --------------------------------------------------------------------------
# symbolic differentiation

ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(node, value=None):
    return isinstance(node, Const) and (value is None or node.value == value)


def _add(a, b):
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    return Binary("+", a, b)


def _sub(a, b):
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    return Binary("-", a, b)


def _neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def _mul(a, b):
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(b) and not _is_const(a):
        a, b = b, a
    if _is_const(a):
        if _is_const(b):
            return Const(a.value * b.value)
        if isinstance(b, Binary) and b.op == "*" and _is_const(b.left):
            return _mul(Const(a.value * b.left.value), b.right)
        if isinstance(b, Unary) and b.op == "neg":
            return _mul(Const(-a.value), b.arg)
    return Binary("*", a, b)


def _div(a, b):
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0:
        return Const(a.value / b.value)
    return Binary("/", a, b)


def _pow(base, p):
    if p == 0:
        return ONE
    if p == 1:
        return base
    if _is_const(base):
        return Const(base.value ** p)
    return Pow(base, float(p))


def _d(node):
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE
    if isinstance(node, Binary):
        a, b = node.left, node.right
        da, db = _d(a), _d(b)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _sub(da, db)
        if node.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if _is_const(b):
            return _div(da, b)
        return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, 2))
    if isinstance(node, Pow):
        p = node.exponent
        return _mul(_mul(Const(p), _pow(node.base, p - 1)), _d(node.base))
    u = node.arg
    du = _d(u)
    op = node.op
    if op == "neg":
        return _neg(du)
    if op == "sign":
        return ZERO
    if op == "abs":
        return _mul(du, Unary("sign", u))
    if op == "sqrt":
        return _div(_mul(Const(0.5), du), node)
    if op == "exp":
        return _mul(du, node)
    if op == "log":
        return _div(du, u)
    if op == "sin":
        return _mul(du, Unary("cos", u))
    if op == "cos":
        return _neg(_mul(du, Unary("sin", u)))
    if op == "tanh":
        return _mul(du, _sub(ONE, _pow(node, 2)))
    raise ValueError(f"unknown operator {op!r}")


def differentiate(e: Expression) -> Expression:
    """Symbolic derivative with constant folding and 0/1 elimination."""
    return Expression(_d(as_expression(e).root))


# --------------------------------------------------------------------------
# polynomials

def polynomial_coefficients(e: Expression) -> list:
    """Coefficients ``[c0, c1, ...]`` if ``e`` is a polynomial in x, else ValueError."""

    def poly(node):
        if isinstance(node, Const):
            return [node.value]
        if isinstance(node, Var):
            return [0.0, 1.0]
        if isinstance(node, Unary):
            if node.op == "neg":
                return [-c for c in poly(node.arg)]
            if not _has_var(node.arg):
                return [evaluate(Expression(node), 0.0)]
            raise ValueError(f"not a polynomial: {node.op}(...)")
        if isinstance(node, Pow):
            p = node.exponent
            if not _has_var(node.base):
                return [evaluate(Expression(node), 0.0)]
            if not (p.is_integer() and p >= 0):
                raise ValueError("not a polynomial: non-integer or negative power")
            out = [1.0]
            base = poly(node.base)
            for _ in range(int(p)):
                out = _pmul(out, base)
            return out
        a, b = poly(node.left), poly(node.right)
        if node.op == "+":
            return _padd(a, b)
        if node.op == "-":
            return _padd(a, [-c for c in b])
        if node.op == "*":
            return _pmul(a, b)
        if _has_var(node.right):
            raise ValueError("not a polynomial: division by a non-constant")
        d = b[0]
        return [c / d for c in a]

    return _ptrim(poly(as_expression(e).root))


def _padd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0.0) + (b[i] if i < len(b) else 0.0) for i in range(n)]


def _pmul(a, b):
    out = [0.0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _ptrim(c):
    while len(c) > 1 and c[-1] == 0:
        c = c[:-1]
    return c


def polynomial_expression(coeffs) -> Expression:
    node = ZERO
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        term = _mul(Const(float(c)), _pow(X, k))
        node = _add(node, term)
    return Expression(node)


def primitive(e: Expression) -> Expression:
    """Antiderivative (zero constant term) of a polynomial expression."""
    coeffs = polynomial_coefficients(e)
    integ = [0.0] + [c / (k + 1) for k, c in enumerate(coeffs)]
    return polynomial_expression(integ)
