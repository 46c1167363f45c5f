"""Truncated Taylor ("jet") arithmetic at a point.

A jet stores raw derivatives: ``derivs[j] = f^(j)(x)``, not divided by ``j!``.
The ``*_raw`` helpers operate on arrays of shape ``(s + 1, *batch)`` so that a
whole sampling grid moves through the same code path as a single point.
"""

from dataclasses import dataclass

import numpy as np

from . import _series as ser
from .combinatorics import PASCAL
from .errors import DomainError, JetMismatchError, OrbitEscapeError, OrderCapError
from .expr import as_expression, taylor_coefficients
from .intervals import REAL_LINE

DEFAULT_ORDER_CAP = 8
MAX_ORDER_CAP = 12


def check_order(s, cap=DEFAULT_ORDER_CAP):
    if cap > MAX_ORDER_CAP:
        raise OrderCapError(f"order cap {cap} exceeds the hard limit {MAX_ORDER_CAP}")
    if not 0 <= s <= cap:
        raise OrderCapError(f"jet order {s} outside 0..{cap}")


@dataclass(frozen=True, eq=False)
class Jet:
    base_point: float
    derivs: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.derivs, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("derivs must be a non-empty vector")
        if not np.all(np.isfinite(d)):
            raise ValueError("jet entries must be finite")
        object.__setattr__(self, "derivs", d)

    @property
    def order(self):
        return self.derivs.size - 1

    @property
    def value(self):
        return float(self.derivs[0])

    def __repr__(self):
        return f"Jet(base_point={self.base_point!r}, derivs={self.derivs.tolist()!r})"


# -- batched kernels on raw derivative arrays ------------------------------

def lift_raw(e, xs, s):
    return ser.to_raw(taylor_coefficients(e, xs, s))


def identity_raw(xs, s):
    xs = np.asarray(xs, dtype=float)
    out = np.zeros((s + 1,) + xs.shape)
    out[0] = xs
    if s >= 1:
        out[1] = 1.0
    return out


def constant_raw(value, shape, s):
    out = np.zeros((s + 1,) + tuple(shape), dtype=np.result_type(value, float))
    out[0] = value
    return out


def compose_raw(outer, inner):
    """Raw derivatives of F∘G given those of F at G(x) and of G at x."""
    a = ser.to_normalized(outer)
    b = ser.to_normalized(inner)
    return ser.to_raw(ser.compose(a, b))


def multiply_raw(a, b):
    """Leibniz rule: (ab)^(k) = sum_r C(k, r) a^(k-r) b^(r)."""
    s = a.shape[0] - 1
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    for k in range(s + 1):
        row = PASCAL[k]
        acc = a[k] * b[0]
        for r in range(1, k + 1):
            acc = acc + row[r] * a[k - r] * b[r]
        out[k] = acc
    return out


def reciprocal_raw(a):
    one = np.zeros_like(a)
    one[0] = 1.0
    return ser.to_raw(ser.div(one, ser.to_normalized(a)))


def invert_raw(a, x0):
    """Raw derivatives of the inverse function at F(x0) from those of F at x0."""
    if np.any(a[1] == 0):
        raise DomainError("inverse function has no jet where the derivative vanishes")
    return ser.to_raw(ser.invert(ser.to_normalized(a), x0))


# -- public jet API ---------------------------------------------------------

def jet_lift(e, x: float, s: int, cap: int = DEFAULT_ORDER_CAP) -> Jet:
    """Jet of the expression ``e`` at ``x`` up to order ``s``."""
    check_order(s, cap)
    d = lift_raw(as_expression(e), np.array([float(x)]), s)[:, 0]
    return Jet(float(x), d)


def _check_pair(a, b, what):
    if a.order != b.order:
        raise JetMismatchError(f"{what}: orders differ ({a.order} vs {b.order})")


def jet_compose(outer: Jet, inner: Jet) -> Jet:
    """Jet of outer∘inner at ``inner.base_point``; ``outer`` must sit at inner's value."""
    _check_pair(outer, inner, "compose")
    g = inner.derivs[0]
    if abs(outer.base_point - g) > 1e-9 * (1.0 + abs(g)):
        raise JetMismatchError(
            f"compose: outer jet is at {outer.base_point!r} but inner value is {g!r}")
    return Jet(inner.base_point, compose_raw(outer.derivs, inner.derivs))


def jet_multiply(a: Jet, b: Jet) -> Jet:
    _check_pair(a, b, "multiply")
    if a.base_point != b.base_point:
        raise JetMismatchError(f"multiply: base points {a.base_point!r} and {b.base_point!r}")
    return Jet(a.base_point, multiply_raw(a.derivs, b.derivs))


def jet_invert(j: Jet) -> Jet:
    """Jet of the local inverse function, based at ``j.value``."""
    return Jet(j.value, invert_raw(j.derivs, j.base_point))


def iterate_jets(phi, x: float, n: int, s: int, domain=REAL_LINE,
                 cap: int = DEFAULT_ORDER_CAP) -> list:
    """Jets of φ^m at ``x`` for m = 0..n.

    Each step lifts φ at the current orbit point and composes it onto the
    accumulated jet, so no symbolic iterate is ever built.
    """
    check_order(s, cap)
    phi = as_expression(phi)
    acc = identity_raw(np.array([float(x)]), s)
    jets = [Jet(float(x), acc[:, 0])]
    for m in range(1, n + 1):
        point = acc[0]
        try:
            step = lift_raw(phi, point, s)
        except DomainError as exc:
            raise OrbitEscapeError(m, float(point[0]), x, reason=f"left the map's domain ({exc})") from exc
        acc = compose_raw(step, acc)
        if not domain.contains(acc[0])[0]:
            raise OrbitEscapeError(m, float(acc[0, 0]), x)
        if not np.all(np.isfinite(acc)):
            raise OrbitEscapeError(m, float(acc[0, 0]), x, reason="produced non-finite derivatives")
        jets.append(Jet(float(x), acc[:, 0]))
    return jets
