"""Truncated power-series kernels.

Arrays have shape ``(s + 1, *batch)``; row ``k`` holds the normalized Taylor
coefficient ``f^(k)(x0) / k!``. Every kernel broadcasts over the batch axes.
Row 0 of each result is computed with the same numpy primitive that a plain
evaluation would use, so values agree bit-for-bit with order-0 evaluation.
"""

import math

import numpy as np

FACTORIALS = np.array([math.factorial(k) for k in range(21)], dtype=float)


def to_raw(c):
    f = FACTORIALS[: c.shape[0]]
    return c * f.reshape((-1,) + (1,) * (c.ndim - 1))


def to_normalized(d):
    f = FACTORIALS[: d.shape[0]]
    return d / f.reshape((-1,) + (1,) * (d.ndim - 1))


def mul(a, b):
    s = a.shape[0] - 1
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    for k in range(s + 1):
        acc = a[0] * b[k]
        for i in range(1, k + 1):
            acc = acc + a[i] * b[k - i]
        out[k] = acc
    return out


def div(a, b):
    """Series of a/b; caller guarantees b[0] != 0."""
    s = a.shape[0] - 1
    q = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    q[0] = a[0] / b[0]
    for k in range(1, s + 1):
        acc = a[k]
        for i in range(1, k + 1):
            acc = acc - b[i] * q[k - i]
        q[k] = acc / b[0]
    return q


def exp(u):
    s = u.shape[0] - 1
    e = np.empty_like(u)
    e[0] = np.exp(u[0])
    for k in range(1, s + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc = acc + i * u[i] * e[k - i]
        e[k] = acc / k
    return e


def log(u):
    """Caller guarantees u[0] > 0."""
    s = u.shape[0] - 1
    out = np.empty_like(u)
    out[0] = np.log(u[0])
    for k in range(1, s + 1):
        acc = 0.0
        for i in range(1, k):
            acc = acc + i * out[i] * u[k - i]
        out[k] = (u[k] - acc / k) / u[0]
    return out


def sqrt(u):
    """Caller guarantees u[0] >= 0, and u[0] > 0 whenever s >= 1."""
    s = u.shape[0] - 1
    out = np.empty_like(u)
    out[0] = np.sqrt(u[0])
    for k in range(1, s + 1):
        acc = u[k]
        for i in range(1, k):
            acc = acc - out[i] * out[k - i]
        out[k] = acc / (2.0 * out[0])
    return out


def power_int(u, p):
    """u**p for an integer p >= 0 by repeated squaring."""
    result = np.zeros_like(u)
    result[0] = 1.0
    base = u
    first = True
    while p:
        if p & 1:
            result = base.copy() if first else mul(result, base)
            first = False
        p >>= 1
        if p:
            base = mul(base, base)
    return result


def power_real(u, p):
    """u**p via the J.C.P. Miller recurrence; caller guarantees u[0] != 0."""
    s = u.shape[0] - 1
    y = np.empty_like(u)
    y[0] = np.power(u[0], p)
    for k in range(1, s + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc = acc + ((p + 1.0) * i - k) * u[i] * y[k - i]
        y[k] = acc / (k * u[0])
    return y


def sincos(u):
    s = u.shape[0] - 1
    sn = np.empty_like(u)
    cs = np.empty_like(u)
    sn[0] = np.sin(u[0])
    cs[0] = np.cos(u[0])
    for k in range(1, s + 1):
        a = 0.0
        b = 0.0
        for i in range(1, k + 1):
            a = a + i * u[i] * cs[k - i]
            b = b + i * u[i] * sn[k - i]
        sn[k] = a / k
        cs[k] = -b / k
    return sn, cs


def tanh(u):
    s = u.shape[0] - 1
    t = np.empty_like(u)
    v = np.empty_like(u)  # 1 - t**2
    t[0] = np.tanh(u[0])
    v[0] = 1.0 - t[0] * t[0]
    for k in range(1, s + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc = acc + i * u[i] * v[k - i]
        t[k] = acc / k
        sq = 0.0
        for i in range(0, k + 1):
            sq = sq + t[i] * t[k - i]
        v[k] = -sq
    return t, v


def compose(a, b):
    """Series of F(G(x)) from the series a of F at G(x0) and b of G at x0."""
    s = a.shape[0] - 1
    delta = np.array(b, copy=True)
    delta[0] = 0.0
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=np.result_type(a, b))
    out[0] = a[0]
    power = delta
    for k in range(1, s + 1):
        # power = delta**k has zero rows below k
        out[k:] = out[k:] + a[k] * power[k:]
        if k < s:
            power = mul(power, delta)
    return out


def invert(a, x0):
    """Series of the inverse function H of F at F(x0), with a the series of F at x0.

    Requires a[1] != 0. Coefficients are solved order by order from F(H(y)) = y.
    """
    s = a.shape[0] - 1
    h = np.zeros_like(a)
    h[0] = x0
    if s == 0:
        return h
    h[1] = 1.0 / a[1]
    for k in range(2, s + 1):
        trial = np.array(h[: k + 1], copy=True)
        trial[0] = 0.0
        fa = np.array(a[: k + 1], copy=True)
        ck = compose(fa, trial)[k]
        h[k] = -ck / a[1]
    return h
