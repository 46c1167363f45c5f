"""Orbits, fixed points, stable-orbit detection, monotone inversion and involutions of interval maps."""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (ContractionError, ContractionWarning, ConvergenceError, DomainError,
                     ErgodicLabError, NoBracketError, OrbitEscapeError, PreconditionError)
from .expr import as_expression, evaluate_array, evaluate_safe, taylor_coefficients
from .intervals import REAL_LINE, CompactInterval, DomainInterval, check_inside
from .jets import invert_raw, lift_raw

__all__ = [
    "CompactInterval", "DomainInterval", "REAL_LINE", "OrbitReport", "FixedPoint",
    "FixedPointSet", "InverseMap", "orbit", "stable_orbits", "fixed_points",
    "invert_monotone", "involution_from_even", "involution_values", "involution_defect",
    "periodic_defect", "derivative_sign", "default_margin",
]

ESCAPE_BOUND = 1e8
_EPS = np.finfo(float).eps


def _vector_map(phi):
    """Vectorized map returning NaN where the map is undefined."""
    if callable(phi) and not hasattr(phi, "root"):
        return phi
    e = as_expression(phi)
    return lambda xs: evaluate_safe(e, xs)


def orbit(phi, x0: float, n: int, domain: DomainInterval = REAL_LINE) -> list:
    """[x0, φ(x0), ..., φ^n(x0)]; raises OrbitEscapeError (carrying the partial orbit) on escape."""
    f = _vector_map(phi)
    if not domain.contains(x0):
        raise OrbitEscapeError(0, float(x0), x0, reason="starts outside the domain")
    out = [float(x0)]
    x = np.array([float(x0)])
    for m in range(1, n + 1):
        x = f(x)
        v = float(x[0])
        if not domain.contains(v):
            err = OrbitEscapeError(m, v, x0)
            err.orbit = out
            raise err
        out.append(v)
    return out


def default_margin(K: CompactInterval, X: DomainInterval) -> float:
    if X.is_real_line:
        return 1e-6 * (1.0 + K.magnitude)
    return 0.01 * X.distance_to_boundary(K.a, K.b)


@dataclass
class OrbitReport:
    seed_set: CompactInterval
    hull_per_step: list
    running_union: tuple
    verdict: str  # stable-evidence | escape-detected | inconclusive
    escape_step: int = None
    witness: dict = None
    margin: float = 0.0
    bound: float = ESCAPE_BOUND

    @property
    def stable(self):
        return self.verdict == "stable-evidence"

    @property
    def escaped(self):
        return self.verdict == "escape-detected"

    def to_dict(self):
        return {
            "K": self.seed_set.as_list(),
            "verdict": self.verdict,
            "steps": len(self.hull_per_step) - 1,
            "L": list(self.running_union),
            "escape_step": self.escape_step,
            "witness": self.witness,
        }


def stable_orbits(phi, K: CompactInterval, X: DomainInterval = REAL_LINE, N: int = 200,
                  margin: float = None, bound: float = ESCAPE_BOUND) -> OrbitReport:
    """Finite-horizon evidence for the stable-orbit property on one compact set K.

    Every grid point of K is iterated N times. The verdict is
    ``escape-detected`` as soon as an iterate leaves X shrunk by ``margin``,
    exceeds ``bound`` in magnitude or is undefined; ``stable-evidence`` if the
    running hull did not move (relative 1e-12) during the final ceil(N/2)
    steps; ``inconclusive`` otherwise.
    """
    if margin is None:
        margin = default_margin(K, X)
    if not check_inside(K, X, margin):
        raise PreconditionError(f"K={K} is not inside X={X} with margin {margin}")
    f = _vector_map(phi)
    seeds = K.grid()
    pts = seeds.copy()
    lo, hi = float(pts.min()), float(pts.max())
    hulls = [(lo, hi)]
    unions = [(lo, hi)]
    for n in range(1, N + 1):
        try:
            pts = np.asarray(f(pts), dtype=float)
        except ErgodicLabError:
            pts = np.full_like(pts, np.nan)
        bad = ~X.contains(pts, margin) | (np.abs(pts) > bound)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            value = float(pts[i])
            if not np.isfinite(value):
                reason = "iterate undefined"
            elif abs(value) > bound:
                reason = f"|iterate| exceeds {bound:g}"
            else:
                reason = "iterate left X minus margin"
            witness = {"seed": float(seeds[i]), "step": n, "value": value, "reason": reason}
            return OrbitReport(K, hulls, unions[-1], "escape-detected", n, witness, margin, bound)
        h = (float(pts.min()), float(pts.max()))
        hulls.append(h)
        lo, hi = min(lo, h[0]), max(hi, h[1])
        unions.append((lo, hi))
    ref = unions[N - math.ceil(N / 2)]
    scale = 1.0 + max(abs(lo), abs(hi))
    flat = abs(ref[0] - lo) <= 1e-12 * scale and abs(ref[1] - hi) <= 1e-12 * scale
    verdict = "stable-evidence" if flat else "inconclusive"
    return OrbitReport(K, hulls, (lo, hi), verdict, None, None, margin, bound)


# -- fixed points -----------------------------------------------------------

@dataclass(frozen=True)
class FixedPoint:
    x: float
    residual: float
    bracket: tuple
    tangential: bool = False


@dataclass
class FixedPointSet:
    points: list = field(default_factory=list)

    @property
    def values(self):
        return [p.x for p in self.points]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def to_dict(self):
        return [{"x": p.x, "residual": p.residual, "bracket": list(p.bracket),
                 "tangential": p.tangential} for p in self.points]


def _bisect_root(g, lo, hi, glo):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo <= 4 * _EPS * (1.0 + abs(mid)):
            break
    return 0.5 * (lo + hi)


def fixed_points(phi, search: CompactInterval, tol: float = 1e-10) -> FixedPointSet:
    """Fixed points of φ on ``search``.

    Sign changes of φ(x) - x between grid points are refined by bisection.
    Grid points where |φ(x) - x| < tol without a sign change are reported as
    tangential (flagged) after a short Newton polish of (φ(x) - x)' = 0.
    """
    e = as_expression(phi)
    xs = search.grid()
    gs = evaluate_safe(e, xs) - xs

    def g(x):
        return float(evaluate_safe(e, np.array([x]))[0] - x)

    found = []
    n = len(xs)
    for i in range(n - 1):
        a, b = gs[i], gs[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b < 0:
            r = _bisect_root(g, xs[i], xs[i + 1], a)
            found.append(FixedPoint(float(r), abs(g(r)), (float(xs[i]), float(xs[i + 1])), False))
    for i in range(n):
        gi = gs[i]
        if not np.isfinite(gi) or abs(gi) >= tol:
            continue
        left = gs[i - 1] if i > 0 else np.nan
        right = gs[i + 1] if i < n - 1 else np.nan
        if gi == 0 and np.isfinite(left) and np.isfinite(right) and left * right < 0:
            found.append(FixedPoint(float(xs[i]), 0.0, (float(xs[i]), float(xs[i])), False))
            continue
        if any(abs(p.x - xs[i]) <= (xs[1] - xs[0]) for p in found if not p.tangential):
            continue
        lo = float(xs[max(i - 1, 0)])
        hi = float(xs[min(i + 1, n - 1)])
        x = _polish_tangential(e, float(xs[i]), lo, hi)
        found.append(FixedPoint(x, abs(g(x)), (lo, hi), True))
    found.sort(key=lambda p: p.x)
    unique = []
    for p in found:
        if unique and p.x - unique[-1].x <= 1e-12 * (1.0 + abs(p.x)):
            continue
        if p.residual < tol or not p.tangential:
            unique.append(p)
    return FixedPointSet(unique)


def _polish_tangential(e, x, lo, hi):
    best = x
    best_res = abs(float(evaluate_safe(e, np.array([x]))[0]) - x)
    for _ in range(8):
        try:
            c = taylor_coefficients(e, np.array([best]), 2)[:, 0]
        except DomainError:
            break
        g1 = c[1] - 1.0
        g2 = 2.0 * c[2]
        if g2 == 0 or not np.isfinite(g1 / g2):
            break
        cand = best - g1 / g2
        if not lo <= cand <= hi:
            break
        res = abs(float(evaluate_safe(e, np.array([cand]))[0]) - cand)
        if not res <= best_res:
            break
        best, best_res = cand, res
        if g1 == 0:
            break
    return best


# -- monotone inversion ---------------------------------------------------

def derivative_sign(phi, xs) -> int:
    """+1 or -1 if φ' has that strict sign at every sample, else 0."""
    d = taylor_coefficients(as_expression(phi), np.asarray(xs, dtype=float), 1)[1]
    if np.all(d > 0):
        return 1
    if np.all(d < 0):
        return -1
    return 0


def _value_and_slope(e, xs):
    try:
        c = taylor_coefficients(e, xs, 1)
        return c[0], c[1]
    except DomainError:
        return evaluate_safe(e, xs), np.full(xs.shape, np.nan)


def _solve_monotone(e, ys, lo, hi, tol, max_iter=200):
    """Safeguarded Newton for φ(x) = y on per-point brackets [lo, hi]."""
    ys = np.asarray(ys, dtype=float)
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = evaluate_safe(e, lo) - ys
    fhi = evaluate_safe(e, hi) - ys
    x = np.where(flo == 0, lo, np.where(fhi == 0, hi, 0.5 * (lo + hi)))
    done = (flo == 0) | (fhi == 0)
    increasing = fhi > flo
    for _ in range(max_iter):
        if np.all(done):
            break
        act = ~done
        xa = x[act]
        fv, dv = _value_and_slope(e, xa)
        f = fv - ys[act]
        width = hi[act] - lo[act]
        conv = (np.abs(f) <= tol) | (width <= 4 * _EPS * (np.abs(xa) + 1e-300)) | (f == 0)
        move_lo = (f < 0) == increasing[act]
        new_lo = np.where(move_lo, xa, lo[act])
        new_hi = np.where(move_lo, hi[act], xa)
        with np.errstate(all="ignore"):
            newton = xa - f / dv
        ok = np.isfinite(newton) & (newton > new_lo) & (newton < new_hi)
        nxt = np.where(ok, newton, 0.5 * (new_lo + new_hi))
        lo[act] = new_lo
        hi[act] = new_hi
        x[act] = np.where(conv, xa, nxt)
        idx = np.flatnonzero(act)
        done[idx[conv]] = True
    if not np.all(done):
        raise ConvergenceError("monotone inversion did not converge")
    return x


def invert_monotone(phi, y: float, bracket: CompactInterval, tol: float = 1e-12) -> float:
    """x in ``bracket`` with |φ(x) - y| <= tol (bisection safeguarded Newton)."""
    e = as_expression(phi)
    if derivative_sign(e, bracket.grid()) == 0:
        raise PreconditionError(f"{e} is not strictly monotone on {bracket}")
    fa, fb = evaluate_array(e, np.array([bracket.a, bracket.b]))
    if not min(fa, fb) <= y <= max(fa, fb):
        raise NoBracketError(f"{y!r} is not attained by {e} on {bracket} "
                             f"(range [{min(fa, fb)!r}, {max(fa, fb)!r}])")
    return float(_solve_monotone(e, np.array([y]), [bracket.a], [bracket.b], tol)[0])


class InverseMap:
    """Numerical inverse of a monotone bijection φ of X, vectorized over points."""

    def __init__(self, phi, domain: DomainInterval = REAL_LINE, tol: float = 1e-13,
                 max_expansions: int = 90):
        self.phi = as_expression(phi)
        self.domain = domain
        self.tol = tol
        self.max_expansions = max_expansions

    def _brackets(self, ys):
        X = self.domain
        lo_b, hi_b = X.lower, X.upper
        x0 = ys.copy()
        if not np.isinf(lo_b) and not np.isinf(hi_b):
            mid = 0.5 * (lo_b + hi_b)
        else:
            mid = 0.0 if X.is_real_line else (lo_b + 1.0 if np.isinf(hi_b) else hi_b - 1.0)
        x0 = np.where(X.contains(x0), x0, mid)
        d = 1.0 + np.abs(x0)
        f0 = evaluate_safe(self.phi, x0) - ys
        lo = np.where(f0 == 0, x0, np.nan)
        hi = lo.copy()
        found = f0 == 0
        for k in range(self.max_expansions):
            if np.all(found):
                break
            act = ~found
            step = d[act] * 2.0 ** k
            if np.isinf(lo_b):
                cl = x0[act] - step
            else:
                cl = lo_b + (x0[act] - lo_b) * 2.0 ** (-k - 1)
            if np.isinf(hi_b):
                ch = x0[act] + step
            else:
                ch = hi_b - (hi_b - x0[act]) * 2.0 ** (-k - 1)
            fl = evaluate_safe(self.phi, cl) - ys[act]
            fh = evaluate_safe(self.phi, ch) - ys[act]
            hit = np.isfinite(fl) & np.isfinite(fh) & (fl * fh <= 0)
            idx = np.flatnonzero(act)[hit]
            lo[idx] = cl[hit]
            hi[idx] = ch[hit]
            found[idx] = True
        return lo, hi, found

    def values(self, ys, strict: bool = True):
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        out = np.full(ys.shape, np.nan)
        fin = np.isfinite(ys)
        if not np.any(fin):
            if strict:
                raise NoBracketError("cannot invert non-finite values")
            return out
        lo, hi, found = self._brackets(ys[fin])
        if strict and not np.all(found):
            bad = ys[fin][~found][0]
            raise NoBracketError(f"{bad!r} is not in the range of {self.phi} on {self.domain}")
        sub = np.full(lo.shape, np.nan)
        if np.any(found):
            sub[found] = _solve_monotone(self.phi, ys[fin][found], lo[found], hi[found], self.tol)
        out[fin] = sub
        if strict and not np.all(fin):
            raise NoBracketError("cannot invert non-finite values")
        return out

    def __call__(self, ys):
        return self.values(ys, strict=False)

    def jet(self, ys, s):
        """Raw derivatives (order s) of φ^{-1} at each of ``ys``."""
        xs = self.values(ys, strict=True)
        return invert_raw(lift_raw(self.phi, xs, s), xs)


# -- involutions ----------------------------------------------------------

def _contraction_check(f, window, strict):
    ts = np.linspace(-window, window, 4001)
    c = taylor_coefficients(f, ts, 1)
    sup = float(np.max(np.abs(c[1])))
    asym = float(np.max(np.abs(c[0] - evaluate_array(f, -ts))))
    if asym > 1e-9 * (1.0 + float(np.max(np.abs(c[0])))):
        warnings.warn(f"{f} does not look even on [-{window:g}, {window:g}] "
                      f"(max |f(t) - f(-t)| = {asym:.3g})", ContractionWarning, stacklevel=3)
    if sup >= 1.0:
        msg = (f"contraction violated: sampled sup |f'| = {sup:.6g} >= 1 "
               f"on [-{window:g}, {window:g}]")
        if strict:
            raise ContractionError(msg)
        warnings.warn(msg, ContractionWarning, stacklevel=3)
    return sup


def involution_values(f, xs, tol: float = 1e-12, strict: bool = False,
                      max_iter: int = 2000, window: float = None) -> np.ndarray:
    """Solve x + y = f(x - y) for y at every x in ``xs``.

    For even f with |f'| <= a < 1 the map y -> f(x - y) - x is a contraction
    with rate a; the fixed point is polished by Newton's method.
    """
    f = as_expression(f)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if window is None:
        window = max(10.0, 4.0 * float(np.max(np.abs(xs))) + 10.0)
    _contraction_check(f, window, strict)
    y = evaluate_array(f, xs) - xs
    for _ in range(max_iter):
        y_new = evaluate_safe(f, xs - y) - xs
        if not np.all(np.isfinite(y_new)):
            raise ConvergenceError("fixed-point iteration for x + y = f(x - y) diverged")
        change = np.max(np.abs(y_new - y) / (1.0 + np.abs(y_new)))
        y = y_new
        if change <= 1e-14:
            break
    else:
        raise ConvergenceError(f"no convergence after {max_iter} iterations")
    for _ in range(4):
        c = taylor_coefficients(f, xs - y, 1)
        F = xs + y - c[0]
        dF = 1.0 + c[1]
        y = y - F / dF
    resid = np.abs(xs + y - evaluate_array(f, xs - y))
    if np.any(resid > tol * (1.0 + np.abs(xs) + np.abs(y))):
        raise ConvergenceError(f"Newton polish left residual {float(resid.max()):.3g}")
    return y


def involution_from_even(f, x: float, tol: float = 1e-12, strict: bool = False) -> float:
    """The unique y with x + y = f(x - y)."""
    return float(involution_values(f, [x], tol=tol, strict=strict)[0])


def periodic_defect(phi, K: CompactInterval, p: int, domain: DomainInterval = REAL_LINE) -> float:
    """max over the grid of K of |φ^p(x) - x|."""
    e = as_expression(phi)
    xs = K.grid()
    ys = xs
    for m in range(1, p + 1):
        ys = evaluate_array(e, ys)
        if not np.all(domain.contains(ys)):
            i = int(np.flatnonzero(~domain.contains(ys))[0])
            raise OrbitEscapeError(m, float(ys[i]), float(xs[i]))
    return float(np.max(np.abs(ys - xs)))


def involution_defect(phi, K: CompactInterval, domain: DomainInterval = REAL_LINE) -> float:
    """max over the grid of K of |φ(φ(x)) - x|."""
    return periodic_defect(phi, K, 2, domain)
