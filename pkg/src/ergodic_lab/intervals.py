"""Open domains X and compact sampling sets K on the real line."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DomainInterval:
    """Open interval (lower, upper); either end may be infinite."""

    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"empty domain ({self.lower}, {self.upper})")

    @property
    def is_real_line(self):
        return math.isinf(self.lower) and math.isinf(self.upper)

    def contains(self, xs, margin=0.0):
        xs = np.asarray(xs, dtype=float)
        return np.isfinite(xs) & (xs > self.lower + margin) & (xs < self.upper - margin)

    def distance_to_boundary(self, a, b):
        return min(a - self.lower, self.upper - b)

    def __str__(self):
        return f"({_fmt(self.lower)}, {_fmt(self.upper)})"


REAL_LINE = DomainInterval()


@dataclass(frozen=True)
class CompactInterval:
    """Closed interval [a, b] sampled on ``grid_size`` equispaced points."""

    a: float
    b: float
    grid_size: int = 41

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError(f"need a <= b, got [{self.a}, {self.b}]")
        if self.grid_size < 2:
            raise ValueError("grid_size must be at least 2")

    def grid(self):
        return np.linspace(self.a, self.b, self.grid_size)

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    @property
    def magnitude(self):
        return max(abs(self.a), abs(self.b))

    def contains(self, xs):
        xs = np.asarray(xs, dtype=float)
        return (xs >= self.a) & (xs <= self.b)

    def as_list(self):
        return [self.a, self.b]

    def __str__(self):
        return f"[{_fmt(self.a)}, {_fmt(self.b)}]"


def _fmt(v):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def check_inside(K: CompactInterval, X: DomainInterval, margin=0.0):
    """True when K sits inside X at distance >= margin from its boundary."""
    return X.distance_to_boundary(K.a, K.b) >= margin and X.distance_to_boundary(K.a, K.b) > 0


def default_compact(X: DomainInterval, grid_size=41) -> CompactInterval:
    lo, hi = X.lower, X.upper
    if X.is_real_line:
        return CompactInterval(-1.0, 1.0, grid_size)
    if math.isinf(lo):
        return CompactInterval(hi - 3.0, hi - 1.0, grid_size)
    if math.isinf(hi):
        return CompactInterval(lo + 1.0, lo + 3.0, grid_size)
    w = hi - lo
    return CompactInterval(lo + 0.25 * w, hi - 0.25 * w, grid_size)


def compact_ladder(K: CompactInterval, X: DomainInterval, levels=3):
    """Nested compact sets K = K_0 ⊂ K_1 ⊂ ... obtained by doubling the radius.

    Each expansion moves a finite endpoint at most halfway to the boundary of X,
    so every rung keeps a positive distance to the boundary.
    """
    rungs = [K]
    c = K.center
    r = max(0.5 * (K.b - K.a), 0.5)
    a, b = K.a, K.b
    for i in range(1, levels):
        r *= 2.0
        na, nb = c - r, c + r
        if math.isfinite(X.lower):
            na = max(na, X.lower + 0.5 * (a - X.lower))
        if math.isfinite(X.upper):
            nb = min(nb, X.upper - 0.5 * (X.upper - b))
        a, b = min(na, a), max(nb, b)
        rungs.append(CompactInterval(a, b, K.grid_size))
    return rungs
