"""Partial exponential Bell polynomials, Faà di Bruno assembly, and a set-partition oracle."""

from dataclasses import dataclass
from numbers import Integral

import numpy as np

PASCAL_ROWS = 64


def _pascal(rows):
    table = [[1]]
    for n in range(1, rows):
        prev = table[-1]
        table.append([1] + [prev[k - 1] + prev[k] for k in range(1, n)] + [1])
    return table


PASCAL = _pascal(PASCAL_ROWS)


def binomial(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    if n >= PASCAL_ROWS:
        raise ValueError(f"binomial table holds {PASCAL_ROWS} rows, asked for n={n}")
    return PASCAL[n][k]


@dataclass(frozen=True)
class BellTable:
    """``values[r][j] = B_{r,j}(y_1, ..., y_{r-j+1})`` for 0 <= j <= r <= max_r.

    Entries are ints, floats or numpy arrays depending on the argument type.
    ``values[0][0] == 1`` and ``values[r][0] == 0`` for r >= 1.
    """

    max_r: int
    values: tuple

    def __getitem__(self, rj):
        r, j = rj
        return self.values[r][j]


def _all_integers(y):
    return all(isinstance(v, Integral) for v in y)


def bell_table(y, max_r: int) -> BellTable:
    """Triangular table of partial Bell polynomials by the standard recurrence

    B_{r,j} = sum_{i=1}^{r-j+1} C(r-1, i-1) * y_i * B_{r-i, j-1}.

    ``y[0]`` is y_1. Integer arguments stay in exact integer arithmetic;
    array arguments broadcast elementwise.
    """
    if max_r < 0:
        raise ValueError("max_r must be nonnegative")
    y = list(y)
    if max_r >= 1 and len(y) < max_r:
        raise ValueError(f"need {max_r} arguments y_1..y_{max_r}, got {len(y)}")
    exact = _all_integers(y)
    if exact:
        y = [int(v) for v in y]
        one, zero = 1, 0
    else:
        y = [v if isinstance(v, np.ndarray) else float(v) for v in y]
        one, zero = 1.0, 0.0
    rows = [[one]]
    for r in range(1, max_r + 1):
        row = [zero]
        for j in range(1, r + 1):
            acc = zero
            for i in range(1, r - j + 2):
                acc = acc + PASCAL[r - 1][i - 1] * y[i - 1] * rows[r - i][j - 1]
            row.append(acc)
        rows.append(row)
    return BellTable(max_r, tuple(tuple(row) for row in rows))


def bell_partial(r: int, j: int, y):
    """Partial exponential Bell polynomial B_{r,j}(y_1, ..., y_{r-j+1})."""
    if not (0 <= j <= r):
        raise ValueError(f"need 0 <= j <= r, got r={r}, j={j}")
    y = list(y)
    if r == 0:
        return 1 if _all_integers(y) else 1.0
    if j == 0:
        return 0 if _all_integers(y) else 0.0
    if len(y) < r - j + 1:
        raise ValueError(f"B_{{{r},{j}}} needs {r - j + 1} arguments, got {len(y)}")
    # Only y_1..y_{r-j+1} enter; pad so the table recurrence can index freely.
    need = r - j + 1
    args = y[:need]
    pad = 0 if _all_integers(args) else 0.0
    args = args + [pad] * (r - need)
    return bell_table(args, r)[r, j]


def restricted_growth_strings(n: int):
    """Yield every restricted growth string of length n (one per set partition of {1..n})."""
    if n == 0:
        yield ()
        return
    a = [0] * n
    while True:
        yield tuple(a)
        # find rightmost position that can be incremented
        i = n - 1
        while i > 0:
            if a[i] <= max(a[:i]):
                break
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for k in range(i + 1, n):
            a[k] = 0


def stirling_oracle(n: int, k: int) -> int:
    """S(n, k) by explicit enumeration of set partitions of {1..n}."""
    if not (0 <= k <= n <= 12):
        raise ValueError(f"need 0 <= k <= n <= 12, got n={n}, k={k}")
    if n == 0:
        return 1 if k == 0 else 0
    return sum(1 for a in restricted_growth_strings(n) if max(a) + 1 == k)


def faa_di_bruno(f_derivs, g_derivs, s: int):
    """s-th derivative of f∘g from raw derivatives.

    ``f_derivs[k] = f^(k)(g(x))`` and ``g_derivs[k] = g^(k)(x)`` for k = 0..s.
    """
    if len(f_derivs) != s + 1 or len(g_derivs) != s + 1:
        raise ValueError(f"expected {s + 1} derivatives, got {len(f_derivs)} and {len(g_derivs)}")
    if s == 0:
        return f_derivs[0]
    table = bell_table(list(g_derivs[1:]), s)
    total = 0.0
    for j in range(1, s + 1):
        total = total + f_derivs[j] * table[s, j]
    return total
