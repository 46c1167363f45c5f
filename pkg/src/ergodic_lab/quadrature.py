"""Vectorized adaptive Simpson quadrature."""

import numpy as np

from .errors import ConvergenceError


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-8, atol: float = 0.0,
                     panels: int = 16, max_depth: int = 40):
    """Integrate a vectorized function ``f`` over [a, b].

    All active panels are refined together, so each level costs one call of
    ``f`` on an array. A panel is accepted when the Richardson error estimate
    is below its share of ``max(atol, rtol * ∫|f|)``; the accepted value
    includes the Richardson correction.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    vals = np.asarray(f(np.concatenate([lo, mid, hi])))
    flo, fmid, fhi = vals[:panels], vals[panels:2 * panels], vals[2 * panels:]
    if not np.all(np.isfinite(vals)):
        raise ConvergenceError("integrand is not finite on the quadrature interval")
    width = hi - lo
    whole = width / 6.0 * (flo + 4.0 * fmid + fhi)
    scale = float(np.sum(width / 6.0 * (np.abs(flo) + 4.0 * np.abs(fmid) + np.abs(fhi))))
    budget = max(atol, rtol * scale, 1e-300)
    eps = np.full(panels, budget * width / (b - a))
    total = 0.0
    for _ in range(max_depth):
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        k = lo.size
        v = np.asarray(f(np.concatenate([lm, rm])))
        if not np.all(np.isfinite(v)):
            raise ConvergenceError("integrand is not finite on the quadrature interval")
        flm, frm = v[:k], v[k:]
        half = 0.5 * (hi - lo)
        left = half / 6.0 * (flo + 4.0 * flm + fmid)
        right = half / 6.0 * (fmid + 4.0 * frm + fhi)
        err = left + right - whole
        ok = np.abs(err) <= 15.0 * eps
        total += np.sum((left + right + err / 15.0)[ok])
        keep = ~ok
        if not np.any(keep):
            return sign * total
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        new_mid = np.concatenate([lm[keep], rm[keep]])
        flo, fhi, fmid_new = (np.concatenate([flo[keep], fmid[keep]]),
                              np.concatenate([fmid[keep], fhi[keep]]),
                              np.concatenate([flm[keep], frm[keep]]))
        whole = np.concatenate([left[keep], right[keep]])
        eps = np.concatenate([eps[keep], eps[keep]]) * 0.5
        mid, fmid = new_mid, fmid_new
    raise ConvergenceError(f"adaptive Simpson did not reach rtol={rtol} within depth {max_depth}")
