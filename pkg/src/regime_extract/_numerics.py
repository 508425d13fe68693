"""Bracketed bisection and vector-node adaptive Simpson quadrature."""
import numpy as np

from .errors import NoBracket, QuadratureNotConverged


def bisect(fun, lo, hi, xtol=1e-12, max_iter=200):
    """Root of a scalar function on [lo, hi] by plain bisection.

    Requires a sign change on the bracket; raises NoBracket otherwise.
    """
    flo = fun(lo)
    fhi = fun(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo*fhi > 0:
        raise NoBracket(f"no sign change on [{lo}, {hi}] ({flo}, {fhi})")
    for _ in range(max_iter):
        mid = 0.5*(lo + hi)
        if hi - lo < xtol:
            return mid
        fm = fun(mid)
        if fm == 0.0:
            return mid
        if flo*fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5*(lo + hi)


def adaptive_simpson(g, a, b, tol=1e-9, max_depth=40):
    """Integrate g over [a, b] by repeatedly doubled composite Simpson.

    g must accept a node vector. Stops when two successive refinements
    agree within tol (absolute) and returns the Richardson-extrapolated
    value; raises QuadratureNotConverged past max_depth doublings.
    """
    if b <= a:
        return 0.0
    n = 8
    s_prev = _composite(g, a, b, n)
    for _ in range(max_depth):
        n *= 2
        s = _composite(g, a, b, n)
        if abs(s - s_prev) < tol:
            return s + (s - s_prev)/15.0
        s_prev = s
    raise QuadratureNotConverged(
        f"Simpson on [{a}, {b}] still moving after depth {max_depth}")


def _composite(g, a, b, n):
    xs = np.linspace(a, b, n + 1)
    vals = np.asarray(g(xs), dtype=float)
    return (b - a)/(3.0*n)*(
        vals[0] + vals[-1] + 4.0*vals[1:-1:2].sum() + 2.0*vals[2:-2:2].sum())
