"""Scalar root finding for monotone functions.

Everything the package inverts is strictly monotone on the search domain
(u-derivatives of convex fluxes, flux branches on either side of the critical
point), so a bracketed bisection with Newton acceleration is guaranteed to
converge. Tolerances are on the residual |g(root)|, default 1e-12; the polish
loop keeps iterating while the residual improves, which in practice lands
within an ulp of the best representable root. That head-room matters: steady
states built from these inversions must be machine-precision fixed points of
the scheme.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

from .errors import NumericalError

TOL_ROOT = 1e-12
_MAX_EXPAND = 200
_MAX_BISECT = 110
_MAX_NEWTON = 12


def expand_bracket(
    g: Callable[[float], float],
    x0: float,
    step: float = 1.0,
) -> tuple[float, float, float, float]:
    """Bracket a sign change of increasing g by geometric expansion from x0.

    Returns (lo, hi, g(lo), g(hi)) with g(lo) <= 0 <= g(hi).
    """
    g0 = g(x0)
    if math.isnan(g0):
        raise NumericalError(f"root search: g({x0!r}) is NaN")
    if g0 == 0.0:
        return x0, x0, 0.0, 0.0
    step = abs(step) if step != 0.0 else 1.0
    if g0 < 0.0:
        lo, glo = x0, g0
        hi = x0 + step
        for _ in range(_MAX_EXPAND):
            ghi = g(hi)
            if math.isnan(ghi):
                raise NumericalError(f"root search: g({hi!r}) is NaN")
            if ghi >= 0.0:
                return lo, hi, glo, ghi
            lo, glo = hi, ghi
            step *= 2.0
            hi += step
    else:
        hi, ghi = x0, g0
        lo = x0 - step
        for _ in range(_MAX_EXPAND):
            glo = g(lo)
            if math.isnan(glo):
                raise NumericalError(f"root search: g({lo!r}) is NaN")
            if glo <= 0.0:
                return lo, hi, glo, ghi
            hi, ghi = lo, glo
            step *= 2.0
            lo -= step
    raise NumericalError(
        "root search: no sign change found (function not coercive on this side?)"
    )


def solve_increasing(
    g: Callable[[float], float],
    dg: Optional[Callable[[float], float]] = None,
    x0: float = 0.0,
    step: float = 1.0,
    tol_res: float = TOL_ROOT,
    bracket: Optional[tuple[float, float]] = None,
) -> float:
    """Root of a strictly increasing scalar function.

    Bracketed bisection seeded by an expanding search from x0, accelerated and
    polished by Newton steps when dg is provided. Raises NumericalError if the
    final residual exceeds tol_res.
    """
    if bracket is None:
        lo, hi, glo, ghi = expand_bracket(g, x0, step)
    else:
        lo, hi = bracket
        glo, ghi = g(lo), g(hi)
        if glo > 0.0 or ghi < 0.0:
            raise NumericalError("root search: supplied bracket does not straddle zero")
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi

    x = 0.5 * (lo + hi)
    best_x, best_res = x, math.inf
    for _ in range(_MAX_BISECT):
        gx = g(x)
        agx = abs(gx)
        if agx < best_res:
            best_x, best_res = x, agx
        if gx == 0.0:
            return x
        if gx < 0.0:
            lo = x
        else:
            hi = x
        if hi - lo <= 4.0 * math.ulp(max(abs(lo), abs(hi), 1.0)):
            break
        xn = None
        if dg is not None:
            d = dg(x)
            if d > 0.0 and math.isfinite(d):
                cand = x - gx / d
                if lo < cand < hi:
                    xn = cand
        x = xn if xn is not None else 0.5 * (lo + hi)

    # Newton polish: iterate while the residual strictly improves.
    if dg is not None:
        x = best_x
        for _ in range(_MAX_NEWTON):
            gx = g(x)
            agx = abs(gx)
            if agx < best_res:
                best_x, best_res = x, agx
            if gx == 0.0:
                return x
            d = dg(x)
            if not (d > 0.0 and math.isfinite(d)):
                break
            xn = x - gx / d
            if xn == x or not math.isfinite(xn):
                break
            x = xn
        gx = abs(g(x))
        if gx < best_res:
            best_x, best_res = x, gx

    if best_res > tol_res:
        raise NumericalError(
            f"root search: residual {best_res:.3e} exceeds tolerance {tol_res:.3e}"
        )
    return best_x
