"""Deterministic adaptive quadrature used throughout the lab.

Panels are integrated with nested Gauss-Legendre rules (15 and 31 nodes);
a panel whose rule difference exceeds the tolerance is bisected.  Summation
order is fixed (left to right, pairwise via numpy) so repeated runs are
byte-identical.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError

_X15, _W15 = np.polynomial.legendre.leggauss(15)
_X31, _W31 = np.polynomial.legendre.leggauss(31)

_MAX_DEPTH = 48


def _panel(fn, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    coarse = half * np.dot(_W15, np.asarray(fn(mid + half * _X15), dtype=float))
    fine = half * np.dot(_W31, np.asarray(fn(mid + half * _X31), dtype=float))
    return fine, abs(fine - coarse)


def integral(fn, a, b, tol=1e-12):
    """Adaptive integral of a vectorized integrand on [a, b].

    Returns (value, error_estimate).  Raises NumericError carrying the worst
    panel when bisection cannot reach the tolerance.
    """
    if a == b:
        return 0.0, 0.0
    stack = [(float(a), float(b), 0)]
    total = 0.0
    err_total = 0.0
    worst = (0.0, (a, b))
    panels = 0
    while stack:
        lo, hi, depth = stack.pop()
        panels += 1
        if panels > 100000:
            raise NumericError(
                "quadrature did not converge",
                detail=f"panel budget exhausted; worst panel {worst[1]} error {worst[0]:.3e}",
            )
        val, err = _panel(fn, lo, hi)
        # float64 cannot do better than relative precision on large values
        local_tol = max(tol, 64.0 * np.finfo(float).eps * abs(val))
        if err <= local_tol or not np.isfinite(err):
            if not np.isfinite(val):
                raise NumericError("non-finite integrand", detail=f"panel [{lo}, {hi}]")
            total += val
            err_total += err
            if err > worst[0]:
                worst = (err, (lo, hi))
        elif depth >= _MAX_DEPTH:
            raise NumericError(
                "quadrature did not converge",
                detail=f"worst panel [{lo}, {hi}] error {err:.3e}",
            )
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))
    return total, err_total


def grid_pieces(fn, grid, tol=1e-12):
    """Per-panel integrals between consecutive grid nodes."""
    grid = np.asarray(grid, dtype=float)
    pieces = np.empty(len(grid) - 1)
    for i in range(len(grid) - 1):
        pieces[i], _ = integral(fn, grid[i], grid[i + 1], tol=tol)
    return pieces


def grid_cumulative(fn, grid, tol=1e-12):
    """Cumulative integral of fn from grid[0] to every grid point.

    Returns an array c with c[i] = integral(fn, grid[0], grid[i]); c[0] = 0.
    Each inter-node panel is integrated adaptively to `tol`.
    """
    grid = np.asarray(grid, dtype=float)
    pieces = grid_pieces(fn, grid, tol=tol)
    out = np.empty(len(grid))
    out[0] = 0.0
    np.cumsum(pieces, out=out[1:])
    return out


def tail_reciprocal(growth, f_at_end, r_end):
    """Closed-form tail of the improper integral of 1/f beyond r_end.

    `growth` is a declared asymptotic class ("exp", rate) or ("poly", degree);
    the tail models f by its class through the last sampled value.  Returns
    the tail value, or inf when the class makes the integral diverge.
    """
    kind, rate = growth
    if kind == "exp":
        if rate <= 0:
            raise NumericError("exponential growth class needs a positive rate")
        return 1.0 / (rate * f_at_end)
    if kind == "poly":
        if rate > 1.0:
            return r_end / ((rate - 1.0) * f_at_end)
        return np.inf
    raise NumericError(f"unknown growth class '{kind}'")


def log_substituted_tail_probe(fn, r_start, rel_tol=1e-5, u_max=300.0):
    """Tail of the integral of fn on [r_start, inf) probed in u = ln r space.

    Used when no growth class is declared: integrates fn(e^u) e^u over
    doubling windows until increments fall below rel_tol (relative to the
    accumulated value, floored at 1).  Returns (converged, tail_value).
    """
    u0 = np.log(r_start)
    total = 0.0
    u = u0
    step = np.log(2.0)
    with np.errstate(over="ignore", invalid="ignore"):
        while u < u_max:
            inc, _ = integral(lambda v: fn(np.exp(v)) * np.exp(v), u, u + step, tol=1e-12)
            if not np.isfinite(inc):
                return False, total
            total += inc
            if inc < rel_tol * max(1.0, abs(total)) and inc < rel_tol:
                return True, total
            u += step
    return False, total
