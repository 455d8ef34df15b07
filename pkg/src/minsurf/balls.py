"""Geodesic-ball profiles and the area-growth checks.

For a pole-centered warped ball, L(r) = 2 pi f(r), A(r) = 2 pi int_0^r f,
and the total curvature integral has the closed form 2 pi (f'(0) - f'(r)).
Neck-centered models are annuli around the neck circle: both boundary
circles count, so L, A and the curvature integral carry a factor 2 and the
Euler characteristic is 0 (topological cylinder) instead of 1 (disk).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, Inapplicable, NumericError, VerificationFailure
from .quadrature import grid_cumulative
from .surfaces import Scenario, WarpedSurface

RATE_SECTIONAL = 4.0 / math.sqrt(7.0)


def make_grid(r_max, n, spacing="auto", r_min=None):
    """Increasing radii; 'auto' packs geometric points near the pole and is
    uniform beyond r = 1, 'uniform' is equally spaced."""
    if n < 2:
        raise DomainError("grid needs at least 2 points")
    if spacing == "uniform":
        start = r_max / n if r_min is None else r_min
        return np.linspace(start, r_max, n)
    if spacing != "auto":
        raise DomainError(f"unknown spacing '{spacing}'")
    if r_min is None:
        r_min = min(1.0, r_max) * 1e-3
    if r_max <= 1.0:
        return np.geomspace(r_min, r_max, n)
    n_geo = max(8, n // 8)
    geo = np.geomspace(r_min, 1.0, n_geo, endpoint=False)
    uni = np.linspace(1.0, r_max, n - n_geo)
    return np.concatenate([geo, uni])


@dataclass(frozen=True)
class BallProfile:
    """Sampled r -> (L, A, int_K, k_g) with topological data."""

    grid: np.ndarray
    length: np.ndarray
    area: np.ndarray
    total_curv: np.ndarray
    kg: np.ndarray
    euler: int
    surface: WarpedSurface
    scenario: Scenario | None = None

    def to_csv(self):
        buf = io.StringIO()
        buf.write("r,L,A,totalK,kg\n")
        for i in range(len(self.grid)):
            buf.write(
                f"{self.grid[i]!r},{self.length[i]!r},{self.area[i]!r},"
                f"{self.total_curv[i]!r},{self.kg[i]!r}\n"
            )
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {
                "surface": self.surface.name,
                "euler": self.euler,
                "r": self.grid.tolist(),
                "L": self.length.tolist(),
                "A": self.area.tolist(),
                "totalK": self.total_curv.tolist(),
                "kg": self.kg.tolist(),
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class BoundReport:
    """One area-growth bound check: measured values against bound values."""

    theorem_id: str
    grid: np.ndarray
    bound: np.ndarray
    measured: np.ndarray
    margin: np.ndarray
    fitted_constant: float | None
    passed: bool
    detail: str = ""

    def to_csv(self):
        buf = io.StringIO()
        buf.write("r,measured,bound,margin\n")
        for i in range(len(self.grid)):
            buf.write(f"{self.grid[i]!r},{self.measured[i]!r},{self.bound[i]!r},{self.margin[i]!r}\n")
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {
                "theorem_id": self.theorem_id,
                "pass": bool(self.passed),
                "fitted_constant": self.fitted_constant,
                "detail": self.detail,
                "r": self.grid.tolist(),
                "measured": self.measured.tolist(),
                "bound": self.bound.tolist(),
                "margin": self.margin.tolist(),
            },
            sort_keys=True,
        )


def profile(surface_or_scenario, r_max=None, n_grid=256, spacing="auto", panel_tol=1e-12):
    """Geodesic-ball profile on a radius grid.

    Area and total curvature come from adaptive per-panel quadrature
    (absolute panel error below 1e-10); the closed-form curvature shortcut
    2 pi (f'(0) - f'(r)) is cross-checked against the quadrature.
    """
    if isinstance(surface_or_scenario, Scenario):
        scenario = surface_or_scenario
        surface = scenario.surface
    else:
        scenario = None
        surface = surface_or_scenario
    if n_grid < 16:
        raise DomainError("n_grid must be at least 16")
    r_max = surface.r_max if r_max is None else float(r_max)
    if r_max > surface.r_max:
        raise DomainError(f"r_max={r_max} exceeds surface domain {surface.r_max}")

    grid = make_grid(r_max, n_grid, spacing=spacing)
    sides = 2.0 if surface.neck_centered else 1.0
    f = np.asarray(surface.f(grid))
    d1 = np.asarray(surface.d1(grid))

    length = sides * 2.0 * np.pi * f
    # grid starts above 0: prepend the center for cumulative quadrature
    full = np.concatenate([[0.0], grid])
    area = sides * 2.0 * np.pi * grid_cumulative(surface.f, full, tol=panel_tol)[1:]
    total_curv = sides * 2.0 * np.pi * grid_cumulative(lambda r: -np.asarray(surface.d2(r)), full, tol=panel_tol)[1:]

    d1_0 = 0.0 if surface.neck_centered else 1.0
    closed = sides * 2.0 * np.pi * (d1_0 - d1)
    worst = float(np.max(np.abs(total_curv - closed)))
    if worst > 1e-8 * max(1.0, float(np.max(np.abs(closed)))):
        raise NumericError("curvature quadrature disagrees with closed form", detail=f"worst {worst:.3e}")

    if np.any(length <= 0) or np.any(area <= 0) or np.any(np.diff(area) <= 0):
        raise NumericError("profile must have positive L and strictly increasing A")

    return BallProfile(
        grid=grid,
        length=length,
        area=area,
        total_curv=total_curv,
        kg=d1 / f,
        euler=0 if surface.neck_centered else 1,
        surface=surface,
        scenario=scenario,
    )


def d1_richardson(x, y):
    """First derivative on a (possibly non-uniform) grid.

    Three-point centered differences at neighbor spacing and at doubled
    stencil width, combined by one Richardson step that cancels the leading
    y''' error term.  Returns (indices, derivative) for the interior points
    where the wide stencil exists.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 5:
        raise DomainError("need at least 5 grid points")
    idx = np.arange(2, n - 2)

    def central(i, k):
        h1 = x[i] - x[i - k]
        h2 = x[i + k] - x[i]
        return (h1**2 * y[i + k] - h2**2 * y[i - k] + (h2**2 - h1**2) * y[i]) / (h1 * h2 * (h1 + h2))

    d_near = central(idx, 1)
    d_wide = central(idx, 2)
    rho = ((x[idx] - x[idx - 2]) * (x[idx + 2] - x[idx])) / ((x[idx] - x[idx - 1]) * (x[idx + 1] - x[idx]))
    return idx, (rho * d_near - d_wide) / (rho - 1.0)


@dataclass(frozen=True)
class FialaResult:
    indices: np.ndarray
    residual: np.ndarray
    max_abs: float
    direction_ok: bool


def fiala_residual(prof: BallProfile, tol=1e-6):
    """Residual of L' = 2 pi chi - int_B K on the profile grid.

    For warped profiles this is an identity (checked two-sidedly); the
    one-sided direction L' <= 2 pi chi_max - int_B K with chi_max = 1 for
    disks and 0 for neck annuli is reported as `direction_ok`.
    """
    if len(prof.grid) < 64:
        raise DomainError("grid too coarse to difference L (need N >= 64)")
    idx, dL = d1_richardson(prof.grid, prof.length)
    residual = dL - (2.0 * np.pi * prof.euler - prof.total_curv[idx])
    max_abs = float(np.max(np.abs(residual)))
    return FialaResult(
        indices=idx,
        residual=residual,
        max_abs=max_abs,
        direction_ok=bool(np.all(residual <= tol)),
    )


@dataclass(frozen=True)
class HessianComparisonResult:
    status: str  # "pass" | "fail" | "inapplicable"
    first_violation: float | None
    ratio: np.ndarray | None = None
    detail: str = ""


def hessian_comparison_check(prof: BallProfile, slack=1e-9):
    """For K <= 0 balls: L(r)/r >= 2 pi and L(r)/r nondecreasing."""
    surface = prof.surface
    if surface.neck_centered:
        return HessianComparisonResult("inapplicable", None, detail="neck-centered model has no pole")
    K = -np.asarray(surface.d2(prof.grid)) / np.asarray(surface.f(prof.grid))
    if np.any(K > 1e-12):
        r_bad = float(prof.grid[np.argmax(K > 1e-12)])
        return HessianComparisonResult("inapplicable", None, detail=f"K > 0 at r={r_bad:.3g}")
    ratio = prof.length / prof.grid
    if np.any(ratio < 2.0 * np.pi - slack):
        bad = float(prof.grid[np.argmax(ratio < 2.0 * np.pi - slack)])
        return HessianComparisonResult("fail", bad, ratio, detail="L(r)/r < 2 pi")
    drops = np.diff(ratio) < -slack * np.maximum(1.0, ratio[:-1])
    if np.any(drops):
        bad = float(prof.grid[1:][np.argmax(drops)])
        return HessianComparisonResult("fail", bad, ratio, detail="L(r)/r not monotone")
    return HessianComparisonResult("pass", None, ratio)


def area_bound_report(prof: BallProfile, case, *, R_flat=None, refine_factor=2, tol=1e-9):
    """Area-growth bound for a stable scenario profile.

    case "flat": L <= 2 pi r (1 + 10/ln R) and A <= pi r^2 (1 + 10/ln R) for
    r <= sqrt(R), plus the complete-surface form A <= pi r^2.
    case "scalar"/"sectional": A(R) <= C1 exp(beta R) with beta 2 or
    4/sqrt(7); C1 is fitted as max A exp(-beta r) and must be stable under
    grid refinement.
    """
    if prof.scenario is None:
        raise ConfigError("area bounds need a scenario-backed profile (stability claim required)")
    if not prof.scenario.stable_claim:
        raise Inapplicable("area-growth bounds are asserted only for stable scenarios")

    r = prof.grid
    if case == "flat":
        R = math.exp(20.0) if R_flat is None else float(R_flat)
        if R <= 1.0:
            raise DomainError("flat-case R must exceed 1")
        mask = r <= math.sqrt(R)
        if not np.any(mask):
            raise DomainError("no grid radii below sqrt(R)")
        factor = 1.0 + 10.0 / math.log(R)
        bound_L = 2.0 * np.pi * r[mask] * factor
        bound_A = np.pi * r[mask] ** 2 * factor
        bound_A_complete = np.pi * r[mask] ** 2
        measured = np.concatenate([prof.length[mask], prof.area[mask], prof.area[mask]])
        bound = np.concatenate([bound_L, bound_A, bound_A_complete])
        margin = bound - measured
        passed = bool(np.all(margin >= -tol * np.maximum(1.0, bound)))
        return BoundReport(
            theorem_id="area-flat",
            grid=np.concatenate([r[mask]] * 3),
            bound=bound,
            measured=measured,
            margin=margin,
            fitted_constant=None,
            passed=passed,
            detail=f"R={R!r}",
        )

    if case in ("scalar", "sectional"):
        beta = 2.0 if case == "scalar" else RATE_SECTIONAL
        floor = prof.scenario.ambient.scalar_floor if case == "scalar" else prof.scenario.ambient.sectional_floor
        if floor is None:
            raise Inapplicable(f"scenario declares no {case} curvature floor")
        fitted = float(np.max(prof.area * np.exp(-beta * r)))
        fine = profile(
            prof.scenario,
            r_max=float(r[-1]),
            n_grid=refine_factor * len(r),
            spacing="uniform" if _is_uniform(r) else "auto",
        )
        fitted_fine = float(np.max(fine.area * np.exp(-beta * fine.grid)))
        rel_change = abs(fitted_fine - fitted) / max(fitted, 1e-300)
        bound = fitted * np.exp(beta * r)
        margin = bound - prof.area
        passed = bool(np.isfinite(fitted) and rel_change <= 0.05)
        return BoundReport(
            theorem_id=f"area-{case}",
            grid=r,
            bound=bound,
            measured=prof.area,
            margin=margin,
            fitted_constant=fitted,
            passed=passed,
            detail=f"beta={beta!r} refined_change={rel_change:.3e}",
        )

    raise DomainError(f"unknown case '{case}'")


def _is_uniform(r):
    d = np.diff(r)
    return bool(np.all(np.abs(d - d[0]) <= 1e-9 * d[0]))


@dataclass(frozen=True)
class GrowthRate:
    rate: float
    confidence: float
    window: tuple


def growth_rate(prof: BallProfile, fraction=0.3):
    """Tail estimate of d(ln A)/dR by least squares over the last fraction
    of the grid, with the slope's standard error as confidence width."""
    r = prof.grid
    if r[-1] < 10.0:
        raise DomainError("growth_rate needs the grid to reach r >= 10")
    lo = np.searchsorted(r, r[-1] * (1.0 - fraction))
    if len(r) - lo < 8:
        raise DomainError("tail window too short")
    x = r[lo:]
    y = np.log(prof.area[lo:])
    if np.any(np.diff(y) < 0):
        raise NumericError("ln A not monotone on the tail window")
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - y.mean())) / sxx)
    resid = y - (y.mean() + slope * (x - xbar))
    dof = max(len(x) - 2, 1)
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    return GrowthRate(rate=slope, confidence=stderr, window=(float(x[0]), float(x[-1])))


def assert_growth_consistency(rate: GrowthRate, beta, slack=0.02):
    """Raise when the measured growth rate exceeds the theoretical bound."""
    if rate.rate > beta + slack:
        raise VerificationFailure(
            f"growth rate {rate.rate:.4f} exceeds bound {beta:.4f}",
            worst=rate.rate - beta,
        )
