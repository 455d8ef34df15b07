"""Stability of model surfaces as a radial Schrodinger eigenvalue problem.

The quadratic form behind the stability inequality is encoded by the radial
operator -w'' - (f'/f) w' + (m^2/f^2) w - V w on a geodesic ball, with
V = |h|^2 + Ric(nu,nu).  Discretization is a cell-centered finite-volume
scheme assembled in the measure f dr, which yields a symmetric tridiagonal
matrix; the ground eigenvalue is cross-validated against a shooting oracle.
Test-function inequalities (the cutoff inequalities derived from stability
plus the length-derivative bound) are evaluated by panelwise quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .balls import RATE_SECTIONAL
from .errors import ConfigError, DomainError, Inapplicable, NumericError, VerificationFailure
from .quadrature import integral
from .surfaces import Scenario, WarpedSurface

_SHOOT_RTOL = 1e-10
_AGREEMENT = 1e-4


@dataclass(frozen=True)
class RadialOperator:
    """Radial restriction of the stability operator to one angular mode."""

    surface: WarpedSurface
    potential: object
    mode: int = 0

    def __post_init__(self):
        if self.mode < 0:
            raise DomainError("angular mode must be nonnegative")

    @classmethod
    def from_scenario(cls, scenario: Scenario, mode=0):
        return cls(surface=scenario.surface, potential=scenario.potential, mode=mode)


@dataclass(frozen=True)
class EigenResult:
    lam: float
    R: float
    m: int
    grid: np.ndarray
    eigenfunction: np.ndarray
    solver: str
    mesh_n: int
    shooting_lambda: float | None = None

    def to_json(self):
        import json

        return json.dumps(
            {
                "lambda": self.lam,
                "R": self.R,
                "m": self.m,
                "solver": self.solver,
                "mesh_n": self.mesh_n,
                "shooting_lambda": self.shooting_lambda,
                "r": self.grid.tolist(),
                "w": self.eigenfunction.tolist(),
            },
            sort_keys=True,
        )


def _assemble(op: RadialOperator, R, n):
    """Symmetric tridiagonal (d, e) for the mode-m operator on (0, R)."""
    f = op.surface.f
    h = R / n
    centers = (np.arange(1, n + 1) - 0.5) * h
    faces = np.arange(1, n + 1) * h
    fc = np.asarray(f(centers))
    ff = np.asarray(f(faces))
    left = np.concatenate([[0.0], ff[:-1]])
    main = (left + ff) / h**2
    main[-1] = (left[-1] + 2.0 * ff[-1]) / h**2  # Dirichlet at the outer face
    if op.mode >= 1:
        f0 = float(f(0.0))
        if f0 > 0.0:
            main[0] += 2.0 * f0 / h**2  # Dirichlet stencil toward the center
    # m = 0 keeps zero flux through r = 0: exact for a pole (f(0) = 0) and the
    # even reflection for a neck
    V = np.asarray(op.potential(centers))
    C = -V * fc
    if op.mode >= 1:
        C = C + op.mode**2 / fc**2 * fc
    d = (main + C) / fc
    e = -ff[: n - 1] / h**2 / np.sqrt(fc[:-1] * fc[1:])
    return centers, fc, d, e


def _ground_pair(op, R, n):
    centers, fc, d, e = _assemble(op, R, n)
    lam, vec = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    w = vec[:, 0] / np.sqrt(fc)
    if w[np.argmax(np.abs(w))] < 0:
        w = -w
    return float(lam[0]), centers, w


def _shoot_endpoint(op, R, lam, n_eval=800):
    """Integrate the mode ODE at spectral parameter lam; returns the endpoint
    value and the interior sign-change count (Sturm oscillation)."""
    f, d1 = op.surface.f, op.surface.d1
    m = op.mode
    V = op.potential
    pole = not op.surface.neck_centered

    def rhs(r, y):
        w, wp = y
        fr = f(r)
        return [wp, -(d1(r) / fr) * wp - (lam + V(r) - (m * m / (fr * fr) if m else 0.0)) * w]

    if pole:
        eps = 1e-8 * max(R, 1.0)
        if m == 0:
            v0 = float(V(eps))
            y0 = [1.0 - (lam + v0) * eps**2 / 4.0, -(lam + v0) * eps / 2.0]
        else:
            y0 = [eps**m, m * eps ** (m - 1)]
        span = (eps, R)
    else:
        if m == 0:
            y0 = [1.0, 0.0]
        else:
            y0 = [1.0, 0.0]  # symmetric piece: even data at the neck
        span = (0.0, R)
    t_eval = np.linspace(span[0], span[1], n_eval)
    sol = solve_ivp(rhs, span, y0, rtol=_SHOOT_RTOL, atol=1e-14, t_eval=t_eval, method="RK45")
    if not sol.success:
        raise NumericError("shooting integration failed", detail=sol.message)
    w = sol.y[0]
    signs = np.sign(w[np.abs(w) > 1e-300])
    changes = int(np.sum(signs[1:] * signs[:-1] < 0))
    if changes and np.abs(w[-1]) > 0:
        # do not count the endpoint crossing itself twice
        pass
    return float(w[-1]), changes


def _shooting_ground(op, R, lam_guess):
    """Refine the ground eigenvalue by shooting around a guess."""
    scale = max(1.0, abs(lam_guess))
    lo = lam_guess - 1e-3 * scale
    hi = lam_guess + 1e-3 * scale
    flo, _ = _shoot_endpoint(op, R, lo)
    fhi, _ = _shoot_endpoint(op, R, hi)
    grow = 0
    while flo * fhi > 0 and grow < 12:
        width = (hi - lo) * 2.0
        lo -= width
        hi += width
        flo, _ = _shoot_endpoint(op, R, lo)
        fhi, _ = _shoot_endpoint(op, R, hi)
        grow += 1
    if flo * fhi > 0:
        raise NumericError("shooting oracle found no bracket around the discrete eigenvalue")
    lam = brentq(lambda s: _shoot_endpoint(op, R, s)[0], lo, hi, xtol=1e-12, rtol=1e-12)
    _, changes = _shoot_endpoint(op, R, lam * (1 - 1e-9) if lam else -1e-12)
    if changes != 0:
        raise NumericError("shooting solution oscillates below the ground value", detail=f"{changes} sign changes")
    return float(lam)


def dirichlet_eigen(op: RadialOperator, R, mesh_n=2048, cross_validate=True):
    """Lowest Dirichlet eigenvalue of the mode operator on B(R).

    Symmetric tridiagonal discretization; when `cross_validate` is set the
    value is confirmed by a shooting oracle to 1e-4 relative.
    """
    if R <= 0 or R > op.surface.r_max:
        raise DomainError(f"R={R} outside (0, {op.surface.r_max}]")
    if mesh_n < 128:
        raise DomainError("mesh_n must be at least 128")
    lam, centers, w = _ground_pair(op, R, mesh_n)
    interior = w[np.abs(w) > 1e-12 * np.max(np.abs(w))]
    if np.any(interior[1:] * interior[:-1] < 0):
        raise NumericError("ground eigenfunction changes sign")
    shooting = None
    if cross_validate:
        shooting = _shooting_ground(op, R, lam)
        if abs(shooting - lam) > _AGREEMENT * (1.0 + abs(lam)):
            raise NumericError(
                "discretization and shooting disagree",
                detail=f"fd={lam!r} shooting={shooting!r}",
            )
    grid = np.concatenate([centers, [R]])
    w_full = np.concatenate([w / np.max(np.abs(w)), [0.0]])
    return EigenResult(
        lam=lam,
        R=float(R),
        m=op.mode,
        grid=grid,
        eigenfunction=w_full,
        solver="finite_difference",
        mesh_n=mesh_n,
        shooting_lambda=shooting,
    )


def positive_jacobi_solution(scenario: Scenario, R=None):
    """First zero of the central solution of the Jacobi equation, or None.

    Integrates u'' + (f'/f) u' + V u = 0 with u = 1, u' = 0 at the center
    (pole or neck) by an adaptive embedded Runge-Kutta pair; a zero in (0, R]
    certifies instability of the enclosed region's complement criterion.
    """
    surface = scenario.surface
    R = surface.r_max if R is None else float(R)
    if R <= 0 or R > surface.r_max:
        raise DomainError(f"R={R} outside (0, {surface.r_max}]")
    f, d1, V = surface.f, surface.d1, scenario.potential

    def rhs(r, y):
        u, up = y
        return [up, -(d1(r) / f(r)) * up - V(r) * u]

    if surface.neck_centered:
        span = (0.0, R)
        y0 = [1.0, 0.0]
    else:
        eps = 1e-8 * max(R, 1.0)
        v0 = float(V(eps))
        span = (eps, R)
        y0 = [1.0 - v0 * eps**2 / 4.0, -v0 * eps / 2.0]

    sol = solve_ivp(rhs, span, y0, rtol=_SHOOT_RTOL, atol=1e-14, dense_output=True, method="RK45")
    if not sol.success:
        raise NumericError("Jacobi integration failed", detail=sol.message)
    samples = np.linspace(span[0], span[1], 4000)
    u = sol.sol(samples)[0]
    neg = np.nonzero(u <= 0)[0]
    if len(neg) == 0:
        return None
    i = neg[0]
    if i == 0:
        return float(samples[0])
    return float(brentq(lambda r: sol.sol(r)[0], samples[i - 1], samples[i], xtol=1e-12))


def stability_radius(scenario: Scenario, mesh_n=2048, bracket_tol=1e-6):
    """Largest radius with nonnegative ground Dirichlet eigenvalue.

    Bisection on the eigenvalue sign, cross-checked against the first zero
    of the central Jacobi solution (the two criteria must agree to 1e-4
    relative); returns r_max when the surface is stable throughout.
    """
    surface = scenario.surface
    op = RadialOperator.from_scenario(scenario)
    r_max = surface.r_max
    jacobi_zero = positive_jacobi_solution(scenario, r_max)
    lam_end = _ground_pair(op, r_max, mesh_n)[0]
    if lam_end >= 0.0:
        if jacobi_zero is not None:
            raise NumericError(
                "criteria disagree: positive ground value but Jacobi zero found",
                detail=f"zero at {jacobi_zero!r}",
            )
        return r_max
    if jacobi_zero is None:
        raise NumericError("criteria disagree: negative ground value but no Jacobi zero")
    lo = 0.9 * jacobi_zero
    hi = min(1.1 * jacobi_zero, r_max)
    lam_lo = _ground_pair(op, lo, mesh_n)[0]
    lam_hi = _ground_pair(op, hi, mesh_n)[0]
    while lam_lo < 0 and lo > 1e-6:
        lo *= 0.8
        lam_lo = _ground_pair(op, lo, mesh_n)[0]
    while lam_hi > 0 and hi < r_max:
        hi = min(hi * 1.2, r_max)
        lam_hi = _ground_pair(op, hi, mesh_n)[0]
    if lam_lo < 0 or lam_hi > 0:
        raise NumericError("could not bracket the stability radius")
    while hi - lo > bracket_tol:
        mid = 0.5 * (lo + hi)
        if _ground_pair(op, mid, mesh_n)[0] > 0:
            lo = mid
        else:
            hi = mid
    radius = 0.5 * (lo + hi)
    if abs(radius - jacobi_zero) > _AGREEMENT * max(1.0, abs(jacobi_zero)):
        raise NumericError(
            "eigenvalue-sign and Jacobi-zero criteria disagree",
            detail=f"bisection={radius!r} jacobi={jacobi_zero!r}",
        )
    return radius


# ---------------------------------------------------------------------------
# test functions

@dataclass(frozen=True)
class TestFunction:
    """Nonincreasing Lipschitz cutoff in r with sampled derivatives.

    `breaks` lists the kink radii so quadratures can split panels there;
    `d2` is present only for twice-differentiable kinds.
    """

    kind: str
    support: float
    phi: object
    dphi: object
    d2phi: object | None = None
    breaks: tuple = ()
    params: dict = field(default_factory=dict)

    def validate(self, samples=257):
        r = np.linspace(0.0, self.support, samples)
        v = np.asarray(self.phi(r))
        if np.any(np.diff(v) > 1e-12 * max(1.0, float(np.max(np.abs(v))))):
            raise ConfigError(f"{self.kind}: cutoff must be nonincreasing")
        if abs(float(self.phi(self.support))) > 1e-12:
            raise ConfigError(f"{self.kind}: cutoff must vanish at the support end")
        if not np.all(np.isfinite(np.asarray(self.dphi(r[1:])))):
            raise ConfigError(f"{self.kind}: cutoff slope must be finite (Lipschitz)")
        return self


def linear_cutoff(R):
    R = float(R)
    return TestFunction(
        kind="linear_cutoff",
        support=R,
        phi=lambda r: np.clip(1.0 - np.asarray(r) / R, 0.0, None),
        dphi=lambda r: np.where(np.asarray(r) <= R, -1.0 / R, 0.0),
        d2phi=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        params={"R": R},
    )


def poly_cutoff(R, power=2):
    R = float(R)
    p = int(power)

    def phi(r):
        base = np.clip(1.0 - np.asarray(r) / R, 0.0, None)
        return base**p

    return TestFunction(
        kind="poly_cutoff",
        support=R,
        phi=phi,
        dphi=lambda r: -p / R * np.clip(1.0 - np.asarray(r) / R, 0.0, None) ** (p - 1),
        d2phi=lambda r: p * (p - 1) / R**2 * np.clip(1.0 - np.asarray(r) / R, 0.0, None) ** (p - 2),
        params={"R": R, "power": p},
    )


def log_cutoff(R):
    R = float(R)
    return TestFunction(
        kind="log_cutoff",
        support=R,
        phi=lambda r: np.log(R + 1.0) - np.log(np.asarray(r) + 1.0),
        dphi=lambda r: -1.0 / (np.asarray(r) + 1.0),
        d2phi=lambda r: 1.0 / (np.asarray(r) + 1.0) ** 2,
        params={"R": R},
    )


def plateau_cutoff(t, eta):
    t, eta = float(t), float(eta)
    if not 0 < eta <= t:
        raise DomainError("need 0 < eta <= t")

    def psi(r):
        r = np.asarray(r, dtype=float)
        return np.clip(np.minimum(1.0, (t - r) / eta), 0.0, 1.0)

    def dpsi(r):
        r = np.asarray(r, dtype=float)
        return np.where((r > t - eta) & (r < t), -1.0 / eta, 0.0)

    return TestFunction(
        kind="plateau_cutoff",
        support=t,
        phi=psi,
        dphi=dpsi,
        breaks=(t - eta,),
        params={"t": t, "eta": eta},
    )


def exp_cutoff(t, eta, a=RATE_SECTIONAL):
    """e^{-a r / 2} times the plateau cutoff; the weight used in the
    exponential-annulus inequality with a = 4/sqrt(7)."""
    base = plateau_cutoff(t, eta)
    a = float(a)

    def phi(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-0.5 * a * r) * base.phi(r)

    def dphi(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-0.5 * a * r) * (base.dphi(r) - 0.5 * a * base.phi(r))

    return TestFunction(
        kind="exp_cutoff",
        support=base.support,
        phi=phi,
        dphi=dphi,
        breaks=base.breaks,
        params={"t": float(t), "eta": float(eta), "a": a},
    )


# ---------------------------------------------------------------------------
# quadratic form and inequality sides

def _area_measure(scenario):
    sides = 2.0 if scenario.neck_centered else 1.0
    f = scenario.surface.f
    return lambda r: sides * 2.0 * np.pi * np.asarray(f(r))


def _split_integral(fn, a, b, breaks, tol=1e-11):
    pts = [a] + sorted(p for p in breaks if a < p < b) + [b]
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += integral(fn, lo, hi, tol=tol)[0]
    return total


@dataclass(frozen=True)
class QuadraticForm:
    value: float
    gradient_term: float
    potential_term: float


def quadratic_form(scenario: Scenario, phi: TestFunction, R=None):
    """Q(phi) = int |phi'|^2 dA - int V phi^2 dA over B(R), radially."""
    R = phi.support if R is None else float(R)
    if R > scenario.surface.r_max:
        raise DomainError("R exceeds the surface domain")
    if phi.support > R + 1e-12:
        raise DomainError("cutoff support must lie inside [0, R]")
    dA = _area_measure(scenario)
    grad = _split_integral(lambda r: np.asarray(phi.dphi(r)) ** 2 * dA(r), 0.0, R, phi.breaks)
    pot = _split_integral(
        lambda r: np.asarray(scenario.potential(r)) * np.asarray(phi.phi(r)) ** 2 * dA(r), 0.0, R, phi.breaks
    )
    return QuadraticForm(value=grad - pot, gradient_term=grad, potential_term=pot)


@dataclass(frozen=True)
class InequalitySides:
    lhs: float
    rhs: float

    @property
    def margin(self):
        return self.rhs - self.lhs

    def check(self, tol=1e-8):
        if self.lhs > self.rhs + tol:
            raise VerificationFailure(
                f"inequality violated: lhs={self.lhs!r} > rhs={self.rhs!r}", worst=self.lhs - self.rhs
            )
        return self


def _case_constants(scenario, case):
    amb = scenario.ambient
    if case == "scalar":
        if amb.scalar_floor is None:
            raise Inapplicable("no scalar curvature floor declared")
        return 2.0, 3.0 * amb.alpha_scalar
    if case == "sectional":
        if amb.sectional_floor is None:
            raise Inapplicable("no sectional curvature floor declared")
        return 4.0, 4.0 * amb.alpha_sect
    raise DomainError(f"unknown case '{case}'")


def _require_stable_ball(scenario):
    if not scenario.stable_claim:
        raise Inapplicable("inequality asserted only for stable scenarios")
    if scenario.neck_centered:
        raise Inapplicable("ball-based inequality needs a pole-centered model")


def lemma_m_sides(scenario: Scenario, phi: TestFunction, R, case):
    """Both sides of the stability-plus-length-derivative inequality.

    lhs = -c int_0^R phi phi' L' dr with c = 2 (scalar case) or 4
    (sectional); rhs = c pi phi(0)^2 + int |phi'|^2 dA + (3 alpha or
    4 alpha) int phi^2 dA.  The inequality is asserted to 1e-8.
    """
    _require_stable_ball(scenario)
    R = float(R)
    if abs(float(phi.phi(R))) > 1e-12:
        raise DomainError("cutoff must vanish at R")
    c, alpha_coef = _case_constants(scenario, case)
    surface = scenario.surface
    dA = _area_measure(scenario)

    def dL(r):
        return 2.0 * np.pi * np.asarray(surface.d1(r))

    lhs = -c * _split_integral(
        lambda r: np.asarray(phi.phi(r)) * np.asarray(phi.dphi(r)) * dL(r), 0.0, R, phi.breaks
    )
    grad = _split_integral(lambda r: np.asarray(phi.dphi(r)) ** 2 * dA(r), 0.0, R, phi.breaks)
    mass = _split_integral(lambda r: np.asarray(phi.phi(r)) ** 2 * dA(r), 0.0, R, phi.breaks)
    rhs = c * np.pi * float(phi.phi(0.0)) ** 2 + grad + alpha_coef * mass
    return InequalitySides(lhs=lhs, rhs=rhs).check()


def corollary_c1_sides(scenario: Scenario, phi: TestFunction, R, case):
    """Integrated-by-parts variant for twice-differentiable cutoffs.

    scalar:    int |phi'|^2 + 2 int phi phi'' <= 2 pi phi(0)^2 + 3 alpha int phi^2
    sectional: 3 int |phi'|^2 + 4 int phi phi'' <= 4 pi phi(0)^2 + 4 alpha int phi^2
    (all integrals against dA).
    """
    _require_stable_ball(scenario)
    if phi.d2phi is None:
        raise ConfigError("corollary sides need a twice-differentiable cutoff")
    R = float(R)
    if abs(float(phi.phi(R))) > 1e-12:
        raise DomainError("cutoff must vanish at R")
    c, alpha_coef = _case_constants(scenario, case)
    dA = _area_measure(scenario)
    grad = _split_integral(lambda r: np.asarray(phi.dphi(r)) ** 2 * dA(r), 0.0, R, phi.breaks)
    second = _split_integral(
        lambda r: np.asarray(phi.phi(r)) * np.asarray(phi.d2phi(r)) * dA(r), 0.0, R, phi.breaks
    )
    mass = _split_integral(lambda r: np.asarray(phi.phi(r)) ** 2 * dA(r), 0.0, R, phi.breaks)
    if case == "scalar":
        lhs = grad + 2.0 * second
        rhs = 2.0 * np.pi * float(phi.phi(0.0)) ** 2 + alpha_coef * mass
    else:
        lhs = 3.0 * grad + 4.0 * second
        rhs = 4.0 * np.pi * float(phi.phi(0.0)) ** 2 + alpha_coef * mass
    return InequalitySides(lhs=lhs, rhs=rhs).check()


@dataclass(frozen=True)
class ExpCutoffSides:
    annulus: InequalitySides
    area_bound: InequalitySides
    t: float
    eta: float
    a: float


def exp_cutoff_sides(scenario: Scenario, t, eta, a=RATE_SECTIONAL):
    """Exponential-weight annulus inequality and its area-growth corollary.

    annulus: (3/eta^2) int_{B(t) \\ B(t-eta)} e^{-ar} dA
             + (7a/eta) int psi e^{-ar} dA
             <= 4 pi + (4/eta) L(t-eta) e^{-a(t-eta)}
    corollary: A(t) <= (4 pi / 3) t^2 e^{a t}.

    Valid under the unit sectional floor; scenarios whose declared floor is
    weaker than -1 are rejected as inapplicable.
    """
    _require_stable_ball(scenario)
    amb = scenario.ambient
    if amb.sectional_floor is None or amb.sectional_floor < -1.0:
        raise Inapplicable("needs a sectional curvature floor at least -1")
    t, eta, a = float(t), float(eta), float(a)
    if not 0 < eta <= t <= scenario.surface.r_max:
        raise DomainError("need 0 < eta <= t <= r_max")
    surface = scenario.surface
    dA = _area_measure(scenario)
    psi = plateau_cutoff(t, eta)

    exp_mass = _split_integral(lambda r: np.exp(-a * np.asarray(r)) * dA(r), t - eta, t, psi.breaks)
    psi_mass = _split_integral(
        lambda r: np.asarray(psi.phi(r)) * np.exp(-a * np.asarray(r)) * dA(r), t - eta, t, psi.breaks
    )
    L_inner = 2.0 * np.pi * float(surface.f(t - eta)) if t - eta > 0 else 0.0
    annulus = InequalitySides(
        lhs=3.0 / eta**2 * exp_mass + 7.0 * a / eta * psi_mass,
        rhs=4.0 * np.pi + 4.0 / eta * L_inner * math.exp(-a * (t - eta)),
    ).check()

    area_t = _split_integral(dA, 0.0, t, ())
    area_bound = InequalitySides(lhs=area_t, rhs=4.0 * np.pi / 3.0 * t**2 * math.exp(a * t)).check()
    return ExpCutoffSides(annulus=annulus, area_bound=area_bound, t=t, eta=eta, a=a)
