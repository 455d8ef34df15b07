"""Radial Green's functions and the gradient-integral estimates.

On a nonparabolic warped surface the minimal positive Green's function with
pole at the center is explicit: G(r) = (1/2pi) int_r^inf dt/f(t), so
|grad G| = 1/(2 pi f) and the level flux L(r) |grad G|(r) = 1 holds
identically.  Parabolic models still admit the Dirichlet Green's function of
the ball B(r_max) (the exhaustion stage), which shares every pointwise
identity; both constructions are provided.

Improper tails are never truncated silently: surfaces must declare an
asymptotic growth class, which supplies closed-form tails beyond r_max.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import DomainError, Inapplicable, NumericError, VerificationFailure
from .quadrature import grid_pieces, integral, log_substituted_tail_probe, tail_reciprocal
from .spectrum import default_radii, lambda0_estimate
from .surfaces import Scenario, WarpedSurface


@dataclass(frozen=True)
class NonparabolicityResult:
    status: str  # "nonparabolic" | "parabolic" | "indeterminate"
    integral_to_rmax: float
    tail: float

    def __bool__(self):
        return self.status == "nonparabolic"


def nonparabolicity_test(surface: WarpedSurface, probe_tol=1e-5):
    """Does int^inf dt/f converge?

    Uses the declared growth class for the tail when present; otherwise
    probes the tail in logarithmic coordinates until increments vanish.
    Without a declared class the test never claims parabolicity (divergence
    cannot be certified numerically), only nonparabolic or indeterminate.
    """
    body, _ = integral(lambda r: 1.0 / np.asarray(surface.f(r)), 1.0, surface.r_max, tol=1e-13)
    if surface.growth is not None:
        tail = tail_reciprocal(surface.growth, float(surface.f(surface.r_max)), surface.r_max)
        if math.isinf(tail):
            return NonparabolicityResult("parabolic", body, math.inf)
        return NonparabolicityResult("nonparabolic", body, tail)
    converged, tail = log_substituted_tail_probe(
        lambda r: 1.0 / np.asarray(surface.f(r)), surface.r_max, rel_tol=probe_tol
    )
    if converged:
        return NonparabolicityResult("nonparabolic", body, tail)
    return NonparabolicityResult("indeterminate", body, tail)


@dataclass(frozen=True)
class GreenProfile:
    """Sampled radial Green's function with high-accuracy evaluators.

    `minimal` distinguishes the minimal positive Green's function (requires
    nonparabolicity; tail handled by the declared growth class) from the
    Dirichlet Green's function of B(r_max).  `g_boundary_1` is G at radius 1,
    the normalizing value used by the weighted gradient integrals.
    """

    surface: WarpedSurface
    grid: np.ndarray
    G: np.ndarray
    grad_norm: np.ndarray
    v: np.ndarray
    nonparabolic: bool
    minimal: bool
    tail: float
    g_boundary_1: float
    _spline: object = None
    _c_end: float = 0.0

    def G_at(self, r):
        """Green's function at arbitrary radii (spline-backed, ~1e-9 relative)."""
        r = np.asarray(r, dtype=float)
        out = (self._spline(r) + self.tail) / (2.0 * np.pi)
        return float(out) if r.ndim == 0 else out

    def grad_at(self, r):
        return 1.0 / (2.0 * np.pi * np.asarray(self.surface.f(r)))

    def G_delta(self, r_lo, r_hi, tol=1e-14):
        """Exact-quadrature difference G(r_hi) - G(r_lo) (no spline error)."""
        val, _ = integral(lambda t: 1.0 / np.asarray(self.surface.f(t)), r_lo, r_hi, tol=tol)
        return -val / (2.0 * np.pi)

    def G_inverse(self, level):
        """Radius with G(r) = level (G is strictly decreasing)."""
        lo, hi = float(self.grid[0]) * 1e-4, float(self.grid[-1])
        glo, ghi = self.G_at(lo), self.G_at(hi)
        if not ghi <= level <= glo:
            raise DomainError(f"level {level!r} outside the sampled range ({ghi!r}, {glo!r})")
        return brentq(lambda r: self.G_at(r) - level, lo, hi, xtol=1e-13, rtol=8.9e-16)

    def to_csv(self):
        lines = ["r,G,gradG,v"]
        for i in range(len(self.grid)):
            lines.append(f"{self.grid[i]!r},{self.G[i]!r},{self.grad_norm[i]!r},{self.v[i]!r}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return json.dumps(
            {
                "surface": self.surface.name,
                "minimal": self.minimal,
                "nonparabolic": self.nonparabolic,
                "g_boundary_1": self.g_boundary_1,
                "r": self.grid.tolist(),
                "G": self.G.tolist(),
                "gradG": self.grad_norm.tolist(),
                "v": self.v.tolist(),
            },
            sort_keys=True,
        )


def _build_profile(surface, tail, minimal, nonparabolic, grid, harmonicity_tol):
    r_max = surface.r_max
    lo = min(1e-6, grid[0] * 1e-3)
    dense = np.concatenate(
        [
            np.geomspace(lo, min(1.0, 0.5 * r_max), 512, endpoint=False),
            np.linspace(min(1.0, 0.5 * r_max), r_max, 2048),
        ]
    )
    # backward cumulative int_r^{r_max} dt/f, summed right-to-left so the
    # tiny tail values keep full relative accuracy (no cancellation)
    pieces = grid_pieces(lambda t: 1.0 / np.asarray(surface.f(t)), dense, tol=1e-13)
    backward = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    spline = CubicHermiteSpline(dense, backward, -1.0 / np.asarray(surface.f(dense)))
    c_end = 0.0

    gp = GreenProfile(
        surface=surface,
        grid=grid,
        G=np.empty(0),
        grad_norm=np.empty(0),
        v=np.empty(0),
        nonparabolic=nonparabolic,
        minimal=minimal,
        tail=tail,
        g_boundary_1=0.0,
        _spline=spline,
        _c_end=c_end,
    )
    G = gp.G_at(grid)
    if np.any(G <= 0) or np.any(np.diff(G) >= 0):
        raise NumericError("Green's function must be positive and strictly decreasing")
    grad = gp.grad_at(grid)
    object.__setattr__(gp, "G", G)
    object.__setattr__(gp, "grad_norm", grad)
    object.__setattr__(gp, "v", np.log(G))
    object.__setattr__(gp, "g_boundary_1", float(gp.G_at(1.0)) if r_max >= 1.0 else float(G[0]))

    worst = max(abs(harmonicity_residual(gp, r)) for r in np.linspace(grid[0], 0.9 * r_max, 9))
    if worst > harmonicity_tol:
        raise NumericError("harmonicity residual too large", detail=f"worst {worst:.3e}")
    flux = flux_residual(gp, np.linspace(grid[0], r_max, 33))
    if np.max(np.abs(flux)) > 1e-10:
        raise NumericError("level flux deviates from -1", detail=f"worst {np.max(np.abs(flux)):.3e}")
    return gp


def green_radial(surface: WarpedSurface, n_grid=512, r_min=0.25, harmonicity_tol=1e-8):
    """Minimal positive radial Green's function of a nonparabolic surface."""
    status = nonparabolicity_test(surface)
    if status.status != "nonparabolic":
        raise Inapplicable(f"surface is {status.status}; minimal Green's function unavailable")
    tail_from_rmax = (
        tail_reciprocal(surface.growth, float(surface.f(surface.r_max)), surface.r_max)
        if surface.growth is not None
        else status.tail
    )
    grid = np.linspace(max(r_min, surface.r_max * 1e-4), surface.r_max, n_grid)
    return _build_profile(surface, tail_from_rmax, True, True, grid, harmonicity_tol)


def green_dirichlet(surface: WarpedSurface, n_grid=512, r_min=0.25, harmonicity_tol=1e-8):
    """Dirichlet Green's function of the ball B(r_max) (exhaustion stage).

    Defined for every model; vanishes at r_max.  Pointwise identities
    (harmonicity, flux, the Bochner/Kato saturation) are the same as for the
    minimal function, so parabolic models can still exercise them.
    """
    status = nonparabolicity_test(surface)
    grid = np.linspace(max(r_min, surface.r_max * 1e-4), surface.r_max * (1.0 - 1e-6), n_grid)
    return _build_profile(surface, 0.0, False, bool(status), grid, harmonicity_tol)


def flux_residual(gp: GreenProfile, r):
    """L(r) |grad G|(r) - 1; zero identically for the radial construction."""
    r = np.asarray(r, dtype=float)
    L = 2.0 * np.pi * np.asarray(gp.surface.f(r))
    return L * gp.grad_at(r) - 1.0


def harmonicity_residual(gp: GreenProfile, r, h_scale=1e-3):
    """G'' + (f'/f) G' from exact segment quadrature; should vanish.

    Derivatives come from 5-point stencils whose G-differences are computed
    by adaptive quadrature over the stencil segments (no spline error).
    """
    r = float(r)
    h = h_scale * max(r, 1.0)
    if r - 2 * h <= 0 or r + 2 * h > gp.surface.r_max:
        raise DomainError("stencil leaves the domain")
    # segment differences relative to G(r)
    d = {}
    for k in (-2, -1, 1, 2):
        lo, hi = sorted((r, r + k * h))
        delta = gp.G_delta(lo, hi)
        d[k] = delta if k > 0 else -delta
    d1 = (-d[2] + 8.0 * d[1] - 8.0 * d[-1] + d[-2]) / (12.0 * h)
    d2 = (-d[2] + 16.0 * d[1] + 16.0 * d[-1] - d[-2] - 30.0 * 0.0) / (12.0 * h * h)
    fr = float(gp.surface.f(r))
    return d2 + float(gp.surface.d1(r)) / fr * d1


@dataclass(frozen=True)
class CoareaCheck:
    lhs: float
    rhs: float

    @property
    def rel_error(self):
        scale = max(abs(self.rhs), 1e-300)
        return abs(self.lhs - self.rhs) / scale


def coarea_identity_check(gp: GreenProfile, a, b, weight, rel_tol=1e-6):
    """int over {a < G < b} of |grad G|^2 w(G) dA versus int_a^b w(t) dt."""
    a, b = float(a), float(b)
    if a == b:
        return CoareaCheck(0.0, 0.0)
    if not 0 < a < b:
        raise DomainError("need 0 < a < b")
    r_hi = gp.G_inverse(a)
    r_lo = gp.G_inverse(b)

    def integrand(r):
        # |grad G|^2 w(G) * 2 pi f = w(G) / (2 pi f)
        return np.asarray(weight(gp.G_at(r))) / (2.0 * np.pi * np.asarray(gp.surface.f(r)))

    lhs, _ = integral(integrand, r_lo, r_hi, tol=1e-13)
    rhs, _ = integral(lambda t: np.asarray(weight(t)), a, b, tol=1e-13)
    check = CoareaCheck(lhs=lhs, rhs=rhs)
    if check.rel_error > rel_tol:
        raise VerificationFailure(
            f"coarea identity off by {check.rel_error:.3e} (lhs={lhs!r}, rhs={rhs!r})",
            worst=check.rel_error,
        )
    return check


def _radial_green_pieces(surface, gp, r):
    """g, g', g'' and K at radius r from closed radial expressions."""
    fr = np.asarray(surface.f(r), dtype=float)
    d1 = np.asarray(surface.d1(r), dtype=float)
    d2 = np.asarray(surface.d2(r), dtype=float)
    g = 1.0 / (2.0 * np.pi * fr)
    gp1 = -d1 / (2.0 * np.pi * fr**2)
    gp2 = -d2 / (2.0 * np.pi * fr**2) + d1**2 / (np.pi * fr**3)
    K = -d2 / fr
    return fr, d1, g, gp1, gp2, K


def kato_bochner_residual(gp_or_surface, r):
    """Residual of the refined Kato/Bochner inequality for |grad G|, n = 2.

    Delta|grad G| - [ |grad|grad G||^2 / |grad G| + K |grad G| ], evaluated
    through closed radial expressions in f, f', f''.  Radial Green's
    functions saturate the inequality, so the residual vanishes identically;
    it must never be below -1e-8.  Accepts a GreenProfile or a bare surface
    (the residual only involves the gradient density 1/(2 pi f)).
    """
    surface = gp_or_surface.surface if isinstance(gp_or_surface, GreenProfile) else gp_or_surface
    fr, d1, g, gp1, gp2, K = _radial_green_pieces(surface, None, r)
    lap = gp2 + (d1 / fr) * gp1
    rhs = gp1**2 / g + K * g
    out = lap - rhs
    return float(out) if np.ndim(r) == 0 else out


def log_bochner_residual(gp: GreenProfile, r):
    """Residual of the Bochner inequality for v = ln G at n = 2.

    (1/2) Delta |grad v|^2 - [ 2 |grad|grad v||^2 + |grad v|^4
    + K |grad v|^2 ]; nonnegative, and zero for radial G.
    """
    surface = gp.surface
    fr, d1, g, gp1, gp2, K = _radial_green_pieces(surface, gp, r)
    G = np.asarray(gp.G_at(r), dtype=float)
    u = g / G
    up = gp1 / G + g**2 / G**2
    upp = gp2 / G + 3.0 * g * gp1 / G**2 + 2.0 * g**3 / G**3
    lhs = u * (upp + (d1 / fr) * up) + up**2  # (1/2) Delta u^2
    rhs = 2.0 * up**2 + u**4 + K * u**2
    out = lhs - rhs
    return float(out) if np.ndim(r) == 0 else out


@dataclass(frozen=True)
class LemmaGIntegral:
    """Weighted gradient integrals I(R) with region-doubling increments.

    quartic: int_{B(R) \\ B(1)} |grad G|^4 / (G^3 ln^{2q}(1+1/G)) dA
    cubic:   int_{B(R) \\ B(1)} |grad G|^3 / (G^2 ln^{2q}(1+1/G)) dA
    """

    q: float
    R: float
    quartic: float
    quartic_doubled: float
    cubic: float
    cubic_doubled: float
    weight_variant: str = "1+1/G"

    @property
    def quartic_increment(self):
        return self.quartic_doubled - self.quartic

    @property
    def cubic_increment(self):
        return self.cubic_doubled - self.cubic


def _green_extension(gp):
    """(f, G) evaluators valid beyond r_max through the growth class."""
    surface = gp.surface
    r_max = surface.r_max
    if surface.growth is None or surface.growth[0] != "exp":
        return None
    a = surface.growth[1]
    f_end = float(surface.f(r_max))

    def f_ext(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= r_max, np.asarray(surface.f(np.minimum(r, r_max))), f_end * np.exp(a * (r - r_max)))

    def G_ext(r):
        r = np.asarray(r, dtype=float)
        inside = np.asarray(gp.G_at(np.minimum(r, r_max)))
        outside = 1.0 / (2.0 * np.pi * a * f_end * np.exp(a * (np.maximum(r, r_max) - r_max)))
        return np.where(r <= r_max, inside, outside)

    return f_ext, G_ext


def lemma_g_partial_integral(gp: GreenProfile, q, R, weight_variant="1+1/G"):
    """Weighted gradient integral over B(R) \\ B(1) and over B(2R) \\ B(1).

    The hypothesis q > 1/2 is enforced as a domain error.  Regions beyond
    r_max use the declared exponential growth class for both f and G; the
    improper region is never silently truncated.  `weight_variant` selects
    the denominator log argument: "1+1/G" (the statement form) or "A/G"
    with A = e^4 * G(1) (the normalized form used mid-proof).
    """
    q = float(q)
    R = float(R)
    if q <= 0.5:
        raise DomainError(f"need q > 1/2, got q={q}")
    if R < 2.0:
        raise DomainError("need R >= 2")
    ext = _green_extension(gp)
    if 2.0 * R > gp.surface.r_max and ext is None:
        raise NumericError("region exceeds r_max and no exponential growth class is declared")
    if ext is not None:
        f_eval, G_eval = ext
    else:
        f_eval, G_eval = (lambda r: np.asarray(gp.surface.f(r))), gp.G_at
    if weight_variant == "1+1/G":
        def logweight(G):
            return np.log1p(1.0 / G) ** (2.0 * q)
    elif weight_variant == "A/G":
        A = math.e**4 * gp.g_boundary_1

        def logweight(G):
            return np.log(A / G) ** (2.0 * q)
    else:
        raise DomainError(f"unknown weight variant '{weight_variant}'")

    def quartic(r):
        f = f_eval(r)
        G = G_eval(r)
        return 1.0 / ((2.0 * np.pi * f) ** 3 * G**3 * logweight(G))

    def cubic(r):
        f = f_eval(r)
        G = G_eval(r)
        return 1.0 / ((2.0 * np.pi * f) ** 2 * G**2 * logweight(G))

    q4_R, _ = integral(quartic, 1.0, R, tol=1e-9)
    q4_inc, _ = integral(quartic, R, 2.0 * R, tol=1e-9)
    q3_R, _ = integral(cubic, 1.0, R, tol=1e-9)
    q3_inc, _ = integral(cubic, R, 2.0 * R, tol=1e-9)
    return LemmaGIntegral(
        q=q,
        R=R,
        quartic=q4_R,
        quartic_doubled=q4_R + q4_inc,
        cubic=q3_R,
        cubic_doubled=q3_R + q3_inc,
        weight_variant=weight_variant,
    )


@dataclass(frozen=True)
class DecayRates:
    g2_rate: float
    grad2_rate: float
    finite_gradient_energy: bool
    window: tuple
    tails_truncated: bool


def decay_rate(gp: GreenProfile, prof=None, lambda0=None, n_fit=16):
    """Fitted exponential decay rates of the G^2 and |grad G|^2 tails.

    Fits the log of T(R) = int_{Sigma \\ B(R)} (.) dA over a window of radii;
    tails beyond r_max come from the exponential growth class when declared.
    Asserts rate >= 2 sqrt(lambda0) - 0.05 when an estimate is supplied.
    """
    surface = gp.surface
    r_max = surface.r_max

    def density_g2(r):
        G = np.asarray(gp.G_at(r))
        return G**2 * 2.0 * np.pi * np.asarray(surface.f(r))

    def density_grad2(r):
        return 1.0 / (2.0 * np.pi * np.asarray(surface.f(r)))

    if surface.growth is not None and surface.growth[0] == "exp":
        a = surface.growth[1]
        f_end = float(surface.f(r_max))
        tail_g2 = 1.0 / (2.0 * np.pi * a**3 * f_end)
        tail_grad2 = 1.0 / (2.0 * np.pi * a * f_end)
        truncated = False
    else:
        tail_g2 = tail_grad2 = 0.0
        truncated = True

    lo, hi = 0.3 * r_max, 0.75 * r_max
    radii = np.linspace(lo, hi, n_fit)
    pieces_g2 = [integral(density_g2, radii[i], radii[i + 1], tol=1e-11)[0] for i in range(n_fit - 1)]
    pieces_grad2 = [integral(density_grad2, radii[i], radii[i + 1], tol=1e-13)[0] for i in range(n_fit - 1)]
    end_g2 = integral(density_g2, hi, r_max, tol=1e-11)[0] + tail_g2
    end_grad2 = integral(density_grad2, hi, r_max, tol=1e-13)[0] + tail_grad2
    T_g2 = end_g2 + np.concatenate([np.cumsum(pieces_g2[::-1])[::-1], [0.0]])
    T_grad2 = end_grad2 + np.concatenate([np.cumsum(pieces_grad2[::-1])[::-1], [0.0]])
    if np.any(np.diff(T_g2) >= 0) or np.any(np.diff(T_grad2) >= 0):
        raise VerificationFailure("tail integrals fail to decay")

    def slope(y):
        x = radii
        xbar = x.mean()
        return float(np.sum((x - xbar) * (np.log(y) - np.log(y).mean())) / np.sum((x - xbar) ** 2))

    g2_rate = -slope(T_g2)
    grad2_rate = -slope(T_grad2)
    if g2_rate <= 0 or grad2_rate <= 0:
        raise VerificationFailure(f"non-decaying tail: rates ({g2_rate!r}, {grad2_rate!r})")
    if lambda0 is not None:
        target = 2.0 * math.sqrt(max(lambda0, 0.0)) - 0.05
        if g2_rate < target or grad2_rate < target:
            raise VerificationFailure(
                f"decay rates ({g2_rate:.4f}, {grad2_rate:.4f}) below 2 sqrt(lambda0) - 0.05 = {target:.4f}"
            )
    grad_energy_from_1 = integral(density_grad2, 1.0, r_max, tol=1e-13)[0] + tail_grad2
    return DecayRates(
        g2_rate=g2_rate,
        grad2_rate=grad2_rate,
        finite_gradient_energy=bool(np.isfinite(grad_energy_from_1)),
        window=(float(lo), float(hi)),
        tails_truncated=truncated,
    )


# ---------------------------------------------------------------------------
# Poincare test function built from the Green's function

@dataclass(frozen=True)
class CutoffPair:
    """Level-set cutoff chi (in G) and annulus cutoff psi (in r).

    chi = 1 where G > eps, log-interpolates on eps^2 < G < eps, and vanishes
    where G < eps^2; psi climbs 1->2, plateaus to R, and descends R->R+1.
    phi_test = |grad G|^{1/2} chi psi is the Poincare test function.
    """

    gp: GreenProfile
    eps: float
    R: float
    r_chi_one: float
    r_chi_zero: float

    def chi(self, r):
        G = np.asarray(self.gp.G_at(r))
        mid = (np.log(G) - 2.0 * math.log(self.eps)) / (-math.log(self.eps))
        return np.clip(mid, 0.0, 1.0)

    def dchi(self, r):
        r = np.asarray(r, dtype=float)
        G = np.asarray(self.gp.G_at(r))
        band = (r > self.r_chi_one) & (r < self.r_chi_zero)
        return np.where(band, -self.gp.grad_at(r) / G / (-math.log(self.eps)), 0.0)

    def psi(self, r):
        r = np.asarray(r, dtype=float)
        return np.clip(np.minimum(r - 1.0, 1.0), 0.0, None) * (r <= self.R) + np.clip(
            self.R + 1.0 - r, 0.0, 1.0
        ) * (r > self.R)

    def dpsi(self, r):
        r = np.asarray(r, dtype=float)
        rising = (r > 1.0) & (r < 2.0)
        falling = (r > self.R) & (r < self.R + 1.0)
        return np.where(rising, 1.0, 0.0) + np.where(falling, -1.0, 0.0)

    def phi_test(self, r):
        return np.sqrt(self.gp.grad_at(r)) * self.chi(r) * self.psi(r)


def build_cutoff_pair(gp: GreenProfile, eps, R):
    eps, R = float(eps), float(R)
    if not 0 < eps < 1:
        raise DomainError("need 0 < eps < 1")
    g1 = gp.G_at(min(1.0, gp.grid[0]))
    if eps >= math.sqrt(g1):
        raise DomainError(f"need eps < sqrt(G(1)) = {math.sqrt(g1):.4g}")
    G_lo = gp.G_at(gp.grid[-1] * 0.999)
    r_one = gp.G_inverse(eps) if eps > G_lo else gp.grid[-1]
    r_zero = gp.G_inverse(eps * eps) if eps * eps > G_lo else gp.grid[-1]
    return CutoffPair(gp=gp, eps=eps, R=R, r_chi_one=r_one, r_chi_zero=r_zero)


@dataclass(frozen=True)
class PoincareGreenResult:
    rayleigh_quotient: float
    lambda0: float
    divergence_witness: float
    cutoffs: CutoffPair


def poincare_green_check(scenario: Scenario, epsilon, R, lambda0=None, mesh_n=2048):
    """Rayleigh quotient of |grad G|^{1/2} chi psi against the lambda_0 estimate.

    The quotient can never fall below the optimal Poincare constant; this is
    asserted with 1e-3 slack.  Also returns the divergence witness
    int_{B(R) \\ B(2)} |grad G| dA, which equals R - 2 exactly for radial G
    (certifying that int |grad G| diverges as R grows).
    """
    if not scenario.stable_claim:
        raise Inapplicable("Poincare check runs on stable scenarios")
    surface = scenario.surface
    if R + 1.0 > surface.r_max:
        raise DomainError("need R + 1 <= r_max for the outer cutoff")
    gp = green_radial(surface)
    pair = build_cutoff_pair(gp, epsilon, R)

    def dphi_sq(r):
        r = np.asarray(r, dtype=float)
        g = gp.grad_at(r)
        dg = -np.asarray(surface.d1(r)) / (2.0 * np.pi * np.asarray(surface.f(r)) ** 2)
        chi, dchi = pair.chi(r), pair.dchi(r)
        psi, dpsi = pair.psi(r), pair.dpsi(r)
        dphi = dg / (2.0 * np.sqrt(g)) * chi * psi + np.sqrt(g) * (dchi * psi + chi * dpsi)
        return dphi**2

    dA = lambda r: 2.0 * np.pi * np.asarray(surface.f(r))
    end = min(R + 1.0, pair.r_chi_zero)
    breaks = [p for p in (2.0, pair.r_chi_one, R, pair.r_chi_zero) if 1.0 < p < end]
    pts = [1.0] + sorted(set(breaks)) + [end]
    num = 0.0
    den = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        num += integral(lambda r: dphi_sq(r) * dA(r), lo, hi, tol=1e-9)[0]
        den += integral(lambda r: pair.phi_test(r) ** 2 * dA(r), lo, hi, tol=1e-9)[0]
    if den <= 0:
        raise NumericError("degenerate test function (empty support)")
    quotient = num / den

    if lambda0 is None:
        cap = min(surface.r_max, 30.0)
        lambda0 = lambda0_estimate(surface, default_radii(cap), mesh_n=mesh_n).value
    if quotient < lambda0 - 1e-3:
        raise VerificationFailure(
            f"Rayleigh quotient {quotient!r} fell below the lambda0 estimate {lambda0!r}"
        )
    witness, _ = integral(lambda r: gp.grad_at(r) * dA(r), 2.0, R, tol=1e-13)
    return PoincareGreenResult(
        rayleigh_quotient=quotient,
        lambda0=lambda0,
        divergence_witness=witness,
        cutoffs=pair,
    )
