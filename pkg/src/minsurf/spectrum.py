"""Bottom-spectrum estimates and the closed-form bound ordering.

lambda_0 of a model surface is approached through Dirichlet ground values of
exhausting balls; closed-form upper and lower bounds are kept as exact
rationals internally and only rendered as decimals at the report boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import balls
from .errors import DomainError, NumericError
from .stability import RadialOperator, dirichlet_eigen
from .surfaces import Scenario, WarpedSurface


@dataclass(frozen=True)
class Lambda0Estimate:
    value: float
    uncertainty: float
    radii: tuple
    eigenvalues: tuple


def lambda0_estimate(surface: WarpedSurface, R_list, mesh_n=4096, cross_validate=False):
    """Estimate of the bottom spectrum via exhaustion by geodesic balls.

    Ground Dirichlet values (free Laplacian, mode 0) are computed per radius,
    checked to be strictly decreasing, and extrapolated by fitting
    a + b/R^2 over the largest three radii.  The uncertainty is the last
    sequence difference.
    """
    radii = [float(R) for R in R_list]
    if len(radii) < 4:
        raise DomainError("need at least 4 radii")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be increasing")
    op = RadialOperator(surface=surface, potential=lambda r: 0.0 * np.asarray(r), mode=0)
    lams = [dirichlet_eigen(op, R, mesh_n, cross_validate=cross_validate).lam for R in radii]
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise NumericError("ball eigenvalues not strictly decreasing", detail=f"{lams}")
    x = np.array([1.0 / R**2 for R in radii[-3:]])
    y = np.array(lams[-3:])
    design = np.vstack([np.ones(3), x]).T
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    value = float(coef[0])
    uncertainty = abs(lams[-1] - lams[-2])
    return Lambda0Estimate(
        value=max(value, 0.0),
        uncertainty=uncertainty,
        radii=tuple(radii),
        eigenvalues=tuple(lams),
    )


def default_radii(r_max, count=5, start_fraction=0.4):
    if count < 4:
        raise DomainError("need at least 4 radii")
    return list(np.linspace(start_fraction * r_max, r_max, count))


def volume_growth_upper(prof: balls.BallProfile, rate=None):
    """(1/4) * (area growth rate)^2, the volume-growth spectral bound."""
    if rate is None:
        rate = balls.growth_rate(prof)
    return 0.25 * rate.rate**2


def bcc_upper_bound(case):
    """Closed-form bottom-spectrum bound under a unit curvature floor:
    1 for the scalar case, exactly 4/7 for the sectional case."""
    if case == "scalar_S_ge_minus6":
        return Fraction(1)
    if case == "sectional_K_ge_minus1":
        return Fraction(4, 7)
    raise DomainError(f"unknown case '{case}'")


def hypersurface_upper_bound(n, kappa=1):
    """2n(n-1)^2 kappa / (6n - n^2 - 1) for hypersurface dimension n.

    The denominator is positive only for 2 <= n <= 5; outside that range the
    bound is undefined and a domain error is raised.
    """
    n = int(n)
    if not 2 <= n <= 5:
        raise DomainError(f"hypersurface bound needs 2 <= n <= 5, got n={n}")
    if kappa < 0:
        raise DomainError("kappa must be nonnegative")
    coeff = Fraction(2 * n * (n - 1) ** 2, 6 * n - n * n - 1)
    if isinstance(kappa, (int, Fraction)):
        return coeff * kappa
    return float(coeff) * kappa


def minimal_submanifold_lower_bound(m):
    """(m-1)^2/4 for an m-dimensional minimal submanifold of hyperbolic space."""
    m = int(m)
    if m < 1:
        raise DomainError("dimension must be >= 1")
    return Fraction((m - 1) ** 2, 4)


def _exact_alpha(alpha):
    # catalog floors give alpha in {0, 1}; keep those exact
    if alpha is None:
        return None
    if float(alpha).is_integer():
        return Fraction(int(alpha))
    return float(alpha)


@dataclass(frozen=True)
class BoundEntry:
    bound_id: str
    value: object  # Fraction or float
    applicable: bool
    slack: float = 0.0
    note: str = ""


@dataclass(frozen=True)
class SpectrumReport:
    scenario: str
    lambda0: float
    uncertainty: float
    growth_bound: float | None
    upper_bounds: tuple
    lower_bounds: tuple
    orderings_pass: bool
    violations: tuple

    def to_json(self):
        def render(entry):
            return {
                "bound_id": entry.bound_id,
                "value": float(entry.value),
                "exact": str(entry.value) if isinstance(entry.value, Fraction) else None,
                "applicable": entry.applicable,
                "note": entry.note,
            }

        return json.dumps(
            {
                "scenario": self.scenario,
                "lambda0": self.lambda0,
                "uncertainty": self.uncertainty,
                "growth_bound": self.growth_bound,
                "upper_bounds": [render(e) for e in self.upper_bounds],
                "lower_bounds": [render(e) for e in self.lower_bounds],
                "orderings_pass": self.orderings_pass,
                "violations": list(self.violations),
            },
            sort_keys=True,
        )

    def to_csv(self):
        lines = ["scenario,bound_id,value,applicable,satisfied"]
        for entry, kind in [(e, "upper") for e in self.upper_bounds] + [(e, "lower") for e in self.lower_bounds]:
            if entry.applicable:
                ok = (
                    self.lambda0 - self.uncertainty <= float(entry.value) + entry.slack
                    if kind == "upper"
                    else float(entry.value) <= self.lambda0 + self.uncertainty + entry.slack
                )
            else:
                ok = ""
            lines.append(f"{self.scenario},{entry.bound_id},{float(entry.value)!r},{entry.applicable},{ok}")
        return "\n".join(lines) + "\n"


def spectrum_report(scenario: Scenario, R_list=None, mesh_n=4096, n_grid=512):
    """Assemble the estimate and every applicable bound, checking orderings.

    Applicability: closed-form upper bounds need the stability claim and the
    matching curvature floor; the hyperbolic-ambient lower bound needs the
    ambient to be hyperbolic space; the volume-growth bound is unconditional.
    An ordering violation is recorded in the report, never silently dropped.
    """
    surface = scenario.surface
    cap = min(surface.r_max, 30.0)
    if R_list is None:
        R_list = default_radii(cap)
    est = lambda0_estimate(surface, R_list, mesh_n=mesh_n)

    growth_bound = None
    try:
        prof = balls.profile(scenario, r_max=cap, n_grid=n_grid, spacing="uniform")
        rate = balls.growth_rate(prof)
        growth_bound = volume_growth_upper(prof, rate)
    except DomainError:
        pass

    amb = scenario.ambient
    upper = []
    a_scal = _exact_alpha(amb.alpha_scalar)
    a_sect = _exact_alpha(amb.alpha_sect)
    upper.append(
        BoundEntry(
            "scalar-floor",
            bcc_upper_bound("scalar_S_ge_minus6") * a_scal if a_scal is not None else Fraction(0),
            applicable=scenario.stable_claim and a_scal is not None,
            note="needs stable + scalar floor",
        )
    )
    upper.append(
        BoundEntry(
            "sectional-floor",
            bcc_upper_bound("sectional_K_ge_minus1") * a_sect if a_sect is not None else Fraction(0),
            applicable=scenario.stable_claim and a_sect is not None,
            note="needs stable + sectional floor",
        )
    )
    upper.append(
        BoundEntry(
            "hypersurface-n2",
            hypersurface_upper_bound(2, a_sect) if a_sect is not None else Fraction(0),
            applicable=scenario.stable_claim and a_sect is not None,
            note="surface instance of the hypersurface bound",
        )
    )
    if growth_bound is not None:
        upper.append(BoundEntry("volume-growth", growth_bound, applicable=True, slack=0.01))

    lower = [BoundEntry("trivial", Fraction(0), applicable=True)]
    lower.append(
        BoundEntry(
            "hyperbolic-ambient",
            minimal_submanifold_lower_bound(2) * (a_sect if a_sect is not None else 1),
            applicable=amb.ambient_hyperbolic,
            note="minimal submanifold of hyperbolic space",
        )
    )

    violations = []
    for entry in upper:
        if entry.applicable and est.value - est.uncertainty > float(entry.value) + entry.slack:
            violations.append(f"upper bound {entry.bound_id} violated: {est.value!r} > {float(entry.value)!r}")
    for entry in lower:
        if entry.applicable and float(entry.value) > est.value + est.uncertainty + entry.slack:
            violations.append(f"lower bound {entry.bound_id} violated: {float(entry.value)!r} > {est.value!r}")

    return SpectrumReport(
        scenario=scenario.name,
        lambda0=est.value,
        uncertainty=est.uncertainty,
        growth_bound=growth_bound,
        upper_bounds=tuple(upper),
        lower_bounds=tuple(lower),
        orderings_pass=not violations,
        violations=tuple(violations),
    )
