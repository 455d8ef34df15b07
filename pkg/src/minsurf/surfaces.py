"""Warped-product surface models with extrinsic data and ambient bounds.

A model surface carries the intrinsic metric dr^2 + f(r)^2 dtheta^2 through
its warp function f, an extrinsic profile (|h|^2, Ric(nu,nu), tangent-plane
sectional curvature), and ambient curvature floors.  Consistency of the
declared data is enforced through the Gauss equation at construction time.

All types are immutable after construction and every operation is a pure
function, so the module is safe for unrestricted concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, InvariantViolation, PoleError, ScenarioParseError
from .expressions import RadialExpression, fd_d1, fd_d2, parse_expression

_POLE_TOL = 1e-4
_FD_AGREEMENT_TOL = 1e-6
_GAUSS_TOL = 1e-8
_EXTRINSIC_SCALAR_TOL = 1e-9


def _sample_grid(r_max, n=33):
    # log-spaced points resolve the pole, linear ones the bulk
    small = np.geomspace(max(1e-6, 1e-9 * r_max), min(1.0, 0.5 * r_max), n // 2)
    bulk = np.linspace(min(1.0, 0.5 * r_max), r_max, n - n // 2)
    return np.unique(np.concatenate([small, bulk]))


@dataclass(frozen=True)
class WarpedSurface:
    """Radial warp f with derivatives; encodes the metric dr^2 + f^2 dtheta^2.

    `neck_centered` marks models whose coordinate is signed distance from a
    neck circle rather than from a pole (f(0) > 0, f'(0) = 0); the smooth-pole
    requirement is waived for those.  `growth` optionally declares the
    asymptotic class of f as ("exp", rate) or ("poly", degree) and is used for
    closed-form tails of improper integrals.
    """

    name: str
    warp: object
    warp_d1: object
    warp_d2: object
    r_max: float
    neck_centered: bool = False
    growth: tuple | None = None
    expr_text: str | None = None

    @classmethod
    def from_expression(cls, name, text, r_max, neck_centered=False, growth=None, validate=True):
        expr = parse_expression(text)
        surf = cls(
            name=name,
            warp=expr,
            warp_d1=expr.d1,
            warp_d2=expr.d2,
            r_max=float(r_max),
            neck_centered=neck_centered,
            growth=growth,
            expr_text=expr.text,
        )
        if validate:
            surf.validate()
        return surf

    def f(self, r):
        return self.warp(r)

    def d1(self, r):
        return self.warp_d1(r)

    def d2(self, r):
        return self.warp_d2(r)

    def validate(self):
        if self.r_max <= 0:
            raise InvariantViolation(f"{self.name}: r_max must be positive")
        grid = _sample_grid(self.r_max)
        fv = np.asarray(self.f(grid))
        if not np.all(np.isfinite(fv)) or np.any(fv <= 0):
            bad = grid[np.argmin(fv)]
            raise InvariantViolation(f"{self.name}: warp must be positive on (0, r_max], fails near r={bad:.3g}")
        if not self.neck_centered:
            # sampled limit r -> 0+: the smallest sample carries the verdict
            eps = 1e-7
            slope = float(self.f(eps)) / eps
            d1_0 = float(self.d1(eps))
            if abs(slope - 1.0) > _POLE_TOL or abs(d1_0 - 1.0) > _POLE_TOL:
                raise InvariantViolation(
                    f"{self.name}: smooth pole requires f(0)=0, f'(0)=1",
                    residual=max(abs(slope - 1.0), abs(d1_0 - 1.0)),
                )
        d1v = np.asarray(self.d1(grid))
        d2v = np.asarray(self.d2(grid))
        fd1 = fd_d1(self.f, grid)
        fd2 = fd_d2(self.f, grid)
        scale1 = np.maximum(1.0, np.maximum(np.abs(d1v), np.abs(fv)))
        scale2 = np.maximum(1.0, np.maximum(np.abs(d2v), np.abs(fv)))
        worst1 = float(np.max(np.abs(d1v - fd1) / scale1))
        worst2 = float(np.max(np.abs(d2v - fd2) / scale2))
        if worst1 > _FD_AGREEMENT_TOL or worst2 > 10 * _FD_AGREEMENT_TOL:
            raise InvariantViolation(
                f"{self.name}: declared derivatives disagree with finite differences",
                residual=max(worst1, worst2),
            )
        return self


@dataclass(frozen=True)
class ExtrinsicProfile:
    """|h|^2, Ric(nu,nu) and tangent-plane sectional curvature, radially."""

    h_sq: object
    ric_nn: object
    tangent_sec: object
    scalar_curvature: object | None = None
    texts: dict = field(default_factory=dict)

    def validate(self, r_max):
        grid = _sample_grid(r_max)
        h = np.asarray(self.h_sq(grid))
        if np.any(h < -1e-14):
            raise InvariantViolation("|h|^2 must be nonnegative", residual=float(np.min(h)))
        if self.scalar_curvature is not None:
            lhs = np.asarray(self.tangent_sec(grid)) + np.asarray(self.ric_nn(grid))
            rhs = 0.5 * np.asarray(self.scalar_curvature(grid))
            worst = float(np.max(np.abs(lhs - rhs)))
            if worst > _EXTRINSIC_SCALAR_TOL:
                raise InvariantViolation(
                    "tangent_sec + ric_nn must equal half the declared scalar curvature",
                    residual=worst,
                )
        return self


@dataclass(frozen=True)
class AmbientBounds:
    """Ambient curvature hypotheses: scalar floor -6*alpha and/or sectional
    floor -alpha.  The two floors are independent hypotheses; declaring both
    does not assume any compatibility between them."""

    scalar_floor: float | None = None
    sectional_floor: float | None = None
    dimension: int = 3
    ambient_hyperbolic: bool = False

    def validate(self):
        if self.scalar_floor is None and self.sectional_floor is None:
            raise InvariantViolation("at least one curvature floor must be declared")
        if self.scalar_floor is not None and self.scalar_floor > 0:
            raise InvariantViolation("scalar_floor is -6*alpha with alpha >= 0; must be <= 0")
        if self.sectional_floor is not None and self.sectional_floor > 0:
            raise InvariantViolation("sectional_floor is -alpha with alpha >= 0; must be <= 0")
        if self.dimension < 3:
            raise InvariantViolation("ambient dimension must be >= 3")
        return self

    @property
    def alpha_scalar(self):
        return None if self.scalar_floor is None else -self.scalar_floor / 6.0

    @property
    def alpha_sect(self):
        return None if self.sectional_floor is None else -self.sectional_floor


@dataclass(frozen=True)
class Scenario:
    """A surface with extrinsic data, ambient bounds, and a stability claim."""

    surface: WarpedSurface
    extrinsic: ExtrinsicProfile
    ambient: AmbientBounds
    stable_claim: bool = False

    @property
    def name(self):
        return self.surface.name

    @property
    def neck_centered(self):
        return self.surface.neck_centered

    def potential(self, r):
        """Jacobi-operator potential V = |h|^2 + Ric(nu, nu)."""
        return np.asarray(self.extrinsic.h_sq(r)) + np.asarray(self.extrinsic.ric_nn(r))

    def scalar_curvature(self, r):
        if self.extrinsic.scalar_curvature is not None:
            return np.asarray(self.extrinsic.scalar_curvature(r))
        return 2.0 * (np.asarray(self.extrinsic.tangent_sec(r)) + np.asarray(self.extrinsic.ric_nn(r)))

    def validate(self):
        self.surface.validate()
        self.extrinsic.validate(self.surface.r_max)
        self.ambient.validate()
        grid = _sample_grid(self.surface.r_max)
        res = np.abs(gauss_equation_residual(self, grid, validated=False))
        worst = float(np.max(res))
        if worst > _GAUSS_TOL:
            raise InvariantViolation(f"{self.name}: Gauss equation residual too large", residual=worst)
        return self


def eval_warp(surface: WarpedSurface, r):
    """Sample (f, f', f'') at r; the pole value is the one-sided limit."""
    r = float(r)
    if r < 0 or r > surface.r_max:
        raise DomainError(f"r={r} outside [0, {surface.r_max}]")
    if r == 0.0 and not surface.neck_centered:
        d2 = surface.d2(0.0)
        if not np.isfinite(d2):
            d2 = float(surface.d2(1e-8))
        return 0.0, 1.0, float(d2)
    return float(surface.f(r)), float(surface.d1(r)), float(surface.d2(r))


def gauss_curvature(surface: WarpedSurface, r):
    """Intrinsic curvature -f''/f of the warped metric."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(r_arr > surface.r_max):
        raise DomainError("r outside (0, r_max]")
    if np.any(r_arr == 0) and not surface.neck_centered:
        raise PoleError("gauss_curvature is singular at the pole; use ball-profile limits instead")
    out = -np.asarray(surface.d2(r_arr)) / np.asarray(surface.f(r_arr))
    return float(out) if np.ndim(r) == 0 else out


def gauss_equation_residual(scenario: Scenario, r, form="ambient", validated=True):
    """Gauss-equation residual of the declared data.

    form="ambient": K - [S/2 - Ric(nu,nu) - |h|^2/2]
    form="frame":   K - [tangent_sec - |h|^2/2]
    The two coincide when the scalar curvature is not declared explicitly.
    """
    if scenario.extrinsic is None:
        raise ConfigError("scenario has no extrinsic data")
    surface = scenario.surface
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0) and not surface.neck_centered:
        raise DomainError("residual needs r in (0, r_max]")
    K = -np.asarray(surface.d2(r_arr)) / np.asarray(surface.f(r_arr))
    h2 = np.asarray(scenario.extrinsic.h_sq(r_arr))
    if form == "frame":
        rhs = np.asarray(scenario.extrinsic.tangent_sec(r_arr)) - 0.5 * h2
    elif form == "ambient":
        rhs = 0.5 * scenario.scalar_curvature(r_arr) - np.asarray(scenario.extrinsic.ric_nn(r_arr)) - 0.5 * h2
    else:
        raise DomainError(f"unknown residual form '{form}'")
    out = K - rhs
    return float(out) if np.ndim(r) == 0 else out


# ---------------------------------------------------------------------------
# catalog

_PLANE_CONFIG = """\
[surface]
name = plane
f = r
r_max = 1000000.0
growth = poly 1
neck_centered = false
stable_claim = true
[extrinsic]
h_sq = 0
ric_nn = 0
tangent_sec = 0
scalar_curvature = 0
[ambient]
scalar_floor = 0.0
sectional_floor = 0.0
dimension = 3
ambient_hyperbolic = false
"""

_CATENOID_CONFIG = """\
[surface]
name = catenoid(c={c})
f = sqrt({c2} + r*r)
r_max = {r_max}
growth = poly 1
neck_centered = true
stable_claim = false
[extrinsic]
h_sq = 2*{c2}/({c2} + r*r)**2
ric_nn = 0
tangent_sec = 0
scalar_curvature = 0
[ambient]
scalar_floor = 0.0
sectional_floor = 0.0
dimension = 3
ambient_hyperbolic = false
"""

_H2H3_CONFIG = """\
[surface]
name = h2-in-h3
f = sinh(r)
r_max = 30.0
growth = exp 1.0
neck_centered = false
stable_claim = true
[extrinsic]
h_sq = 0
ric_nn = -2
tangent_sec = -1
scalar_curvature = -6
[ambient]
scalar_floor = -6.0
sectional_floor = -1.0
dimension = 3
ambient_hyperbolic = true
"""


def catenoid_scenario(c=1.0, r_max=10.0):
    """Neck-c catenoid in flat space; minimal but globally unstable.

    The intrinsic model f = sqrt(c^2 + r^2) with |h|^2 = 2c^2/(c^2+r^2)^2
    satisfies the Gauss equation identically (K = -|h|^2/2).
    """
    if c <= 0:
        raise DomainError("catenoid neck parameter must be positive")
    text = _CATENOID_CONFIG.format(c=f"{c:g}", c2=f"{c * c!r}", r_max=f"{float(r_max)!r}")
    return parse_scenario(text)


def builtin_catalog():
    """The built-in scenarios: plane, catenoid(c=1), h2-in-h3."""
    return [
        parse_scenario(_PLANE_CONFIG),
        catenoid_scenario(1.0),
        parse_scenario(_H2H3_CONFIG),
    ]


def catalog_scenario(name):
    for sc in builtin_catalog():
        if sc.name == name:
            return sc
    raise ConfigError(f"no catalog scenario named '{name}'")


# ---------------------------------------------------------------------------
# config parsing / serialization

_SECTIONS = ("surface", "extrinsic", "ambient")
_KEYS = {
    "surface": ("name", "f", "r_max", "growth", "neck_centered", "stable_claim"),
    "extrinsic": ("h_sq", "ric_nn", "tangent_sec", "scalar_curvature"),
    "ambient": ("scalar_floor", "sectional_floor", "dimension", "ambient_hyperbolic"),
}
_REQUIRED = {"surface": ("f", "r_max"), "extrinsic": ("h_sq", "ric_nn"), "ambient": ()}


def _parse_bool(value, line):
    if value.lower() in ("true", "1", "yes"):
        return True
    if value.lower() in ("false", "0", "no"):
        return False
    raise ScenarioParseError(f"expected boolean, got '{value}'", line)


def _parse_growth(value, line):
    parts = value.split()
    if len(parts) != 2 or parts[0] not in ("exp", "poly"):
        raise ScenarioParseError(f"growth must be 'exp RATE' or 'poly DEGREE', got '{value}'", line)
    try:
        return (parts[0], float(parts[1]))
    except ValueError:
        raise ScenarioParseError(f"bad growth rate '{parts[1]}'", line) from None


def parse_scenario(config_text: str) -> Scenario:
    """Parse and fully validate a scenario config."""
    sections = {name: {} for name in _SECTIONS}
    current = None
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTIONS:
                raise ScenarioParseError(f"unknown section '[{current}]'", lineno, raw.index("[") + 1)
            continue
        if "=" not in line:
            raise ScenarioParseError("expected 'key = value'", lineno, 1)
        if current is None:
            raise ScenarioParseError("key outside of any section", lineno, 1)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS[current]:
            raise ScenarioParseError(f"unknown key '{key}' in [{current}]", lineno, raw.index(key) + 1)
        if key in sections[current]:
            raise ScenarioParseError(f"duplicate key '{key}'", lineno)
        sections[current][key] = (value, lineno)

    for name in _SECTIONS:
        for key in _REQUIRED[name]:
            if key not in sections[name]:
                raise ScenarioParseError(f"missing required key '{key}' in [{name}]")

    surf_raw = sections["surface"]
    ext_raw = sections["extrinsic"]
    amb_raw = sections["ambient"]

    def get(raw, key, default=None):
        return raw[key][0] if key in raw else default

    try:
        r_max = float(get(surf_raw, "r_max"))
    except ValueError:
        raise ScenarioParseError("r_max must be a number", surf_raw["r_max"][1]) from None
    growth = _parse_growth(*surf_raw["growth"]) if "growth" in surf_raw else None
    surface = WarpedSurface.from_expression(
        name=get(surf_raw, "name", "custom"),
        text=get(surf_raw, "f"),
        r_max=r_max,
        neck_centered=_parse_bool(*surf_raw["neck_centered"]) if "neck_centered" in surf_raw else False,
        growth=growth,
        validate=False,
    )

    exprs = {}
    for key in ("h_sq", "ric_nn", "tangent_sec", "scalar_curvature"):
        if key in ext_raw:
            exprs[key] = parse_expression(ext_raw[key][0])
    if "tangent_sec" not in exprs:
        # default to Gauss-consistency: tangent_sec = K + |h|^2/2
        h_sq = exprs["h_sq"]
        surf = surface

        def tangent_default(r, _h=h_sq, _s=surf):
            return -np.asarray(_s.d2(r)) / np.asarray(_s.f(r)) + 0.5 * np.asarray(_h(r))

        exprs["tangent_sec"] = tangent_default
    extrinsic = ExtrinsicProfile(
        h_sq=exprs["h_sq"],
        ric_nn=exprs["ric_nn"],
        tangent_sec=exprs["tangent_sec"],
        scalar_curvature=exprs.get("scalar_curvature"),
        texts={k: ext_raw[k][0] for k in ext_raw},
    )

    def floats(raw, key):
        if key not in raw:
            return None
        try:
            return float(raw[key][0])
        except ValueError:
            raise ScenarioParseError(f"{key} must be a number", raw[key][1]) from None

    ambient = AmbientBounds(
        scalar_floor=floats(amb_raw, "scalar_floor"),
        sectional_floor=floats(amb_raw, "sectional_floor"),
        dimension=int(floats(amb_raw, "dimension") or 3),
        ambient_hyperbolic=_parse_bool(*amb_raw["ambient_hyperbolic"]) if "ambient_hyperbolic" in amb_raw else False,
    )

    scenario = Scenario(
        surface=surface,
        extrinsic=extrinsic,
        ambient=ambient,
        stable_claim=_parse_bool(*surf_raw["stable_claim"]) if "stable_claim" in surf_raw else False,
    )
    return scenario.validate()


def serialize_scenario(scenario: Scenario) -> str:
    """Byte-deterministic config text reproducing the scenario."""
    surf = scenario.surface
    if surf.expr_text is None:
        raise ConfigError("only expression-backed scenarios serialize")
    lines = ["[surface]"]
    lines.append(f"name = {surf.name}")
    lines.append(f"f = {surf.expr_text}")
    lines.append(f"r_max = {surf.r_max!r}")
    if surf.growth is not None:
        lines.append(f"growth = {surf.growth[0]} {surf.growth[1]:g}")
    lines.append(f"neck_centered = {str(surf.neck_centered).lower()}")
    lines.append(f"stable_claim = {str(scenario.stable_claim).lower()}")
    lines.append("[extrinsic]")
    for key in ("h_sq", "ric_nn", "tangent_sec", "scalar_curvature"):
        if key in scenario.extrinsic.texts:
            lines.append(f"{key} = {scenario.extrinsic.texts[key]}")
    lines.append("[ambient]")
    amb = scenario.ambient
    if amb.scalar_floor is not None:
        lines.append(f"scalar_floor = {amb.scalar_floor!r}")
    if amb.sectional_floor is not None:
        lines.append(f"sectional_floor = {amb.sectional_floor!r}")
    lines.append(f"dimension = {amb.dimension}")
    lines.append(f"ambient_hyperbolic = {str(amb.ambient_hyperbolic).lower()}")
    return "\n".join(lines) + "\n"
