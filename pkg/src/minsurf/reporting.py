"""Verification suites, manifests, and deterministic reports.

A run manifest selects scenarios and suites plus numeric parameters; the
runner executes every selected check and emits VerificationRecords sorted by
(suite, scenario, check) regardless of execution order.  Serialized reports
exclude wall-clock fields, so two runs of one manifest are byte-identical.

Outcomes are four-valued: pass, fail (inequality/identity violated),
inapplicable (hypotheses not met; never an error), and error (numeric or
configuration breakdown).  Exit code contract: 0 all pass-or-inapplicable,
1 any fail, 2 any error.
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import balls, greens, mesh, spectrum, stability
from .errors import (
    ConfigError,
    DomainError,
    Inapplicable,
    MinsurfError,
    NumericError,
    ScenarioParseError,
    VerificationFailure,
)
from .surfaces import builtin_catalog

SUITES = ("gauss", "fiala", "area-bounds", "stability", "lemma-m", "spectrum", "green", "mesh")

DEFAULT_PARAMS = {
    "seed": 20240801,
    "n_random": 100,
    "fiala_n": 1024,
    "profile_n": 512,
    "eigen_mesh_n": 2048,
    "lambda_mesh_n": 4096,
    "gauss_tol": 1e-8,
    "fiala_tol": 1e-6,
    "inequality_tol": 1e-8,
    "flux_tol": 1e-10,
    "kato_tol": 1e-8,
    "coarea_rel_tol": 1e-6,
    "green_q": 0.75,
    "green_R": 20.0,
    "green_eps": 0.01,
    "decay_slack": 0.05,
    "growth_slack": 0.02,
    "flat_R": math.exp(20.0),
    "mesh_resolution": 96,
    "mesh_rel_tol": 0.02,
    "mesh_chi_max": 1,
    "mesh_C_h": 20.0,
}

_PARAM_RANGES = {
    "n_random": (1, 100000),
    "fiala_n": (64, 1 << 20),
    "profile_n": (16, 1 << 20),
    "eigen_mesh_n": (128, 1 << 20),
    "lambda_mesh_n": (128, 1 << 20),
    "green_q": (0.500001, 10.0),
    "green_R": (2.0, 1e6),
    "green_eps": (1e-12, 0.999),
    "mesh_resolution": (16, 4096),
}


@dataclass(frozen=True)
class RunManifest:
    scenarios: tuple
    suites: tuple
    params: dict = field(default_factory=dict)
    out_dir: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        for s in self.suites:
            if s not in SUITES:
                raise ConfigError(f"unknown suite '{s}' (known: {', '.join(SUITES)})")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        for key, value in self.params.items():
            if key not in DEFAULT_PARAMS:
                raise ConfigError(f"unknown parameter '{key}'")
            if key in _PARAM_RANGES:
                lo, hi = _PARAM_RANGES[key]
                if not lo <= value <= hi:
                    raise ConfigError(f"parameter {key}={value!r} outside [{lo}, {hi}]")

    def param(self, key):
        return self.params.get(key, DEFAULT_PARAMS[key])

    def serialize(self):
        lines = ["[run]"]
        lines.append("scenarios = " + ",".join(self.scenarios))
        lines.append("suites = " + ",".join(self.suites))
        lines.append("[params]")
        for key in sorted(self.params):
            lines.append(f"{key} = {self.params[key]!r}")
        lines.append("[output]")
        if self.out_dir is not None:
            lines.append(f"dir = {self.out_dir}")
        lines.append(f"format = {self.fmt}")
        return "\n".join(lines) + "\n"


def parse_manifest(text: str) -> RunManifest:
    """Manifest text mirrors the scenario config format."""
    sections = {"run": {}, "params": {}, "output": {}}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in sections:
                raise ScenarioParseError(f"unknown manifest section '[{current}]'", lineno)
            continue
        if "=" not in line or current is None:
            raise ScenarioParseError("expected 'key = value' inside a section", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        sections[current][key] = (value, lineno)

    run = sections["run"]
    scenarios = tuple(s.strip() for s in run.get("scenarios", ("", 0))[0].split(",") if s.strip())
    suites = tuple(s.strip() for s in run.get("suites", ("", 0))[0].split(",") if s.strip())
    if not scenarios:
        raise ScenarioParseError("manifest selects no scenarios")
    if not suites:
        raise ScenarioParseError("manifest selects no suites")
    params = {}
    for key, (value, lineno) in sections["params"].items():
        if key not in DEFAULT_PARAMS:
            raise ScenarioParseError(f"unknown parameter '{key}'", lineno)
        try:
            params[key] = type(DEFAULT_PARAMS[key])(float(value)) if key != "seed" else int(value)
        except ValueError:
            raise ScenarioParseError(f"bad numeric value for '{key}'", lineno) from None
    out = sections["output"]
    return RunManifest(
        scenarios=scenarios,
        suites=suites,
        params=params,
        out_dir=out.get("dir", (None, 0))[0],
        fmt=out.get("format", ("csv", 0))[0],
    )


@dataclass(frozen=True)
class VerificationRecord:
    suite: str
    scenario: str
    check: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    status: str  # pass | fail | inapplicable | error
    runtime: float = 0.0
    note: str = ""

    @property
    def passed(self):
        return self.status == "pass"

    def sort_key(self):
        return (self.suite, self.scenario, self.check)


def _record(suite, scenario, check, lhs, rhs, tolerance, t0, note=""):
    margin = rhs - lhs
    status = "pass" if margin >= -tolerance else "fail"
    return VerificationRecord(
        suite=suite,
        scenario=scenario,
        check=check,
        lhs=float(lhs),
        rhs=float(rhs),
        margin=float(margin),
        tolerance=float(tolerance),
        status=status,
        runtime=time.perf_counter() - t0,
        note=note,
    )


def _special(suite, scenario, check, status, t0, note=""):
    return VerificationRecord(
        suite=suite,
        scenario=scenario,
        check=check,
        lhs=math.nan,
        rhs=math.nan,
        margin=math.nan,
        tolerance=0.0,
        status=status,
        runtime=time.perf_counter() - t0,
        note=note,
    )


def records_to_csv(records):
    buf = io.StringIO()
    buf.write("suite,scenario,check,lhs,rhs,margin,tolerance,status,note\n")
    for r in records:
        note = r.note.replace(",", ";")
        buf.write(
            f"{r.suite},{r.scenario},{r.check},{r.lhs!r},{r.rhs!r},{r.margin!r},{r.tolerance!r},{r.status},{note}\n"
        )
    return buf.getvalue()


def records_to_json(records):
    return json.dumps(
        [
            {
                "suite": r.suite,
                "scenario": r.scenario,
                "check": r.check,
                "lhs": None if math.isnan(r.lhs) else r.lhs,
                "rhs": None if math.isnan(r.rhs) else r.rhs,
                "margin": None if math.isnan(r.margin) else r.margin,
                "tolerance": r.tolerance,
                "status": r.status,
                "note": r.note,
            }
            for r in records
        ],
        sort_keys=True,
        indent=1,
    )


def exit_code(records):
    if any(r.status == "error" for r in records):
        return 2
    if any(r.status == "fail" for r in records):
        return 1
    return 0


# ---------------------------------------------------------------------------
# suite implementations

def _suite_gauss(scenario, params):
    t0 = time.perf_counter()
    rng = np.random.default_rng(params("seed"))
    r = rng.uniform(0.0, scenario.surface.r_max, params("n_random"))
    r = np.where(r <= 0, scenario.surface.r_max * 0.5, r)
    from .surfaces import gauss_equation_residual

    worst = float(np.max(np.abs(gauss_equation_residual(scenario, r))))
    worst_frame = float(np.max(np.abs(gauss_equation_residual(scenario, r, form="frame"))))
    yield _record("gauss", scenario.name, "ambient-form", worst, 0.0, params("gauss_tol"), t0)
    yield _record("gauss", scenario.name, "frame-form", worst_frame, 0.0, params("gauss_tol"), t0)


def _suite_fiala(scenario, params):
    t0 = time.perf_counter()
    r_cap = min(scenario.surface.r_max, 5.0)
    prof = balls.profile(scenario, r_max=r_cap, n_grid=params("fiala_n"), spacing="uniform")
    res = balls.fiala_residual(prof)
    yield _record("fiala", scenario.name, "identity", res.max_abs, 0.0, params("fiala_tol"), t0)
    t0 = time.perf_counter()
    direction = 0.0 if res.direction_ok else float(np.max(res.residual))
    yield _record("fiala", scenario.name, "direction", direction, 0.0, params("fiala_tol"), t0)
    t0 = time.perf_counter()
    hess = balls.hessian_comparison_check(prof)
    if hess.status == "inapplicable":
        yield _special("fiala", scenario.name, "hessian-comparison", "inapplicable", t0, hess.detail)
    else:
        yield _record(
            "fiala", scenario.name, "hessian-comparison", 0.0 if hess.status == "pass" else 1.0, 0.0, 0.0, t0,
            hess.detail,
        )


def _suite_area_bounds(scenario, params):
    amb = scenario.ambient
    flat_ambient = (amb.alpha_scalar in (0.0,)) and (amb.alpha_sect in (0.0, None))
    cases = []
    if flat_ambient:
        cases.append("flat")
    if amb.scalar_floor is not None and amb.alpha_scalar > 0:
        cases.append("scalar")
    if amb.sectional_floor is not None and amb.alpha_sect > 0:
        cases.append("sectional")
    for case in cases:
        t0 = time.perf_counter()
        try:
            if case == "flat":
                R = params("flat_R")
                r_cap = min(scenario.surface.r_max, math.sqrt(R))
                prof = balls.profile(scenario, r_max=r_cap, n_grid=params("profile_n"), spacing="uniform")
                rep = balls.area_bound_report(prof, "flat", R_flat=R)
            else:
                r_cap = min(scenario.surface.r_max, 20.0)
                prof = balls.profile(scenario, r_max=r_cap, n_grid=params("profile_n"), spacing="uniform")
                rep = balls.area_bound_report(prof, case)
            worst = float(np.min(rep.margin))
            yield _record(
                "area-bounds", scenario.name, f"{case}-bound", -worst, 0.0,
                1e-9 * max(1.0, float(np.max(rep.bound))), t0,
                rep.detail if rep.passed else rep.detail + "; fit unstable" if rep.fitted_constant else rep.detail,
            )
            if rep.fitted_constant is not None and not rep.passed:
                yield _special("area-bounds", scenario.name, f"{case}-fit-stability", "fail", t0, rep.detail)
        except Inapplicable as exc:
            yield _special("area-bounds", scenario.name, f"{case}-bound", "inapplicable", t0, str(exc))
    if not cases:
        yield _special("area-bounds", scenario.name, "bounds", "inapplicable", time.perf_counter(), "no case applies")
    t0 = time.perf_counter()
    if scenario.surface.r_max >= 10.0 and scenario.stable_claim and amb.alpha_sect == 1.0:
        prof = balls.profile(
            scenario, r_max=min(scenario.surface.r_max, 30.0), n_grid=params("profile_n"), spacing="uniform"
        )
        rate = balls.growth_rate(prof)
        yield _record(
            "area-bounds", scenario.name, "growth-rate", rate.rate, balls.RATE_SECTIONAL,
            params("growth_slack"), t0, f"confidence={rate.confidence:.2e}",
        )


def _suite_stability(scenario, params):
    t0 = time.perf_counter()
    radius = stability.stability_radius(scenario, mesh_n=params("eigen_mesh_n"))
    full = radius >= scenario.surface.r_max - 1e-6
    consistent = full == scenario.stable_claim
    yield _record(
        "stability", scenario.name, "claim-consistency", 0.0 if consistent else 1.0, 0.0, 0.0, t0,
        f"radius={radius!r}",
    )
    if scenario.stable_claim:
        t0 = time.perf_counter()
        worst = math.inf
        R = min(scenario.surface.r_max, 10.0)
        for phi in (stability.linear_cutoff(R), stability.poly_cutoff(R), stability.log_cutoff(R)):
            worst = min(worst, stability.quadratic_form(scenario, phi).value)
        yield _record("stability", scenario.name, "quadratic-form-nonneg", -worst, 0.0, params("inequality_tol"), t0)


def _suite_lemma_m(scenario, params):
    if not scenario.stable_claim or scenario.neck_centered:
        yield _special("lemma-m", scenario.name, "sides", "inapplicable", time.perf_counter(), "needs stable ball")
        return
    R = min(scenario.surface.r_max, 10.0)
    tol = params("inequality_tol")
    for case in ("scalar", "sectional"):
        t0 = time.perf_counter()
        try:
            sides = stability.lemma_m_sides(scenario, stability.linear_cutoff(R), R, case)
            yield _record("lemma-m", scenario.name, f"lemma-{case}-linear", sides.lhs, sides.rhs, tol, t0)
            sides = stability.corollary_c1_sides(scenario, stability.poly_cutoff(R), R, case)
            yield _record("lemma-m", scenario.name, f"corollary-{case}-poly", sides.lhs, sides.rhs, tol, t0)
            sides = stability.corollary_c1_sides(scenario, stability.log_cutoff(R), R, case)
            yield _record("lemma-m", scenario.name, f"corollary-{case}-log", sides.lhs, sides.rhs, tol, t0)
        except Inapplicable as exc:
            yield _special("lemma-m", scenario.name, f"lemma-{case}", "inapplicable", t0, str(exc))
    t0 = time.perf_counter()
    try:
        ec = stability.exp_cutoff_sides(scenario, min(5.0, R), min(1.0, R / 2))
        yield _record("lemma-m", scenario.name, "exp-annulus", ec.annulus.lhs, ec.annulus.rhs, tol, t0)
        yield _record("lemma-m", scenario.name, "exp-area-corollary", ec.area_bound.lhs, ec.area_bound.rhs, tol, t0)
    except Inapplicable as exc:
        yield _special("lemma-m", scenario.name, "exp-annulus", "inapplicable", t0, str(exc))


def _suite_spectrum(scenario, params):
    t0 = time.perf_counter()
    report = spectrum.spectrum_report(scenario, mesh_n=params("lambda_mesh_n"), n_grid=params("profile_n"))
    yield _record(
        "spectrum", scenario.name, "ordering", 0.0 if report.orderings_pass else 1.0, 0.0, 0.0, t0,
        "; ".join(report.violations) if report.violations else f"lambda0={report.lambda0!r}",
    )
    for entry in report.upper_bounds:
        t0 = time.perf_counter()
        if not entry.applicable:
            yield _special("spectrum", scenario.name, f"upper-{entry.bound_id}", "inapplicable", t0, entry.note)
        else:
            yield _record(
                "spectrum", scenario.name, f"upper-{entry.bound_id}",
                report.lambda0 - report.uncertainty, float(entry.value), entry.slack, t0,
            )
    for entry in report.lower_bounds:
        t0 = time.perf_counter()
        if not entry.applicable:
            yield _special("spectrum", scenario.name, f"lower-{entry.bound_id}", "inapplicable", t0, entry.note)
        else:
            yield _record(
                "spectrum", scenario.name, f"lower-{entry.bound_id}",
                float(entry.value), report.lambda0 + report.uncertainty, entry.slack, t0,
            )


def _suite_green(scenario, params):
    t0 = time.perf_counter()
    status = greens.nonparabolicity_test(scenario.surface)
    yield _special("green", scenario.name, "nonparabolicity", "pass", t0, status.status)
    if status.status != "nonparabolic":
        yield _special(
            "green", scenario.name, "radial-green", "inapplicable", time.perf_counter(),
            f"surface is {status.status}",
        )
        return
    t0 = time.perf_counter()
    gp = greens.green_radial(scenario.surface)
    sample = np.linspace(gp.grid[0], gp.grid[-1], 33)
    flux = float(np.max(np.abs(greens.flux_residual(gp, sample))))
    yield _record("green", scenario.name, "flux-normalization", flux, 0.0, params("flux_tol"), t0)
    t0 = time.perf_counter()
    interior = np.linspace(max(0.5, gp.grid[0]), 0.9 * gp.grid[-1], 9)
    kato = float(np.max(np.abs(greens.kato_bochner_residual(gp, interior))))
    yield _record("green", scenario.name, "kato-bochner-saturation", kato, 0.0, params("kato_tol"), t0)
    t0 = time.perf_counter()
    logb = float(np.min(greens.log_bochner_residual(gp, interior)))
    yield _record("green", scenario.name, "log-bochner-nonneg", -logb, 0.0, params("kato_tol"), t0)
    t0 = time.perf_counter()
    rng = np.random.default_rng(params("seed") + 1)
    worst_rel = 0.0
    weights = [lambda t: np.ones_like(np.asarray(t)), lambda t: 1.0 / np.asarray(t), lambda t: np.asarray(t)]
    hi_cap = gp.G_at(gp.grid[0] * 2.0)
    for i in range(3):
        a = rng.uniform(gp.G[-1] * 2.0, hi_cap * 0.5)
        b = rng.uniform(a * 1.5, hi_cap)
        try:
            check = greens.coarea_identity_check(gp, a, b, weights[i % 3], rel_tol=params("coarea_rel_tol"))
            worst_rel = max(worst_rel, check.rel_error)
        except VerificationFailure as exc:
            worst_rel = max(worst_rel, exc.worst)
    yield _record("green", scenario.name, "coarea-identity", worst_rel, 0.0, params("coarea_rel_tol"), t0)
    t0 = time.perf_counter()
    R_green = min(params("green_R"), scenario.surface.r_max / 2.0)
    lg = greens.lemma_g_partial_integral(gp, params("green_q"), R_green)
    lg_half = greens.lemma_g_partial_integral(gp, params("green_q"), R_green / 2.0)
    # convergence trend: region-doubling increments shrink (Cauchy behavior)
    yield _record(
        "green", scenario.name, "weighted-gradient-cauchy",
        lg.quartic_increment, lg_half.quartic_increment, 0.0, t0,
        f"I({R_green:g})={lg.quartic!r}",
    )
    t0 = time.perf_counter()
    cap = min(scenario.surface.r_max, 30.0)
    lam0 = spectrum.lambda0_estimate(scenario.surface, spectrum.default_radii(cap), mesh_n=params("lambda_mesh_n"))
    try:
        rates = greens.decay_rate(gp, lambda0=lam0.value)
        worst_rate = min(rates.g2_rate, rates.grad2_rate)
        yield _record(
            "green", scenario.name, "tail-decay-rate",
            2.0 * math.sqrt(lam0.value) - params("decay_slack"), worst_rate, 0.0, t0,
            f"g2={rates.g2_rate!r}; grad2={rates.grad2_rate!r}",
        )
    except VerificationFailure as exc:
        yield _special("green", scenario.name, "tail-decay-rate", "fail", t0, str(exc))
    if scenario.stable_claim and scenario.surface.r_max >= params("green_R") + 1.0:
        t0 = time.perf_counter()
        pg = greens.poincare_green_check(
            scenario, params("green_eps"), params("green_R"), lambda0=lam0.value
        )
        yield _record(
            "green", scenario.name, "poincare-quotient",
            pg.lambda0 - 1e-3, pg.rayleigh_quotient, 0.0, t0,
            f"witness={pg.divergence_witness!r}",
        )


def _suite_mesh(scenario, params):
    # mesh checks are catalog-level (flat grid, catenoid, sphere); they run
    # once, attached to the scenario that models the catenoid
    if scenario.name != "catenoid(c=1)":
        yield _special("mesh", scenario.name, "cross-validation", "inapplicable", time.perf_counter(),
                       "mesh suite runs on the catenoid scenario")
        return
    res = int(params("mesh_resolution"))
    t0 = time.perf_counter()
    cat = mesh.generate_catenoid_mesh(1.0, 3.5, res)
    ring = mesh.catenoid_neck_ring(cat, res)
    fld = mesh.geodesic_distance(cat, ring)
    grid = np.linspace(0.5, 3.0, 26)
    dprof = mesh.discrete_profile(fld, grid)
    aprof_L = 4.0 * np.pi * np.asarray(scenario.surface.f(grid))
    from .quadrature import grid_cumulative

    aprof_A = 4.0 * np.pi * grid_cumulative(scenario.surface.f, np.concatenate([[0.0], grid]))[1:]
    rel = max(
        float(np.max(np.abs(dprof.length - aprof_L) / aprof_L)),
        float(np.max(np.abs(dprof.area - aprof_A) / aprof_A)),
    )
    yield _record("mesh", scenario.name, "cross-validation", rel, 0.0, params("mesh_rel_tol"), t0,
                  f"faces={cat.n_faces}; h={fld.h!r}")
    t0 = time.perf_counter()
    fr = mesh.fiala_discrete_check(dprof, chi_max=params("mesh_chi_max"), C_h=params("mesh_C_h"))
    yield _record("mesh", scenario.name, "fiala-catenoid", 0.0 if fr.passed else -float(np.min(fr.margins)),
                  0.0, 0.0, t0, f"tol_discrete={fr.tol_discrete!r}")
    t0 = time.perf_counter()
    g = mesh.generate_grid_mesh(65, 2.0)
    fldg = mesh.geodesic_distance(g, (65 * 65) // 2)
    profg = mesh.discrete_profile(fldg, np.linspace(0.1, 0.8, 16))
    frg = mesh.fiala_discrete_check(profg, chi_max=params("mesh_chi_max"), C_h=params("mesh_C_h"))
    yield _record("mesh", scenario.name, "fiala-flat", 0.0 if frg.passed else -float(np.min(frg.margins)),
                  0.0, 0.0, t0)
    t0 = time.perf_counter()
    sph = mesh.generate_sphere_mesh(96)
    defect_gap = abs(float(sph.angle_defects().sum()) - 4.0 * math.pi)
    yield _record("mesh", scenario.name, "gauss-bonnet-sphere", defect_gap, 0.0, 1e-9, t0)
    flds = mesh.geodesic_distance(sph, 0)
    profs = mesh.discrete_profile(flds, np.linspace(0.3, math.pi * 0.85, 24))
    frs = mesh.fiala_discrete_check(profs, chi_max=params("mesh_chi_max"), C_h=params("mesh_C_h"))
    yield _record("mesh", scenario.name, "fiala-sphere", 0.0 if frs.passed else -float(np.min(frs.margins)),
                  0.0, 0.0, t0)


_SUITE_FN = {
    "gauss": _suite_gauss,
    "fiala": _suite_fiala,
    "area-bounds": _suite_area_bounds,
    "stability": _suite_stability,
    "lemma-m": _suite_lemma_m,
    "spectrum": _suite_spectrum,
    "green": _suite_green,
    "mesh": _suite_mesh,
}


def run(manifest: RunManifest, flush=None):
    """Execute the manifest; returns (records, exit_code).

    `flush`, when given, is called with the partial record list after every
    (suite, scenario) cell so interrupted runs still leave a report behind.
    """
    catalog = {sc.name: sc for sc in builtin_catalog()}
    scenarios = []
    for name in manifest.scenarios:
        if name not in catalog:
            raise ConfigError(f"unknown scenario '{name}' (catalog: {', '.join(sorted(catalog))})")
        scenarios.append(catalog[name])

    records = []
    for suite in manifest.suites:
        fn = _SUITE_FN[suite]
        for scenario in scenarios:
            t0 = time.perf_counter()
            try:
                records.extend(fn(scenario, manifest.param))
            except Inapplicable as exc:
                records.append(_special(suite, scenario.name, "suite", "inapplicable", t0, str(exc)))
            except (NumericError, ConfigError, DomainError) as exc:
                records.append(_special(suite, scenario.name, "suite", "error", t0, str(exc)))
            except VerificationFailure as exc:
                records.append(_special(suite, scenario.name, "suite", "fail", t0, str(exc)))
            except MinsurfError as exc:
                records.append(_special(suite, scenario.name, "suite", "error", t0, str(exc)))
            if flush is not None:
                flush(sorted(records, key=VerificationRecord.sort_key))
    records.sort(key=VerificationRecord.sort_key)
    return records, exit_code(records)


def emit_plot_data(records, manifest: RunManifest, out_dir):
    """Profile CSVs plus an area-bound overlay per stable scenario."""
    import pathlib

    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    catalog = {sc.name: sc for sc in builtin_catalog()}
    for name in manifest.scenarios:
        scenario = catalog[name]
        r_cap = min(scenario.surface.r_max, 20.0)
        prof = balls.profile(scenario, r_max=r_cap, n_grid=manifest.param("profile_n"), spacing="uniform")
        path = out / f"profile_{_slug(name)}.csv"
        path.write_text(prof.to_csv())
        written.append(str(path))
        lines = ["r,A,pi_r_sq,bound"]
        if scenario.stable_claim and scenario.ambient.alpha_sect == 1.0:
            rep = balls.area_bound_report(prof, "sectional")
            bound = rep.bound
        else:
            bound = np.pi * prof.grid**2
        for i in range(len(prof.grid)):
            lines.append(f"{prof.grid[i]!r},{prof.area[i]!r},{np.pi * prof.grid[i] ** 2!r},{bound[i]!r}")
        path = out / f"overlay_{_slug(name)}.csv"
        path.write_text("\n".join(lines) + "\n")
        written.append(str(path))
    return written


def _slug(name):
    return "".join(ch if ch.isalnum() or ch in "-_" else "-" for ch in name)


def write_report(records, manifest: RunManifest, out_dir):
    import pathlib

    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if manifest.fmt == "json":
        path = out / "report.json"
        path.write_text(records_to_json(records))
    else:
        path = out / "report.csv"
        path.write_text(records_to_csv(records))
    return str(path)
