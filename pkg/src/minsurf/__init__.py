"""Verification lab for the geometry of stable minimal surfaces.

Model surfaces are rotationally symmetric (warped products) with declared
extrinsic data; the package computes geodesic-ball profiles, stability
spectra, bottom-of-spectrum bounds, and radial Green's functions, and checks
the corresponding identities and inequalities numerically at desk scale.
"""

__version__ = "0.1.0"

from .surfaces import (  # noqa: F401
    AmbientBounds,
    ExtrinsicProfile,
    Scenario,
    WarpedSurface,
    builtin_catalog,
    catalog_scenario,
    catenoid_scenario,
    eval_warp,
    gauss_curvature,
    gauss_equation_residual,
    parse_scenario,
    serialize_scenario,
)
