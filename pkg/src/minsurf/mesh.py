"""Triangle-mesh backend: discrete cross-validation of the ball profiles.

Distances are edge-graph shortest paths improved by one ordered pass of
planar triangle unfolding; iso-level lengths and sublevel areas come from
linear interpolation of the distance field inside each triangle.  Discrete
curvature is the vertex angle defect.  The hot loops live in `_kernels`
(compiled extension with a pure-Python fallback).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, NumericError, ScenarioParseError, VerificationFailure


class MeshTopologyError(ScenarioParseError):
    pass


@dataclass(frozen=True)
class TriangleMesh:
    """Immutable triangle mesh with precomputed connectivity.

    `edges` are sorted vertex pairs; `edge_face_count[e]` distinguishes
    boundary (1) from interior (2) edges.  `mixed_area` is the per-vertex
    Voronoi-style area (obtuse triangles split 1/2-1/4-1/4).
    """

    vertices: np.ndarray
    faces: np.ndarray
    edges: np.ndarray
    edge_face_count: np.ndarray
    boundary_vertices: np.ndarray
    mixed_area: np.ndarray
    face_areas: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    csr_weights: np.ndarray
    edge_lengths: np.ndarray

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def is_closed(self):
        return bool(np.all(self.edge_face_count == 2))

    @property
    def max_edge_length(self):
        return float(np.max(self.edge_lengths))

    def total_area(self):
        return float(np.sum(self.face_areas))

    def angle_defects(self):
        """2 pi minus the incident-angle sum at interior vertices, pi minus at
        boundary vertices (returned for all; callers filter)."""
        angles = _corner_angles(self.vertices, self.faces)
        acc = np.zeros(self.n_vertices)
        np.add.at(acc, self.faces.ravel(), angles.ravel())
        defect = 2.0 * np.pi - acc
        defect[self.boundary_vertices] = np.pi - acc[self.boundary_vertices]
        return defect

    def boundary_loop_count(self):
        boundary_edges = self.edges[self.edge_face_count == 1]
        if len(boundary_edges) == 0:
            return 0
        # walk boundary cycles
        nbr = {}
        for a, b in boundary_edges:
            nbr.setdefault(int(a), []).append(int(b))
            nbr.setdefault(int(b), []).append(int(a))
        seen = set()
        loops = 0
        for start in sorted(nbr):
            if start in seen:
                continue
            loops += 1
            stack = [start]
            while stack:
                u = stack.pop()
                if u in seen:
                    continue
                seen.add(u)
                stack.extend(v for v in nbr[u] if v not in seen)
        return loops


def _corner_angles(vertices, faces):
    p = vertices[faces]  # (F, 3, 3)
    angles = np.empty((len(faces), 3))
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        nu = np.linalg.norm(u, axis=1)
        nv = np.linalg.norm(v, axis=1)
        cosang = np.clip(np.einsum("ij,ij->i", u, v) / (nu * nv), -1.0, 1.0)
        angles[:, k] = np.arccos(cosang)
    return angles


def build_mesh(vertices, faces, where="mesh"):
    """Validate connectivity and assemble the immutable mesh structure."""
    vertices = np.asarray(vertices, dtype=float)
    faces = np.asarray(faces, dtype=np.int64)
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise MeshTopologyError(f"{where}: faces must be vertex index triples")
    if np.any(faces < 0) or np.any(faces >= len(vertices)):
        bad = int(np.argmax((faces < 0) | (faces >= len(vertices))))
        raise MeshTopologyError(f"{where}: face {bad} references a missing vertex")

    p = vertices[faces]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    face_areas = 0.5 * np.linalg.norm(cross, axis=1)
    if np.any(face_areas <= 1e-14):
        bad = int(np.argmax(face_areas <= 1e-14))
        raise MeshTopologyError(f"{where}: degenerate face {bad} (area <= 1e-14)")

    # undirected edges with face counts
    raw = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    raw_sorted = np.sort(raw, axis=1)
    edges, counts = np.unique(raw_sorted, axis=0, return_counts=True)
    if np.any(counts > 2):
        bad = edges[np.argmax(counts > 2)]
        raise MeshTopologyError(f"{where}: non-manifold edge {tuple(int(x) for x in bad)} (> 2 faces)")

    boundary_mask = counts == 1
    boundary_vertices = np.unique(edges[boundary_mask]) if np.any(boundary_mask) else np.empty(0, dtype=np.int64)

    # CSR adjacency over undirected edges
    lengths = np.linalg.norm(vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
    deg = np.zeros(len(vertices), dtype=np.int64)
    np.add.at(deg, edges[:, 0], 1)
    np.add.at(deg, edges[:, 1], 1)
    indptr = np.zeros(len(vertices) + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    weights = np.empty(indptr[-1])
    cursor = indptr[:-1].copy()
    for (a, b), w in zip(edges, lengths):
        indices[cursor[a]] = b
        weights[cursor[a]] = w
        cursor[a] += 1
        indices[cursor[b]] = a
        weights[cursor[b]] = w
        cursor[b] += 1

    mesh = TriangleMesh(
        vertices=vertices,
        faces=faces,
        edges=edges,
        edge_face_count=counts,
        boundary_vertices=boundary_vertices,
        mixed_area=_mixed_area(vertices, faces, face_areas),
        face_areas=face_areas,
        indptr=indptr,
        indices=indices,
        csr_weights=weights,
        edge_lengths=lengths,
    )
    chi = mesh.euler_characteristic
    loops = mesh.boundary_loop_count()
    genus2 = 2 - loops - chi
    if genus2 < 0 or genus2 % 2:
        raise MeshTopologyError(f"{where}: Euler formula inconsistent (chi={chi}, boundary loops={loops})")
    return mesh


def _mixed_area(vertices, faces, face_areas):
    angles = _corner_angles(vertices, faces)
    p = vertices[faces]
    area = np.zeros(len(vertices))
    obtuse_any = np.any(angles > np.pi / 2, axis=1)
    # non-obtuse: Voronoi area from cotangents
    safe = ~obtuse_any
    if np.any(safe):
        idx = np.nonzero(safe)[0]
        for k in range(3):
            l_opp = np.linalg.norm(p[idx, (k + 1) % 3] - p[idx, (k + 2) % 3], axis=1)
            cot1 = 1.0 / np.tan(angles[idx, (k + 1) % 3])
            cot2 = 1.0 / np.tan(angles[idx, (k + 2) % 3])
            # Voronoi cell at corner k bounded by the two adjacent edges
            l1 = np.linalg.norm(p[idx, (k + 1) % 3] - p[idx, k], axis=1)
            l2 = np.linalg.norm(p[idx, (k + 2) % 3] - p[idx, k], axis=1)
            contrib = (l1**2 * cot2 + l2**2 * cot1) / 8.0
            np.add.at(area, faces[idx, k], contrib)
    if np.any(obtuse_any):
        idx = np.nonzero(obtuse_any)[0]
        for k in range(3):
            share = np.where(angles[idx, k] > np.pi / 2, 0.5, 0.25) * face_areas[idx]
            np.add.at(area, faces[idx, k], share)
    return area


# ---------------------------------------------------------------------------
# construction

def parse_obj(text: str) -> TriangleMesh:
    """Wavefront OBJ subset: `v x y z`, `f i j k ...` (1-based, fan
    triangulated), `#` comments.  Vertex order is preserved."""
    vertices = []
    faces = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "v":
            if len(parts) != 4:
                raise ScenarioParseError("vertex record needs 3 coordinates", lineno)
            try:
                vertices.append([float(x) for x in parts[1:]])
            except ValueError:
                raise ScenarioParseError("bad vertex coordinate", lineno) from None
        elif parts[0] == "f":
            if len(parts) < 4:
                raise ScenarioParseError("face record needs at least 3 indices", lineno)
            try:
                idx = [int(x) for x in parts[1:]]
            except ValueError:
                raise ScenarioParseError("face indices must be plain integers", lineno) from None
            if any(i == 0 for i in idx):
                raise ScenarioParseError("OBJ indices are 1-based; 0 is invalid", lineno)
            if any(i < 0 or i > len(vertices) for i in idx):
                raise ScenarioParseError("face index out of range", lineno)
            zero_based = [i - 1 for i in idx]
            for k in range(1, len(zero_based) - 1):
                faces.append([zero_based[0], zero_based[k], zero_based[k + 1]])
        else:
            raise ScenarioParseError(f"unsupported record '{parts[0]}'", lineno)
    if not faces:
        raise ScenarioParseError("no faces in OBJ input")
    return build_mesh(np.array(vertices), np.array(faces), where="obj")


def generate_catenoid_mesh(c=1.0, r_extent=3.5, resolution=64):
    """Embedded catenoid sampled on an (arclength, angle) grid.

    The meridian is uniform in signed arclength s with radius sqrt(c^2+s^2);
    meridian step is matched to the neck's angular step.  Cylinder topology
    (closed in angle), chi = 0.
    """
    if resolution < 16:
        raise DomainError("resolution must be at least 16")
    c = float(c)
    n_theta = int(resolution)
    n_s = max(3, int(round(2.0 * r_extent * n_theta / (2.0 * math.pi * c))) + 1)
    if n_s % 2 == 0:
        n_s += 1  # odd count keeps an exact vertex ring on the neck
    s = np.linspace(-r_extent, r_extent, n_s)
    theta = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    radius = np.sqrt(c * c + s * s)
    z = c * np.arcsinh(s / c)
    verts = np.empty((n_s * n_theta, 3))
    for i in range(n_s):
        verts[i * n_theta : (i + 1) * n_theta, 0] = radius[i] * np.cos(theta)
        verts[i * n_theta : (i + 1) * n_theta, 1] = radius[i] * np.sin(theta)
        verts[i * n_theta : (i + 1) * n_theta, 2] = z[i]
    faces = []
    mid = (n_s - 1) // 2
    for i in range(n_s - 1):
        for j in range(n_theta):
            a = i * n_theta + j
            b = i * n_theta + (j + 1) % n_theta
            a2 = (i + 1) * n_theta + j
            b2 = (i + 1) * n_theta + (j + 1) % n_theta
            if i < mid:
                # diagonal orientation mirrored across the neck so the mesh
                # (hence the distance field) is exactly s -> -s symmetric
                faces.append([a, b, a2])
                faces.append([b, b2, a2])
            else:
                faces.append([a, b, b2])
                faces.append([a, b2, a2])
    return build_mesh(verts, np.array(faces), where="catenoid")


def catenoid_neck_ring(mesh, resolution):
    """Vertex indices of the neck circle of a generated catenoid mesh."""
    n_theta = int(resolution)
    n_s = mesh.n_vertices // n_theta
    mid = (n_s - 1) // 2
    return np.arange(mid * n_theta, (mid + 1) * n_theta)


def generate_grid_mesh(n=33, size=1.0):
    """Flat square grid with one diagonal direction per cell."""
    xs = np.linspace(0.0, size, n)
    verts = np.array([[x, y, 0.0] for y in xs for x in xs])
    faces = []
    for j in range(n - 1):
        for i in range(n - 1):
            a = j * n + i
            b = j * n + i + 1
            c = (j + 1) * n + i
            d = (j + 1) * n + i + 1
            faces.append([a, b, d])
            faces.append([a, d, c])
    return build_mesh(verts, np.array(faces), where="grid")


def generate_sphere_mesh(resolution=48, radius=1.0):
    """Unit-style UV sphere with pole fans; closed, chi = 2."""
    n_theta = int(resolution)
    n_phi = max(3, n_theta // 2)
    phis = np.linspace(0.0, math.pi, n_phi + 2)[1:-1]
    theta = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    verts = [[0.0, 0.0, radius]]
    for ph in phis:
        for th in theta:
            verts.append(
                [radius * math.sin(ph) * math.cos(th), radius * math.sin(ph) * math.sin(th), radius * math.cos(ph)]
            )
    verts.append([0.0, 0.0, -radius])
    south = len(verts) - 1
    faces = []
    for j in range(n_theta):
        faces.append([0, 1 + j, 1 + (j + 1) % n_theta])
    for i in range(len(phis) - 1):
        base = 1 + i * n_theta
        nxt = base + n_theta
        for j in range(n_theta):
            a, b = base + j, base + (j + 1) % n_theta
            a2, b2 = nxt + j, nxt + (j + 1) % n_theta
            faces.append([a, b, b2])
            faces.append([a, b2, a2])
    base = 1 + (len(phis) - 1) * n_theta
    for j in range(n_theta):
        faces.append([south, base + (j + 1) % n_theta, base + j])
    return build_mesh(np.array(verts), np.array(faces), where="sphere")


# ---------------------------------------------------------------------------
# distance and profiles

@dataclass(frozen=True)
class DistanceField:
    mesh: TriangleMesh
    seeds: tuple
    dist: np.ndarray
    h: float  # max edge length; the accuracy scale

    @property
    def max_finite(self):
        finite = self.dist[np.isfinite(self.dist)]
        return float(np.max(finite)) if len(finite) else 0.0


def geodesic_distance(mesh: TriangleMesh, seed_vertex, unfold=True):
    """Distance field from a seed vertex (or several, e.g. a neck ring).

    Edge-graph relaxation (Dijkstra) improved by one ordered pass of
    triangle unfolding; the result is within O(h) of the true geodesic
    distance, h = max edge length (reported).
    """
    seeds = np.atleast_1d(np.asarray(seed_vertex, dtype=np.int64))
    if np.any(seeds < 0) or np.any(seeds >= mesh.n_vertices):
        raise DomainError("seed vertex out of range")
    dist = _kernels.dijkstra(mesh.indptr, mesh.indices, mesh.csr_weights, seeds, mesh.n_vertices)
    if unfold:
        p = mesh.vertices[mesh.faces]
        edge_len = np.stack(
            [
                np.linalg.norm(p[:, 1] - p[:, 2], axis=1),
                np.linalg.norm(p[:, 2] - p[:, 0], axis=1),
                np.linalg.norm(p[:, 0] - p[:, 1], axis=1),
            ],
            axis=1,
        )
        face_min = np.min(dist[mesh.faces], axis=1)
        order = np.argsort(face_min, kind="stable")
        dist = _kernels.unfold_pass(mesh.faces, edge_len, order, dist)
    return DistanceField(mesh=mesh, seeds=tuple(int(s) for s in seeds), dist=dist, h=mesh.max_edge_length)


@dataclass(frozen=True)
class DiscreteBallProfile:
    """Discrete L, A, and cumulative angle-defect curvature on a radius grid."""

    grid: np.ndarray
    length: np.ndarray
    area: np.ndarray
    total_curv: np.ndarray
    seed: tuple
    h: float
    truncated: bool

    def to_csv(self):
        buf = io.StringIO()
        buf.write("r,L,A,K_cum\n")
        for i in range(len(self.grid)):
            buf.write(f"{self.grid[i]!r},{self.length[i]!r},{self.area[i]!r},{self.total_curv[i]!r}\n")
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {
                "seed": list(self.seed),
                "h": self.h,
                "truncated": self.truncated,
                "r": self.grid.tolist(),
                "L": self.length.tolist(),
                "A": self.area.tolist(),
                "K_cum": self.total_curv.tolist(),
            },
            sort_keys=True,
        )


def discrete_profile(field: DistanceField, grid):
    """Level lengths, sublevel areas, and cumulative interior angle defect."""
    mesh = field.mesh
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise DomainError("grid must be positive and increasing")
    truncated = bool(grid[-1] > field.max_finite)
    coords = mesh.vertices[mesh.faces]
    L, A = _kernels.profile_sums(mesh.faces, coords, mesh.face_areas, field.dist, grid)
    defects = mesh.angle_defects()
    interior = np.ones(mesh.n_vertices, dtype=bool)
    interior[mesh.boundary_vertices] = False
    order = np.argsort(field.dist, kind="stable")
    sorted_d = field.dist[order]
    weights = np.where(interior[order], defects[order], 0.0)
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    pos = np.searchsorted(sorted_d, grid + 1e-12, side="left")
    K = cum[pos]
    if np.any(np.diff(A) < -1e-12) or np.any(L < 0):
        raise NumericError("discrete profile must have nondecreasing area and nonnegative lengths")
    return DiscreteBallProfile(
        grid=grid,
        length=L,
        area=A,
        total_curv=K,
        seed=field.seeds,
        h=field.h,
        truncated=truncated,
    )


@dataclass(frozen=True)
class FialaDiscreteResult:
    margins: np.ndarray
    indices: np.ndarray
    tol_discrete: float
    C_h: float
    passed: bool
    worst_interval: tuple | None


def fiala_discrete_check(dprof: DiscreteBallProfile, chi_max=1, C_h=20.0):
    """One-sided length-derivative bound on the discrete profile.

    Checks dL/dr <= 2 pi chi_max - K_cum + C_h * h, the derivative smoothed
    by centered differences over a 3-step window.  Violations are reported
    with the worst interval, never silently."""
    r, L = dprof.grid, dprof.length
    if len(r) < 5:
        raise DomainError("profile grid too short")
    idx = np.arange(1, len(r) - 1)
    dL = (L[idx + 1] - L[idx - 1]) / (r[idx + 1] - r[idx - 1])
    tol = C_h * dprof.h
    bound = 2.0 * np.pi * chi_max - dprof.total_curv[idx] + tol
    margins = bound - dL
    passed = bool(np.all(margins >= 0.0))
    worst = None
    if not passed:
        k = int(np.argmin(margins))
        worst = (float(r[idx[k] - 1]), float(r[idx[k] + 1]), float(margins[k]))
    return FialaDiscreteResult(
        margins=margins,
        indices=idx,
        tol_discrete=tol,
        C_h=C_h,
        passed=passed,
        worst_interval=worst,
    )


@dataclass(frozen=True)
class CrossValidation:
    grid: np.ndarray
    rel_err_length: np.ndarray
    rel_err_area: np.ndarray

    @property
    def max_error(self):
        return float(max(np.max(self.rel_err_length), np.max(self.rel_err_area)))

    def to_csv(self):
        buf = io.StringIO()
        buf.write("r,rel_err_L,rel_err_A\n")
        for i in range(len(self.grid)):
            buf.write(f"{self.grid[i]!r},{self.rel_err_length[i]!r},{self.rel_err_area[i]!r}\n")
        return buf.getvalue()


def cross_validate(dprof: DiscreteBallProfile, analytic_prof):
    """Per-radius relative errors of discrete L and A against an analytic
    profile sampled on the same grid."""
    if len(dprof.grid) != len(analytic_prof.grid) or np.max(np.abs(dprof.grid - analytic_prof.grid)) > 1e-12:
        raise DomainError("profiles must share the radius grid")
    rel_L = np.abs(dprof.length - analytic_prof.length) / np.abs(analytic_prof.length)
    rel_A = np.abs(dprof.area - analytic_prof.area) / np.abs(analytic_prof.area)
    return CrossValidation(grid=dprof.grid, rel_err_length=rel_L, rel_err_area=rel_A)
