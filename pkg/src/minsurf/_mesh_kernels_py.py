"""Pure-Python/numpy implementations of the mesh hot kernels.

Mirrors the compiled extension `_mesh_kernels_cy`; the active backend is
selected in `_kernels`.  Keep the two implementations behaviorally identical:
the test suite and the benchmark run both.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

BACKEND = "python"


def dijkstra(indptr, indices, weights, seeds, n_vertices):
    """Multi-source shortest paths on the edge graph (CSR adjacency).

    Deterministic: the heap orders by (distance, vertex index).  Unreachable
    vertices keep +inf.
    """
    dist = np.full(n_vertices, np.inf)
    heap = []
    for s in seeds:
        dist[s] = 0.0
        heap.append((0.0, int(s)))
    heapq.heapify(heap)
    pop = heapq.heappop
    push = heapq.heappush
    while heap:
        d, u = pop(heap)
        if d > dist[u]:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                push(heap, (nd, int(v)))
    return dist


def unfold_pass(faces, edge_len, order, dist):
    """One ordered sweep of planar triangle-unfolding updates.

    For each face (in increasing order of its current minimum distance) each
    corner is updated from the other two by placing the virtual source in the
    unfolded plane; the update applies only when the geodesic through the
    opposite edge is admissible (source segment crosses the edge).

    `edge_len[f, k]` is the length of the edge opposite corner k.
    Returns an improved copy of `dist`.
    """
    d = dist.copy()
    F = faces.shape[0]
    for fi in order:
        f0, f1, f2 = faces[fi]
        e0, e1, e2 = edge_len[fi]
        for k in range(3):
            if k == 0:
                c, a, b = f0, f1, f2
                lab, lca, lcb = e0, e2, e1
            elif k == 1:
                c, a, b = f1, f2, f0
                lab, lca, lcb = e1, e0, e2
            else:
                c, a, b = f2, f0, f1
                lab, lca, lcb = e2, e1, e0
            da, db = d[a], d[b]
            if not (math.isfinite(da) and math.isfinite(db)):
                continue
            # planar layout: a at origin, b at (lab, 0), c above the axis
            xc = (lca * lca - lcb * lcb + lab * lab) / (2.0 * lab)
            yc2 = lca * lca - xc * xc
            yc = math.sqrt(yc2) if yc2 > 0.0 else 0.0
            # virtual source below the axis at distances (da, db) from (a, b)
            xs = (da * da - db * db + lab * lab) / (2.0 * lab)
            ys2 = da * da - xs * xs
            if ys2 < 0.0:
                continue  # inconsistent distances; edge-graph value stands
            ys = -math.sqrt(ys2)
            # admissibility: segment source -> c must cross y = 0 inside [0, lab]
            denom = yc - ys
            if denom <= 0.0:
                continue
            t = -ys / denom
            xhit = xs + t * (xc - xs)
            if xhit < 0.0 or xhit > lab:
                continue
            cand = math.hypot(xc - xs, yc - ys)
            if cand < d[c]:
                d[c] = cand
    return d


def profile_sums(faces, coords, areas, dist, levels):
    """Iso-level lengths and sublevel areas for all levels.

    coords: (F, 3, 3) corner positions; areas: (F,) face areas; dist: (V,).
    Levels are classified with a +1e-12 nudge so vertex ties fall below.
    Exact for fields linear on each triangle.
    """
    dv = dist[faces]  # (F, 3)
    L = np.empty(len(levels))
    A = np.empty(len(levels))
    for li, level in enumerate(levels):
        r = level + 1e-12
        below = dv < r  # (F, 3)
        nb = below.sum(axis=1)
        area_acc = float(areas[nb == 3].sum())
        length_acc = 0.0
        for odd_count, is_below_side in ((1, True), (2, False)):
            sel = np.nonzero(nb == odd_count)[0]
            if len(sel) == 0:
                continue
            # the "odd" corner differs from the other two
            odd_mask = below[sel] if is_below_side else ~below[sel]
            k = np.argmax(odd_mask, axis=1)
            idx = np.arange(len(sel))
            dk = dv[sel, k]
            d1 = dv[sel, (k + 1) % 3]
            d2 = dv[sel, (k + 2) % 3]
            pk = coords[sel, k]
            p1 = coords[sel, (k + 1) % 3]
            p2 = coords[sel, (k + 2) % 3]
            t1 = (r - dk) / (d1 - dk)
            t2 = (r - dk) / (d2 - dk)
            q1 = pk + t1[:, None] * (p1 - pk)
            q2 = pk + t2[:, None] * (p2 - pk)
            length_acc += float(np.linalg.norm(q1 - q2, axis=1).sum())
            frac = t1 * t2
            if is_below_side:
                area_acc += float((frac * areas[sel]).sum())
            else:
                area_acc += float(((1.0 - frac) * areas[sel]).sum())
        L[li] = length_acc
        A[li] = area_acc
    return L, A
