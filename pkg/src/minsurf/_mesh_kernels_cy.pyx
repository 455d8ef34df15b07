# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled mesh hot kernels; behaviorally identical to _mesh_kernels_py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, hypot, isfinite, sqrt

cnp.import_array()

BACKEND = "cython"


def dijkstra(indptr, indices, weights, seeds, n_vertices):
    """Multi-source shortest paths on the edge graph (CSR adjacency)."""
    cdef cnp.int64_t[:] cindptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int64_t[:] cindices = np.ascontiguousarray(indices, dtype=np.int64)
    cdef double[:] cweights = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = n_vertices
    dist_arr = np.full(n, np.inf)
    cdef double[:] dist = dist_arr

    # binary min-heap over (distance, vertex); ties break on vertex index
    cdef Py_ssize_t cap = n + 16
    heap_d_arr = np.empty(cap, dtype=np.float64)
    heap_v_arr = np.empty(cap, dtype=np.int64)
    cdef double[:] heap_d = heap_d_arr
    cdef cnp.int64_t[:] heap_v = heap_v_arr
    cdef Py_ssize_t size = 0

    cdef cnp.int64_t[:] cseeds = np.ascontiguousarray(seeds, dtype=np.int64)
    cdef Py_ssize_t i, u, v, k, child, parent
    cdef double d, nd, td
    cdef cnp.int64_t tv

    for i in range(cseeds.shape[0]):
        u = cseeds[i]
        dist[u] = 0.0
        heap_d[size] = 0.0
        heap_v[size] = u
        size += 1
        child = size - 1
        while child > 0:
            parent = (child - 1) >> 1
            if heap_d[parent] > heap_d[child] or (
                heap_d[parent] == heap_d[child] and heap_v[parent] > heap_v[child]
            ):
                td = heap_d[parent]; heap_d[parent] = heap_d[child]; heap_d[child] = td
                tv = heap_v[parent]; heap_v[parent] = heap_v[child]; heap_v[child] = tv
                child = parent
            else:
                break

    while size > 0:
        d = heap_d[0]
        u = heap_v[0]
        size -= 1
        heap_d[0] = heap_d[size]
        heap_v[0] = heap_v[size]
        parent = 0
        while True:
            child = 2 * parent + 1
            if child >= size:
                break
            if child + 1 < size and (
                heap_d[child + 1] < heap_d[child]
                or (heap_d[child + 1] == heap_d[child] and heap_v[child + 1] < heap_v[child])
            ):
                child += 1
            if heap_d[child] < heap_d[parent] or (
                heap_d[child] == heap_d[parent] and heap_v[child] < heap_v[parent]
            ):
                td = heap_d[parent]; heap_d[parent] = heap_d[child]; heap_d[child] = td
                tv = heap_v[parent]; heap_v[parent] = heap_v[child]; heap_v[child] = tv
                parent = child
            else:
                break
        if d > dist[u]:
            continue
        for k in range(cindptr[u], cindptr[u + 1]):
            v = cindices[k]
            nd = d + cweights[k]
            if nd < dist[v]:
                dist[v] = nd
                if size >= cap:
                    cap = cap * 2
                    heap_d_arr = np.resize(heap_d_arr, cap)
                    heap_v_arr = np.resize(heap_v_arr, cap)
                    heap_d = heap_d_arr
                    heap_v = heap_v_arr
                heap_d[size] = nd
                heap_v[size] = v
                size += 1
                child = size - 1
                while child > 0:
                    parent = (child - 1) >> 1
                    if heap_d[parent] > heap_d[child] or (
                        heap_d[parent] == heap_d[child] and heap_v[parent] > heap_v[child]
                    ):
                        td = heap_d[parent]; heap_d[parent] = heap_d[child]; heap_d[child] = td
                        tv = heap_v[parent]; heap_v[parent] = heap_v[child]; heap_v[child] = tv
                        child = parent
                    else:
                        break
    return dist_arr


def unfold_pass(faces, edge_len, order, dist):
    """One ordered sweep of planar triangle-unfolding updates."""
    cdef cnp.int64_t[:, :] cfaces = np.ascontiguousarray(faces, dtype=np.int64)
    cdef double[:, :] clen = np.ascontiguousarray(edge_len, dtype=np.float64)
    cdef cnp.int64_t[:] corder = np.ascontiguousarray(order, dtype=np.int64)
    out_arr = np.array(dist, dtype=np.float64, copy=True)
    cdef double[:] d = out_arr
    cdef Py_ssize_t oi, fi, k
    cdef Py_ssize_t a, b, c
    cdef double lab, lca, lcb, da, db, xc, yc2, yc, xs, ys2, ys, denom, t, xhit, cand

    for oi in range(corder.shape[0]):
        fi = corder[oi]
        for k in range(3):
            if k == 0:
                c = cfaces[fi, 0]; a = cfaces[fi, 1]; b = cfaces[fi, 2]
                lab = clen[fi, 0]; lca = clen[fi, 2]; lcb = clen[fi, 1]
            elif k == 1:
                c = cfaces[fi, 1]; a = cfaces[fi, 2]; b = cfaces[fi, 0]
                lab = clen[fi, 1]; lca = clen[fi, 0]; lcb = clen[fi, 2]
            else:
                c = cfaces[fi, 2]; a = cfaces[fi, 0]; b = cfaces[fi, 1]
                lab = clen[fi, 2]; lca = clen[fi, 1]; lcb = clen[fi, 0]
            da = d[a]
            db = d[b]
            if not (isfinite(da) and isfinite(db)):
                continue
            xc = (lca * lca - lcb * lcb + lab * lab) / (2.0 * lab)
            yc2 = lca * lca - xc * xc
            yc = sqrt(yc2) if yc2 > 0.0 else 0.0
            xs = (da * da - db * db + lab * lab) / (2.0 * lab)
            ys2 = da * da - xs * xs
            if ys2 < 0.0:
                continue
            ys = -sqrt(ys2)
            denom = yc - ys
            if denom <= 0.0:
                continue
            t = -ys / denom
            xhit = xs + t * (xc - xs)
            if xhit < 0.0 or xhit > lab:
                continue
            cand = hypot(xc - xs, yc - ys)
            if cand < d[c]:
                d[c] = cand
    return out_arr


def profile_sums(faces, coords, areas, dist, levels):
    """Iso-level lengths and sublevel areas for all levels (one face pass)."""
    cdef cnp.int64_t[:, :] cfaces = np.ascontiguousarray(faces, dtype=np.int64)
    cdef double[:, :, :] ccoords = np.ascontiguousarray(coords, dtype=np.float64)
    cdef double[:] careas = np.ascontiguousarray(areas, dtype=np.float64)
    cdef double[:] cdist = np.ascontiguousarray(dist, dtype=np.float64)
    cdef double[:] clevels = np.ascontiguousarray(levels, dtype=np.float64)
    cdef Py_ssize_t F = cfaces.shape[0]
    cdef Py_ssize_t M = clevels.shape[0]
    L_arr = np.zeros(M)
    A_arr = np.zeros(M)
    cdef double[:] L = L_arr
    cdef double[:] A = A_arr
    cdef Py_ssize_t fi, li, k, kk, i1, i2
    cdef double d0, d1, d2, r, dk, dn1, dn2, t1, t2, frac
    cdef double qx1, qy1, qz1, qx2, qy2, qz2
    cdef int nb, below0, below1, below2, odd_below

    for fi in range(F):
        d0 = cdist[cfaces[fi, 0]]
        d1 = cdist[cfaces[fi, 1]]
        d2 = cdist[cfaces[fi, 2]]
        for li in range(M):
            r = clevels[li] + 1e-12
            below0 = d0 < r
            below1 = d1 < r
            below2 = d2 < r
            nb = below0 + below1 + below2
            if nb == 3:
                A[li] += careas[fi]
                continue
            if nb == 0:
                continue
            if nb == 1:
                k = 0 if below0 else (1 if below1 else 2)
                odd_below = 1
            else:
                k = 0 if not below0 else (1 if not below1 else 2)
                odd_below = 0
            i1 = (k + 1) % 3
            i2 = (k + 2) % 3
            dk = cdist[cfaces[fi, k]]
            dn1 = cdist[cfaces[fi, i1]]
            dn2 = cdist[cfaces[fi, i2]]
            t1 = (r - dk) / (dn1 - dk)
            t2 = (r - dk) / (dn2 - dk)
            qx1 = ccoords[fi, k, 0] + t1 * (ccoords[fi, i1, 0] - ccoords[fi, k, 0])
            qy1 = ccoords[fi, k, 1] + t1 * (ccoords[fi, i1, 1] - ccoords[fi, k, 1])
            qz1 = ccoords[fi, k, 2] + t1 * (ccoords[fi, i1, 2] - ccoords[fi, k, 2])
            qx2 = ccoords[fi, k, 0] + t2 * (ccoords[fi, i2, 0] - ccoords[fi, k, 0])
            qy2 = ccoords[fi, k, 1] + t2 * (ccoords[fi, i2, 1] - ccoords[fi, k, 1])
            qz2 = ccoords[fi, k, 2] + t2 * (ccoords[fi, i2, 2] - ccoords[fi, k, 2])
            L[li] += sqrt((qx1 - qx2) ** 2 + (qy1 - qy2) ** 2 + (qz1 - qz2) ** 2)
            frac = t1 * t2
            if odd_below:
                A[li] += frac * careas[fi]
            else:
                A[li] += (1.0 - frac) * careas[fi]
    return L_arr, A_arr
