# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled point-cloud kernels: nearest-neighbour sweeps and union-find.

Squared distances are accumulated one coordinate at a time in index order,
exactly as the numpy fallback does, so both paths return identical floats.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, INFINITY

cnp.import_array()


cdef inline double _sqdist(const double[:, ::1] A, Py_ssize_t i,
                           const double[:, ::1] B, Py_ssize_t j, Py_ssize_t k) noexcept nogil:
    cdef double acc = 0.0, t
    cdef Py_ssize_t d
    for d in range(k):
        t = A[i, d] - B[j, d]
        acc += t * t
    return acc


def directed_sq_brute(const double[:, ::1] A, const double[:, ::1] B):
    """max over a in A of min over b in B of |a-b|^2."""
    cdef Py_ssize_t n = A.shape[0], m = B.shape[0], k = A.shape[1]
    cdef Py_ssize_t i, j
    cdef double best, worst = 0.0, d2
    with nogil:
        for i in range(n):
            best = INFINITY
            for j in range(m):
                d2 = _sqdist(A, i, B, j, k)
                if d2 < best:
                    best = d2
            if best > worst:
                worst = best
    return worst


cdef class _Grid:
    """Points of B sorted by linearised cell id, for ring searches.

    The cell is coarsened until the dense cell table has O(len(B)) entries;
    searches stay exact for any cell size, only slower or faster.
    """
    cdef public object order, starts, counts, dims, origin
    cdef public double cell

    def __init__(self, B, double cell):
        B = np.asarray(B)
        self.origin = B.min(axis=0)
        extent = B.max(axis=0) - self.origin
        limit = max(8 * B.shape[0], 4096)
        while np.prod(np.floor(extent / cell) + 1) > limit:
            cell *= 2.0
        self.cell = cell
        idx = np.floor((B - self.origin) / cell).astype(np.int64)
        self.dims = idx.max(axis=0) + 1
        lin = _linear(idx, self.dims)
        self.order = np.argsort(lin, kind="stable").astype(np.int64)
        total = int(np.prod(self.dims))
        self.counts = np.bincount(lin, minlength=total).astype(np.int64)
        self.starts = np.concatenate(([0], np.cumsum(self.counts)[:-1])).astype(np.int64)


def _linear(idx, dims):
    lin = np.zeros(idx.shape[0], dtype=np.int64)
    for d in range(idx.shape[1]):
        lin = lin * dims[d] + idx[:, d]
    return lin


cdef inline double _scan(const double[:, ::1] A, Py_ssize_t i, const double[:, ::1] B,
                         const long[::1] order, const long[::1] starts, const long[::1] counts,
                         Py_ssize_t first, Py_ssize_t last, Py_ssize_t k, double best) noexcept nogil:
    # cells first..last are consecutive in linear order, so their points are contiguous
    cdef Py_ssize_t t, e = starts[last] + counts[last]
    cdef double d2
    for t in range(starts[first], e):
        d2 = _sqdist(A, i, B, order[t], k)
        if d2 < best:
            best = d2
    return best


def directed_sq_grid(const double[:, ::1] A, const double[:, ::1] B, double cell):
    """Same value as directed_sq_brute, using expanding rings of grid cells.

    After all cells within Chebyshev cell-distance r are scanned, any point
    not yet seen is at least r*cell away, so the search for a point stops as
    soon as its best squared distance is <= (r*cell)^2.
    """
    cdef Py_ssize_t n = A.shape[0], k = A.shape[1]
    if k > 3:
        return directed_sq_brute(A, B)
    grid = _Grid(np.asarray(B), cell)
    cell = grid.cell
    cdef const long[::1] order = grid.order
    cdef const long[::1] starts = grid.starts
    cdef const long[::1] counts = grid.counts
    cdef long[::1] dims = np.ascontiguousarray(grid.dims, dtype=np.int64)
    cdef double[::1] origin = np.ascontiguousarray(grid.origin, dtype=np.float64)
    cdef long c[3]
    cdef long lo[3]
    cdef long hi[3]
    cdef long off[3]
    cdef Py_ssize_t i, d, r, rmax, base, a0, a1, last = k - 1
    cdef double best, worst = 0.0, bound
    cdef bint on_shell, inside
    rmax = 0
    for d in range(k):
        if dims[d] > rmax:
            rmax = dims[d]
    with nogil:
        for i in range(n):
            for d in range(k):
                c[d] = <long>floor((A[i, d] - origin[d]) / cell)
                if c[d] < 0:
                    c[d] = 0
                if c[d] > dims[d] - 1:
                    c[d] = dims[d] - 1
            best = INFINITY
            r = 0
            while True:
                for d in range(k):
                    lo[d] = c[d] - r
                    hi[d] = c[d] + r
                    off[d] = lo[d] if lo[d] > 0 else 0
                # odometer over the leading axes, clamped to the grid
                inside = True
                for d in range(last):
                    if off[d] > hi[d] or off[d] >= dims[d]:
                        inside = False
                while inside:
                    on_shell = False
                    base = 0
                    for d in range(last):
                        if off[d] == lo[d] or off[d] == hi[d]:
                            on_shell = True
                        base = base * dims[d] + off[d]
                    base = base * dims[last]
                    a0 = lo[last] if lo[last] > 0 else 0
                    a1 = hi[last] if hi[last] < dims[last] - 1 else dims[last] - 1
                    if a0 <= a1:
                        if on_shell:
                            best = _scan(A, i, B, order, starts, counts, base + a0, base + a1, k, best)
                        else:
                            # interior prefix: only the two end cells of the last axis are on the shell
                            if lo[last] >= 0:
                                best = _scan(A, i, B, order, starts, counts, base + lo[last], base + lo[last], k, best)
                            if hi[last] != lo[last] and hi[last] < dims[last]:
                                best = _scan(A, i, B, order, starts, counts, base + hi[last], base + hi[last], k, best)
                    d = last - 1
                    while d >= 0:
                        off[d] += 1
                        if off[d] <= hi[d] and off[d] < dims[d]:
                            break
                        off[d] = lo[d] if lo[d] > 0 else 0
                        d -= 1
                    if d < 0:
                        break
                bound = r * cell
                if best <= bound * bound or r > rmax:
                    break
                r += 1
            if best > worst:
                worst = best
    return worst


cdef inline long _find(long[::1] parent, long x) noexcept nogil:
    cdef long root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def components_grid(const double[:, ::1] P, double radius):
    """Union-find over pairs with |p-q|^2 <= radius^2; labels by first occurrence."""
    cdef Py_ssize_t n = P.shape[0], k = P.shape[1]
    labels = np.zeros(n, dtype=np.int64)
    if n == 0:
        return 0, labels
    if k > 3:
        raise ValueError("compiled components kernel supports k <= 3")
    grid = _Grid(np.asarray(P), radius)
    cdef double cell = grid.cell
    cdef const long[::1] order = grid.order
    cdef const long[::1] starts = grid.starts
    cdef const long[::1] counts = grid.counts
    cdef long[::1] dims = np.ascontiguousarray(grid.dims, dtype=np.int64)
    cdef double[::1] origin = np.ascontiguousarray(grid.origin, dtype=np.float64)
    cdef long[::1] parent = np.arange(n, dtype=np.int64)
    cdef long[::1] lab = labels
    cdef long c[3]
    cdef long off[3]
    cdef long lo[3]
    cdef long hi[3]
    cdef Py_ssize_t i, j, d, t, s, e, lin
    cdef double r2 = radius * radius
    cdef long ri, rj
    cdef bint inside
    with nogil:
        for i in range(n):
            for d in range(k):
                c[d] = <long>floor((P[i, d] - origin[d]) / cell)
                if c[d] > dims[d] - 1:
                    c[d] = dims[d] - 1
                lo[d] = c[d] - 1
                hi[d] = c[d] + 1
                off[d] = lo[d]
            while True:
                inside = True
                for d in range(k):
                    if off[d] < 0 or off[d] >= dims[d]:
                        inside = False
                if inside:
                    lin = 0
                    for d in range(k):
                        lin = lin * dims[d] + off[d]
                    s = starts[lin]
                    e = s + counts[lin]
                    for t in range(s, e):
                        j = order[t]
                        if j > i and _sqdist(P, i, P, j, k) <= r2:
                            ri = _find(parent, i)
                            rj = _find(parent, j)
                            if ri != rj:
                                if ri < rj:
                                    parent[rj] = ri
                                else:
                                    parent[ri] = rj
                d = k - 1
                while d >= 0:
                    off[d] += 1
                    if off[d] <= hi[d]:
                        break
                    off[d] = lo[d]
                    d -= 1
                if d < 0:
                    break
    mapping = {}
    count = 0
    for i in range(n):
        root = _find(parent, i)
        if root not in mapping:
            mapping[root] = count
            count += 1
        lab[i] = mapping[root]
    return count, labels
