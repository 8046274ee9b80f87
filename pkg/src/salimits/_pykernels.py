"""Numpy fallback for the compiled kernels; same signatures, same floats."""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

_CHUNK = 2048


def _sq_block(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # per-coordinate accumulation in index order, matching the compiled loop
    acc = np.zeros((A.shape[0], B.shape[0]))
    for d in range(A.shape[1]):
        t = A[:, d, None] - B[None, :, d]
        acc += t * t
    return acc


def directed_sq_brute(A, B) -> float:
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    worst = 0.0
    step = max(1, _CHUNK * 64 // max(B.shape[0], 1))
    for s in range(0, A.shape[0], step):
        worst = max(worst, float(_sq_block(A[s:s + step], B).min(axis=1).max()))
    return worst


def _cells(P: np.ndarray, origin: np.ndarray, cell: float) -> np.ndarray:
    return np.floor((P - origin) / cell).astype(np.int64)


def directed_sq_grid(A, B, cell: float) -> float:
    """Bucketed version: each A-cell is compared with the B points in its 3^k
    neighbourhood; rows whose best value is not certified by that neighbourhood
    fall back to brute force."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    k = A.shape[1]
    if k > 3 or A.shape[0] * B.shape[0] <= 1 << 16:
        return directed_sq_brute(A, B)
    origin = B.min(axis=0)
    bc = _cells(B, origin, cell)
    buckets: dict[tuple, list[int]] = {}
    for j, key in enumerate(map(tuple, bc)):
        buckets.setdefault(key, []).append(j)
    buckets_arr = {key: np.asarray(v) for key, v in buckets.items()}
    ac = _cells(A, origin, cell)
    groups: dict[tuple, list[int]] = {}
    for i, key in enumerate(map(tuple, ac)):
        groups.setdefault(key, []).append(i)
    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * k, indexing="ij")).reshape(k, -1).T
    worst = 0.0
    leftovers = []
    for key, rows in groups.items():
        near = [buckets_arr[t] for t in map(tuple, np.asarray(key) + offsets) if t in buckets_arr]
        rows = np.asarray(rows)
        if not near:
            leftovers.append(rows)
            continue
        best = _sq_block(A[rows], B[np.concatenate(near)]).min(axis=1)
        # anything outside the 3^k block is at least one full cell away
        ok = best <= cell * cell
        if ok.any():
            worst = max(worst, float(best[ok].max()))
        if (~ok).any():
            leftovers.append(rows[~ok])
    if leftovers:
        rest = np.concatenate(leftovers)
        worst = max(worst, directed_sq_brute(A[rest], B))
    return worst


def components_grid(P, radius: float):
    P = np.ascontiguousarray(P, dtype=np.float64)
    n, k = P.shape
    if n == 0:
        return 0, np.zeros(0, dtype=np.int64)
    origin = P.min(axis=0)
    cells = _cells(P, origin, radius)
    buckets: dict[tuple, list[int]] = {}
    for i, key in enumerate(map(tuple, cells)):
        buckets.setdefault(key, []).append(i)
    buckets_arr = {key: np.asarray(v) for key, v in buckets.items()}
    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * k, indexing="ij")).reshape(k, -1).T
    r2 = radius * radius
    rows, cols = [], []
    for key, members in buckets_arr.items():
        near = [buckets_arr[t] for t in map(tuple, np.asarray(key) + offsets) if t in buckets_arr]
        cand = np.concatenate(near)
        d2 = _sq_block(P[members], P[cand])
        ii, jj = np.nonzero(d2 <= r2)
        rows.append(members[ii])
        cols.append(cand[jj])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    graph = coo_matrix((np.ones(r.shape[0], dtype=np.int8), (r, c)), shape=(n, n))
    count, raw = connected_components(graph, directed=False)
    # relabel by first occurrence so both backends agree
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    remap = np.empty(count, dtype=np.int64)
    remap[order] = np.arange(count)
    return int(count), remap[raw].astype(np.int64)
