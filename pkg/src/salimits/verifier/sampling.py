"""Finite point samples of realizations and of parameter fibers."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..formula import BatchEvaluator, FormulaDoc, eval_formula, iter_atoms
from ..polycore import SparsePoly, as_rational

__all__ = [
    "EmptyCloudError",
    "SampleCloud",
    "auto_tau",
    "fiber",
    "grid_axes",
    "grid_step",
    "inherited_tau",
    "exact_membership",
    "sample_realization",
]

GRID = "grid"
RANDOM = "random"
_CHUNK_ROWS = 64


class EmptyCloudError(ValueError):
    """An operation that needs points was handed an empty cloud."""


@dataclass
class SampleCloud:
    points: np.ndarray
    source: FormulaDoc
    box: tuple[tuple[Fraction, Fraction], ...]
    mode: str
    resolution: int | None
    count: int | None
    seed: int | None
    tau: np.ndarray
    param_value: Fraction | None = None
    #: flat grid indices of the accepted points (grid mode only)
    grid_index: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return self.points.shape[0] == 0

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def step(self) -> float | None:
        return grid_step(self.box, self.resolution) if self.resolution else None

    def exact_point(self, i: int) -> tuple[Fraction, ...]:
        """Rational coordinates of point ``i``: the grid node itself in grid mode."""
        if self.grid_index is not None:
            idx = np.unravel_index(int(self.grid_index[i]), (self.resolution,) * self.dim)
            return tuple(_node(lo, hi, self.resolution, int(j)) for (lo, hi), j in zip(self.box, idx))
        return tuple(Fraction(float(v)) for v in self.points[i])

    def describe(self) -> dict:
        return {
            "points": int(len(self)),
            "empty": self.empty,
            "mode": self.mode,
            "resolution": self.resolution,
            "count": self.count,
            "seed": self.seed,
            "box": [[str(lo), str(hi)] for lo, hi in self.box],
            "tau": [float(t) for t in self.tau],
            "param_value": None if self.param_value is None else str(self.param_value),
            "grid_step": self.step,
            **self.meta,
        }


def _node(lo: Fraction, hi: Fraction, res: int, j: int) -> Fraction:
    return lo + (hi - lo) * j / (res - 1)


def _as_box(box, k: int) -> tuple[tuple[Fraction, Fraction], ...]:
    box = [(as_rational(lo), as_rational(hi)) for lo, hi in box]
    if len(box) == 1 and k > 1:
        box = box * k
    if len(box) != k:
        raise ValueError(f"box has {len(box)} intervals, formula has {k} variables")
    for lo, hi in box:
        if not lo < hi:
            raise ValueError("box must be nondegenerate")
    return tuple(box)


def grid_axes(box, resolution: int) -> list[np.ndarray]:
    if resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    return [np.array([float(_node(lo, hi, resolution, j)) for j in range(resolution)]) for lo, hi in box]


def grid_step(box, resolution: int) -> float:
    return max(float((as_rational(hi) - as_rational(lo)) / (resolution - 1)) for lo, hi in box)


def fiber(doc: FormulaDoc, value, index: int | None = None) -> FormulaDoc:
    """Fix one variable (the doc's parameter by default) and drop it."""
    index = doc.parameter if index is None else index
    if index is None:
        raise ValueError("doc has no parameter variable")
    value = as_rational(value)
    polys = tuple(p.substitute(index, value) for p in doc.polys)
    names = list(doc.var_names())
    del names[index]
    return FormulaDoc(doc.arity - 1, polys, (None,) * len(polys), doc.root, names=tuple(names))


def _gradient_bound(p: SparsePoly, axes: list[np.ndarray]) -> float:
    """max |grad p| over the grid spanned by ``axes``, evaluated one axis-slab at a time."""
    grads = [p.diff(i) for i in range(p.arity)]
    if all(g.is_zero() for g in grads):
        return 0.0
    worst = 0.0
    for pts in _grid_chunks(axes):
        total = np.zeros(pts.shape[0])
        for g in grads:
            total += _values(g, pts) ** 2
        worst = max(worst, float(np.sqrt(total.max())))
    return worst


def _values(p: SparsePoly, pts: np.ndarray) -> np.ndarray:
    out = np.zeros(pts.shape[0])
    for exp, c in p.terms():
        mono = np.full(pts.shape[0], float(c))
        for i, e in enumerate(exp):
            if e:
                mono = mono * pts[:, i] ** e
        out += mono
    return out


def _grid_chunks(axes: list[np.ndarray]):
    first, rest = axes[0], axes[1:]
    tail = np.array(np.meshgrid(*rest, indexing="ij")).reshape(len(rest), -1).T if rest else np.zeros((1, 0))
    for s in range(0, first.shape[0], _CHUNK_ROWS):
        head = first[s:s + _CHUNK_ROWS]
        pts = np.empty((head.shape[0] * tail.shape[0], len(axes)))
        pts[:, 0] = np.repeat(head, tail.shape[0])
        pts[:, 1:] = np.tile(tail, (head.shape[0], 1))
        yield pts


def auto_tau(doc: FormulaDoc, box, resolution: int) -> np.ndarray:
    """Per-polynomial relaxation 2 h max|grad F| over the grid; 0 where no equality uses F."""
    box = _as_box(box, doc.arity)
    h = grid_step(box, resolution)
    axes = grid_axes(box, resolution)
    eq = {a.poly_ref for a in iter_atoms(doc.root) if a.rel == "="}
    return np.array([2 * h * _gradient_bound(p, axes) if i in eq else 0.0 for i, p in enumerate(doc.polys)])


def _resolve_tau(doc: FormulaDoc, tau, box, resolution) -> np.ndarray:
    if tau is None or (isinstance(tau, str) and tau == "auto"):
        if resolution is None:
            raise ValueError("automatic tau needs a grid resolution")
        return auto_tau(doc, box, resolution)
    arr = np.broadcast_to(np.asarray(tau, dtype=np.float64), (len(doc.polys),)).copy()
    if np.any(arr <= 0):
        raise ValueError("tau must be positive")
    return arr


class _GridExact:
    """Lazy exact coordinates for one chunk of grid nodes."""

    def __init__(self, box, resolution, flat):
        self.box, self.resolution, self.flat = box, resolution, flat

    def __getitem__(self, j):
        idx = np.unravel_index(int(self.flat[j]), (self.resolution,) * len(self.box))
        return tuple(_node(lo, hi, self.resolution, int(i)) for (lo, hi), i in zip(self.box, idx))


def sample_realization(
    doc: FormulaDoc,
    box,
    mode: str = GRID,
    resolution_or_count: int = 101,
    tau="auto",
    seed: int = 0,
    threads: int = 1,
    param_value=None,
) -> SampleCloud:
    """Points of a grid (or uniform random sample) of ``box`` satisfying the τ-relaxed formula.

    Membership is decided in floating point and rechecked exactly near atom
    boundaries.  Grid chunks are processed independently and concatenated in
    grid order, so the result does not depend on ``threads``.
    """
    box = _as_box(box, doc.arity)
    k = doc.arity
    if mode == GRID:
        res = int(resolution_or_count)
        tau_arr = _resolve_tau(doc, tau, box, res)
        ev = BatchEvaluator(doc, tau_arr)
        axes = grid_axes(box, res)
        row = res ** (k - 1)
        chunks = [(s, min(s + _CHUNK_ROWS, res)) for s in range(0, res, _CHUNK_ROWS)]
        tail = np.array(np.meshgrid(*axes[1:], indexing="ij")).reshape(k - 1, -1).T if k > 1 else np.zeros((1, 0))

        def run(bounds):
            a, b = bounds
            pts = np.empty(((b - a) * row, k))
            pts[:, 0] = np.repeat(axes[0][a:b], row)
            pts[:, 1:] = np.tile(tail, (b - a, 1))
            flat = np.arange(a * row, b * row, dtype=np.int64)
            mask = ev.evaluate(pts, _GridExact(box, res, flat))
            return pts[mask], flat[mask]

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(run, chunks))
        else:
            parts = [run(c) for c in chunks]
        points = np.concatenate([p for p, _ in parts]) if parts else np.zeros((0, k))
        index = np.concatenate([i for _, i in parts]) if parts else np.zeros(0, dtype=np.int64)
        cloud = SampleCloud(points, doc, box, GRID, res, None, seed, tau_arr, grid_index=index)
    elif mode == RANDOM:
        count = int(resolution_or_count)
        if count <= 0:
            raise ValueError("sample count must be positive")
        if isinstance(tau, str) or tau is None:
            raise ValueError("random sampling needs an explicit tau")
        tau_arr = _resolve_tau(doc, tau, box, None)
        rng = np.random.default_rng(seed)
        lo = np.array([float(a) for a, _ in box])
        hi = np.array([float(b) for _, b in box])
        pts = lo + (hi - lo) * rng.random((count, k))
        mask = BatchEvaluator(doc, tau_arr).evaluate(pts)
        cloud = SampleCloud(pts[mask], doc, box, RANDOM, None, count, seed, tau_arr)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    if param_value is not None:
        cloud.param_value = as_rational(param_value)
    if cloud.empty:
        cloud.meta["warning"] = "empty cloud"
    return cloud


def inherited_tau(src: FormulaDoc, tau: Sequence[float], dst: FormulaDoc, var_maps: Sequence[Sequence[int]]) -> np.ndarray:
    """Carry per-polynomial relaxations from ``src`` to the renamed copies in ``dst``.

    Every table entry of ``dst`` that equals some ``src`` polynomial under one
    of ``var_maps`` gets that polynomial's τ; everything else stays exact.
    """
    lookup = {}
    for vm in var_maps:
        for i, p in enumerate(src.polys):
            if tau[i] > 0:
                q = p.rename(list(vm), dst.arity)
                lookup[q] = max(lookup.get(q, 0.0), float(tau[i]))
    return np.array([lookup.get(p, 0.0) for p in dst.polys])


def exact_membership(doc: FormulaDoc, point, tau=None) -> bool:
    """eval_formula with per-polynomial τ given as floats (converted exactly)."""
    if tau is not None:
        tau = [Fraction(float(t)) for t in tau]
    return eval_formula(doc, point, tau)

