"""Hausdorff distance and connected-component counts on sample clouds."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .. import kernels
from .sampling import EmptyCloudError, SampleCloud

__all__ = ["HausdorffResult", "component_labels", "connected_components", "default_linking_radius", "hausdorff_distance"]

LINK_FACTOR = 2.5


class HausdorffResult(NamedTuple):
    forward: float
    backward: float
    symmetric: float


def _points(c) -> np.ndarray:
    pts = c.points if isinstance(c, SampleCloud) else np.asarray(c, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    return np.ascontiguousarray(pts, dtype=np.float64)


def _cell_for(A: np.ndarray, B: np.ndarray) -> float:
    both = np.concatenate([A, B])
    extent = float((both.max(axis=0) - both.min(axis=0)).max())
    if extent == 0.0:
        return 1.0
    return 2.0 * extent / max(1.0, B.shape[0] ** (1.0 / B.shape[1]))


def hausdorff_distance(A, B, accelerate: bool = True) -> HausdorffResult:
    """(directed A->B, directed B->A, symmetric) Hausdorff distances.

    The bucketed search returns the same floats as the brute-force sweep.
    """
    a, b = _points(A), _points(B)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyCloudError("Hausdorff distance needs two nonempty clouds")
    if a.shape[1] != b.shape[1]:
        raise ValueError("clouds live in different dimensions")
    if accelerate:
        ab = kernels.directed_sq_grid(a, b, _cell_for(a, b))
        ba = kernels.directed_sq_grid(b, a, _cell_for(b, a))
    else:
        ab = kernels.directed_sq_brute(a, b)
        ba = kernels.directed_sq_brute(b, a)
    ab, ba = math.sqrt(ab), math.sqrt(ba)
    return HausdorffResult(ab, ba, max(ab, ba))


def default_linking_radius(cloud: SampleCloud) -> float:
    if cloud.step is None:
        raise ValueError("default linking radius needs a grid cloud; pass linking_radius")
    return LINK_FACTOR * cloud.step


def component_labels(cloud, linking_radius: float | None = None) -> tuple[int, np.ndarray]:
    if linking_radius is None:
        linking_radius = default_linking_radius(cloud)
    if linking_radius <= 0:
        raise ValueError("linking radius must be positive")
    pts = _points(cloud)
    if pts.shape[0] == 0:
        return 0, np.zeros(0, dtype=np.int64)
    if pts.shape[1] > 3:
        return kernels.pure.components_grid(pts, float(linking_radius))
    return kernels.components_grid(pts, float(linking_radius))


def connected_components(cloud, linking_radius: float | None = None) -> int:
    """Components of the graph joining points at distance <= linking_radius."""
    return component_labels(cloud, linking_radius)[0]
