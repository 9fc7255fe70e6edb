"""Candidate point sets with uniform quadrature weights, plus fill distance.

The two domains used throughout are the closed unit disk (equispaced grid
restricted to the disk) and the unit interval (seeded uniform random
points).  Each set doubles as the quadrature rule
``(f, g)_L2 ~ w * sum f(x_j) g(x_j)`` with ``w = |domain| / m``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

__all__ = ["QuadratureSet", "disk_grid", "random_interval_points", "fill_distance"]


@dataclass(frozen=True)
class QuadratureSet:
    """Ordered points in a tagged domain with a uniform quadrature weight."""

    points: np.ndarray  # (m, d), read-only
    weight: float
    domain_tag: str  # "unit_disk" or "unit_interval"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self):
        return len(self.points)

    @property
    def dim(self):
        return self.points.shape[1]


def disk_grid(target_count):
    """Equispaced grid on [-1, 1]^2 restricted to the closed unit disk.

    The per-axis resolution is the smallest integer refinement whose
    retained point count reaches ``target_count``; the weight is pi / m for
    the m retained points.
    """
    if target_count < 1:
        raise ValueError("target_count must be >= 1")
    for s in range(2, 100_000):
        # Integer numerators keep the axis exactly symmetric about zero
        # (and the endpoints exactly +-1), so the grid is negation-invariant.
        axis = (2.0 * np.arange(s) - (s - 1)) / (s - 1)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        pts = pts[(pts**2).sum(axis=1) <= 1.0]
        if len(pts) >= target_count:
            return QuadratureSet(points=pts, weight=np.pi / len(pts), domain_tag="unit_disk")
    raise ValueError(f"no grid refinement reaches target_count={target_count}")


def random_interval_points(count, seed):
    """``count`` i.i.d. uniform points in the open interval (0, 1), sorted.

    Fully determined by ``seed``; weight 1 / count.  Zeros and collisions
    (probability zero, but the contract demands distinct interior points)
    are redrawn deterministically.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    pts = np.sort(rng.random(count))
    while pts[0] <= 0.0 or np.any(np.diff(pts) == 0.0):
        bad = np.concatenate([[pts[0] <= 0.0], np.diff(pts) == 0.0])
        pts[bad] = rng.random(int(bad.sum()))
        pts = np.sort(pts)
    return QuadratureSet(points=pts.reshape(-1, 1), weight=1.0 / count, domain_tag="unit_interval")


def fill_distance(selected, candidates):
    """Largest candidate-to-selected distance: max over candidates of the
    distance to the nearest selected point (discrete stand-in for the fill
    distance of the selected set in the domain).
    """
    selected = np.atleast_2d(np.asarray(selected, dtype=float))
    pts = candidates.points if isinstance(candidates, QuadratureSet) else np.atleast_2d(candidates)
    if selected.shape[-1] != pts.shape[-1]:
        selected = selected.reshape(-1, pts.shape[-1])
    if len(selected) == 0:
        raise ValueError("selected point set must be nonempty")
    return float(cdist(pts, selected).min(axis=1).max())
