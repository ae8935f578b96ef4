"""Position estimates: weighted argmax of the pooled log-likelihood on a grid,
and the closed-form single-station estimate."""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .geom import Position3, from_angles, points_in_convex_polygon
from .likelihood import log_columns
from .obsmodel import BsProfile, Observation
from .pooling import DiscretePool

OW_HYBRID = "OW-hybrid"
EW_HYBRID = "EW-hybrid"
OW_TOA = "OW-ToA-only"
EW_TOA = "EW-ToA-only"
OW_AOA = "OW-AoA-only"
EW_AOA = "EW-AoA-only"
SINGLE_BS = "single-BS"
METHODS = (OW_HYBRID, EW_HYBRID, OW_TOA, EW_TOA, OW_AOA, EW_AOA, SINGLE_BS)


@dataclass(frozen=True)
class SearchRegion:
    """Rectangular search grid at a fixed height, optionally clipped to a convex polygon.

    Cells are indexed row-major (``iy * nx + ix``) and represented by their centers.
    ``z_levels`` switches to a 3-D search over the listed heights.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_fixed: float
    nx: int
    ny: int
    polygon: tuple | None = None
    z_levels: tuple | None = None

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("search region bounds must satisfy min < max")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid resolution must be at least 2 x 2")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def cell_diagonal(self) -> float:
        return math.hypot(self.dx, self.dy)

    def cells(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(cell_ids, centers)`` for every cell inside the region."""
        return _cells(self)

    def _build_cells(self):
        xs = self.x_min + (np.arange(self.nx) + 0.5) * self.dx
        ys = self.y_min + (np.arange(self.ny) + 0.5) * self.dy
        gx, gy = np.meshgrid(xs, ys)
        xy = np.column_stack([gx.ravel(), gy.ravel()])
        ids = np.arange(xy.shape[0])
        if self.polygon is not None:
            keep = points_in_convex_polygon(xy, self.polygon)
            xy, ids = xy[keep], ids[keep]
        if not len(ids):
            raise ValueError("empty grid")
        if self.z_levels is None:
            return ids, np.column_stack([xy, np.full(len(xy), self.z_fixed)])
        zs = np.asarray(self.z_levels, dtype=float)
        pts = np.concatenate([np.column_stack([xy, np.full(len(xy), z)]) for z in zs])
        all_ids = np.concatenate([ids + i * self.nx * self.ny for i in range(len(zs))])
        return all_ids, pts

    @property
    def cell_measure(self) -> float:
        if self.z_levels is None or len(self.z_levels) < 2:
            return self.cell_area
        dz = (max(self.z_levels) - min(self.z_levels)) / (len(self.z_levels) - 1)
        return self.cell_area * dz


@lru_cache(maxsize=8)
def _cells(region: SearchRegion):
    ids, pts = region._build_cells()
    ids.setflags(write=False)
    pts.setflags(write=False)
    return ids, pts


@dataclass(frozen=True)
class PositionEstimate:
    position: Position3
    log_score: float
    method: str


def grid_pool(fields: Sequence, region: SearchRegion) -> DiscretePool:
    """Evaluate every likelihood column at every cell center of ``region``."""
    ids, pts = region.cells()
    return DiscretePool(log_columns(fields, pts), None, region.cell_measure, pts, ids)


def estimate_p3(pool: DiscretePool, w, region: SearchRegion | None = None, method: str = OW_HYBRID) -> PositionEstimate:
    """Grid cell maximizing ``sum_j w_j log q_j``; ties go to the lowest cell index."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (pool.n_experts,):
        raise ValueError("weight vector does not match pool columns")
    if pool.points is None:
        raise ValueError("pool carries no candidate positions")
    i, score = kernels.weighted_argmax(pool.log_q, w)
    return PositionEstimate(Position3(*pool.points[i].tolist()), score, method)


def estimate_subset(pool: DiscretePool, w, columns, region: SearchRegion | None = None, method: str = "subset") -> PositionEstimate:
    """P3 argmax over a subset of columns with the weights renormalized on that subset."""
    cols = sorted(set(int(c) for c in columns))
    if not cols:
        raise ValueError("empty column selection")
    w = np.asarray(w, dtype=np.float64)
    full = np.zeros(pool.n_experts)
    sub = w[cols]
    total = sub.sum()
    full[cols] = sub / total if total > 0 else 1.0 / len(cols)
    return estimate_p3(pool, full, region, method)


def toa_columns(k: int) -> list[int]:
    return list(range(0, 2 * k, 2))


def aoa_columns(k: int) -> list[int]:
    return list(range(1, 2 * k, 2))


def estimate_single_bs(bs: BsProfile, obs: Observation) -> PositionEstimate:
    """Range along the observed bearing from the station."""
    u = np.asarray(from_angles(obs.az_hat, obs.el_hat))
    p = np.asarray(bs.position) + obs.d_hat * u
    return PositionEstimate(Position3(*p.tolist()), float("nan"), SINGLE_BS)
