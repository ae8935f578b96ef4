"""Local Cartesian geometry: positions, unit directions and angle conversions.

Azimuth is measured counterclockwise from +x in the xy-plane, elevation from
the xy-plane toward +z.  At the poles the azimuth is reported as 0.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DegenerateGeometry


class Position3(NamedTuple):
    x: float
    y: float
    z: float


class DirectionUnit(NamedTuple):
    ux: float
    uy: float
    uz: float


def as_position(p) -> Position3:
    x, y, z = (float(v) for v in p)
    if not all(math.isfinite(v) for v in (x, y, z)):
        raise ValueError(f"non-finite position {p!r}")
    return Position3(x, y, z)


def direction_between(origin, target) -> DirectionUnit:
    """Unit vector pointing from ``origin`` to ``target``."""
    d = np.asarray(target, dtype=float) - np.asarray(origin, dtype=float)
    n = math.sqrt(float(d @ d))
    if n == 0.0:
        raise DegenerateGeometry(f"coincident points {tuple(origin)}")
    return DirectionUnit(*(d / n).tolist())


def to_angles(d) -> tuple[float, float]:
    """Return ``(azimuth, elevation)`` of a unit vector.

    Azimuth lies in (-pi, pi], elevation in [-pi/2, pi/2].
    """
    ux, uy, uz = (float(v) for v in d)
    horiz = math.hypot(ux, uy)
    elevation = math.atan2(uz, horiz)
    if horiz == 0.0:
        return 0.0, elevation
    azimuth = math.atan2(uy, ux)
    if azimuth == -math.pi:
        azimuth = math.pi
    return azimuth, elevation


def from_angles(azimuth: float, elevation: float) -> DirectionUnit:
    ce = math.cos(elevation)
    return DirectionUnit(ce * math.cos(azimuth), ce * math.sin(azimuth), math.sin(elevation))


def wrap_azimuth(a):
    """Wrap angles into (-pi, pi]."""
    w = np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2.0 * np.pi)
    return float(w) if np.ndim(w) == 0 else w


def clamp_elevation(e):
    c = np.clip(e, -np.pi / 2.0, np.pi / 2.0)
    return float(c) if np.ndim(c) == 0 else c


def distance(a, b) -> float:
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return math.sqrt(float(d @ d))


def hexagon_vertices(circumradius: float, center=(0.0, 0.0), first_vertex_deg: float = 30.0) -> np.ndarray:
    """Vertices of a regular hexagon, counterclockwise, shape (6, 2)."""
    ang = np.deg2rad(first_vertex_deg + 60.0 * np.arange(6))
    return np.column_stack(
        [center[0] + circumradius * np.cos(ang), center[1] + circumradius * np.sin(ang)]
    )


def points_in_convex_polygon(xy, vertices) -> np.ndarray:
    """Boolean mask of 2-D points inside (or on) a counterclockwise convex polygon."""
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    v = np.asarray(vertices, dtype=float)
    inside = np.ones(len(xy), dtype=bool)
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        cross = (b[0] - a[0]) * (xy[:, 1] - a[1]) - (b[1] - a[1]) * (xy[:, 0] - a[0])
        inside &= cross >= -1e-9
    return inside
