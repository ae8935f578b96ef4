"""Per-station ToA (Gaussian) and AoA (von Mises-Fisher) log-likelihoods.

Everything is evaluated in log space.  The AoA normalizer defaults to the
printed ``1 / (2 pi I0(kappa))`` form; ``"sphere"`` selects the standard S^2
normalizer ``kappa / (4 pi sinh kappa)`` for sensitivity checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import i0e

from . import kernels
from .errors import DegenerateGeometry
from .geom import DirectionUnit, Position3, as_position, from_angles
from .obsmodel import BsProfile, Observation

_LOG_2PI = math.log(2.0 * math.pi)


def log_bessel_i0(kappa: float) -> float:
    """log I0(kappa), overflow-safe for large kappa."""
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    # i0e(k) = exp(-k) I0(k) stays O(1/sqrt(k)) for large k
    return float(np.log(i0e(kappa)) + kappa)


def _log_sinh(k: float) -> float:
    return k + math.log1p(-math.exp(-2.0 * k)) - math.log(2.0)


def aoa_log_normalizer(kappa: float, normalizer: str = "circular") -> float:
    """Log of the constant dividing ``exp(kappa u_hat . u)``."""
    if normalizer == "circular":
        return _LOG_2PI + log_bessel_i0(kappa)
    if normalizer == "sphere":
        if kappa < 1e-8:
            return math.log(4.0 * math.pi)
        return math.log(4.0 * math.pi) + _log_sinh(kappa) - math.log(kappa)
    raise ValueError(f"unknown AoA normalizer {normalizer!r}")


@dataclass(frozen=True)
class ToaLikelihood:
    bs_position: Position3
    d_hat: float
    sigma_d: float

    def __post_init__(self):
        object.__setattr__(self, "bs_position", as_position(self.bs_position))
        if not self.sigma_d > 0:
            raise ValueError(f"sigma_d must be > 0, got {self.sigma_d}")
        if not math.isfinite(self.d_hat):
            raise ValueError("d_hat must be finite")


@dataclass(frozen=True)
class AoaLikelihood:
    bs_position: Position3
    u_hat: DirectionUnit
    kappa: float
    normalizer: str = "circular"

    def __post_init__(self):
        object.__setattr__(self, "bs_position", as_position(self.bs_position))
        if not self.kappa > 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        u = np.asarray(self.u_hat, dtype=float)
        if abs(float(u @ u) - 1.0) > 1e-9:
            raise ValueError("u_hat must be a unit vector")
        object.__setattr__(self, "u_hat", DirectionUnit(*u.tolist()))

    @property
    def log_norm(self) -> float:
        return aoa_log_normalizer(self.kappa, self.normalizer)


def _ranges(bs_position, candidate):
    c = np.asarray(candidate, dtype=float)
    diff = c - np.asarray(bs_position, dtype=float)
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    if np.any(r == 0.0):
        raise DegenerateGeometry("candidate coincides with the station")
    return diff, r


def log_toa(lik: ToaLikelihood, candidate):
    """Gaussian range log-likelihood; accepts one point or an (N, 3) array."""
    _, r = _ranges(lik.bs_position, candidate)
    s2 = lik.sigma_d**2
    val = -0.5 * (_LOG_2PI + math.log(s2)) - (lik.d_hat - r) ** 2 / (2.0 * s2)
    return float(val) if np.ndim(val) == 0 else val


def log_aoa(lik: AoaLikelihood, candidate):
    """VMF bearing log-likelihood; accepts one point or an (N, 3) array."""
    diff, r = _ranges(lik.bs_position, candidate)
    cos = (diff @ np.asarray(lik.u_hat)) / r
    val = lik.kappa * cos - lik.log_norm
    return float(val) if np.ndim(val) == 0 else val


def likelihoods_for(bs: BsProfile, obs: Observation, normalizer: str = "circular"):
    """The (ToA, AoA) likelihood pair a station's observation induces."""
    toa = ToaLikelihood(bs.position, obs.d_hat, bs.sigma_d)
    aoa = AoaLikelihood(bs.position, from_angles(obs.az_hat, obs.el_hat), bs.kappa, normalizer)
    return toa, aoa


def build_pool_fields(
    stations: Sequence[BsProfile], observations: Sequence[Observation], normalizer: str = "circular"
) -> list:
    """Flattened likelihood list ``[ToA_1, AoA_1, ..., ToA_K, AoA_K]``."""
    by_id = {o.bs_id: o for o in observations}
    out = []
    for bs in stations:
        out.extend(likelihoods_for(bs, by_id[bs.id], normalizer))
    return out


def log_columns(fields: Sequence, points) -> np.ndarray:
    """Evaluate an interleaved [ToA, AoA] * K likelihood list at many points.

    Returns an (N, 2K) matrix.  Uses the compiled kernel when available.
    """
    if len(fields) % 2:
        raise ValueError("fields must alternate ToA and AoA likelihoods")
    toas, aoas = fields[0::2], fields[1::2]
    for t, a in zip(toas, aoas):
        if not (isinstance(t, ToaLikelihood) and isinstance(a, AoaLikelihood)):
            raise TypeError("fields must alternate ToaLikelihood and AoaLikelihood")
        if t.bs_position != a.bs_position:
            raise ValueError("paired ToA/AoA likelihoods must share a station")
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    out, n_bad = kernels.log_columns(
        pts,
        np.ascontiguousarray([t.bs_position for t in toas], dtype=np.float64),
        np.array([t.d_hat for t in toas], dtype=np.float64),
        np.array([t.sigma_d for t in toas], dtype=np.float64),
        np.ascontiguousarray([a.u_hat for a in aoas], dtype=np.float64),
        np.array([a.kappa for a in aoas], dtype=np.float64),
        np.array([a.log_norm for a in aoas], dtype=np.float64),
    )
    if n_bad:
        raise DegenerateGeometry(f"{n_bad} candidate(s) coincide with a station")
    return out
