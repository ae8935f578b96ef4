"""Noisy (and optionally biased) range and angle observations from ground truth."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .geom import Position3, as_position, clamp_elevation, direction_between, distance, to_angles, wrap_azimuth


@dataclass(frozen=True)
class NoBias:
    def sample(self, rng: np.random.Generator) -> float:
        return 0.0


@dataclass(frozen=True)
class UniformBias:
    """Bias uniform on the half-open interval (lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi):
            raise ValueError(f"UniformBias requires 0 <= lo < hi, got ({self.lo}, {self.hi})")

    def sample(self, rng: np.random.Generator) -> float:
        # 1 - u with u in [0, 1) excludes lo and reaches hi
        return self.lo + (self.hi - self.lo) * (1.0 - rng.random())


@dataclass(frozen=True)
class ExponentialBias:
    mean: float

    def __post_init__(self):
        if not self.mean > 0.0:
            raise ValueError(f"ExponentialBias mean must be > 0, got {self.mean}")

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.exponential(self.mean))


@dataclass(frozen=True)
class DeltaBias:
    value: float

    def __post_init__(self):
        if not self.value >= 0.0:
            raise ValueError(f"DeltaBias value must be >= 0, got {self.value}")

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.value)


BiasModel = Union[NoBias, UniformBias, ExponentialBias, DeltaBias]


def sample_bias(model: BiasModel, rng: np.random.Generator) -> float:
    return model.sample(rng)


@dataclass(frozen=True)
class BsProfile:
    """A monostatic base station: known position plus its error characterization.

    ``sigma_az`` and ``sigma_el`` are in radians.
    """

    id: int
    position: Position3
    sigma_d: float = 1.0
    sigma_az: float = math.radians(3.2)
    sigma_el: float = math.radians(3.2)
    kappa: float = 10.0
    bias: BiasModel = field(default_factory=NoBias)

    def __post_init__(self):
        object.__setattr__(self, "position", as_position(self.position))
        for name in ("sigma_d", "sigma_az", "sigma_el", "kappa"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite number, got {v}")


@dataclass(frozen=True)
class Observation:
    bs_id: int
    d_hat: float
    az_hat: float
    el_hat: float


def observe(bs: BsProfile, target, rng: np.random.Generator, bias: float | None = None) -> Observation:
    """Draw one observation tuple of ``target`` as seen by ``bs``.

    Draw order is bias, range noise, azimuth noise, elevation noise.  Passing
    ``bias`` overrides the bias draw (used when bias is fixed per station).
    """
    u = direction_between(bs.position, target)
    d_true = distance(bs.position, target)
    az, el = to_angles(u)
    b = sample_bias(bs.bias, rng) if bias is None else float(bias)
    n = rng.normal(0.0, bs.sigma_d)
    w_az = rng.normal(0.0, bs.sigma_az)
    w_el = rng.normal(0.0, bs.sigma_el)
    d_hat = max(d_true + b + n, 1e-9)
    return Observation(bs.id, d_hat, wrap_azimuth(az + w_az), clamp_elevation(el + w_el))
