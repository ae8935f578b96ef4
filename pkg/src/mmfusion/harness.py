"""Monte Carlo experiment runner: scenario generation, method comparison, CDF metrics.

Every trial draws from random streams derived from ``(master_seed, trial_id,
stream)``, so trials are order-independent and may run on a thread pool
without changing any result.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import NonConvergence
from .estimator import (
    EW_AOA,
    EW_HYBRID,
    EW_TOA,
    METHODS,
    OW_AOA,
    OW_HYBRID,
    OW_TOA,
    SINGLE_BS,
    PositionEstimate,
    SearchRegion,
    aoa_columns,
    estimate_p3,
    estimate_single_bs,
    grid_pool,
    toa_columns,
)
from .geom import Position3, hexagon_vertices, points_in_convex_polygon
from .likelihood import build_pool_fields
from .obsmodel import BsProfile, NoBias, Observation, UniformBias, observe
from .optimizer import IsConfig, build_is_pdf, draw_samples, solve_weights, uniform_pdf
from .pooling import equal_weights

IMPORTANCE = "importance"
UNIFORM = "uniform"

_STREAM_TARGET = 0
_STREAM_OBS = 1
_STREAM_FIXED_BIAS = 2**31 - 1


@dataclass(frozen=True)
class Scenario:
    bs_profiles: tuple
    hex_circumradius: float = 50.0
    bs_height: float = 10.0
    target_height: float = 1.0
    bias_mode: str = "unbiased"
    num_trials: int = 1000
    master_seed: int = 0
    bias_fixed: bool = False
    error_dims: int = 2
    aoa_normalizer: str = "circular"

    def __post_init__(self):
        if len(self.bs_profiles) < 1:
            raise ValueError("a scenario needs at least one base station")
        if self.bs_height < 0 or self.target_height < 0:
            raise ValueError("heights must be >= 0")
        if self.num_trials < 1:
            raise ValueError("num_trials must be >= 1")
        if self.bias_mode not in ("unbiased", "biased"):
            raise ValueError("bias_mode must be 'unbiased' or 'biased'")
        if self.error_dims not in (2, 3):
            raise ValueError("error_dims must be 2 or 3")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def hexagon(self) -> np.ndarray:
        return hexagon_vertices(self.hex_circumradius)

    def search_region(self, nx: int, ny: int) -> SearchRegion:
        v = self.hexagon
        return SearchRegion(
            float(v[:, 0].min()), float(v[:, 0].max()), float(v[:, 1].min()), float(v[:, 1].max()),
            self.target_height, nx, ny, polygon=tuple(map(tuple, v.tolist())),
        )


def make_scenario(
    bias_mode: str = "unbiased",
    *,
    hex_circumradius: float = 50.0,
    bs_height: float = 10.0,
    target_height: float = 1.0,
    bs_azimuths_deg: Sequence[float] = (90.0, 210.0, 330.0),
    sigma_d: float = 1.0,
    sigma_az_deg: float = 3.2,
    sigma_el_deg: float = 3.2,
    kappa: float = 10.0,
    bias_lo: float = 0.0,
    bias_hi: float = 5.0,
    **kwargs,
) -> Scenario:
    """Stations on hexagon vertices with identical noise; defaults give the reference setup."""
    bias = UniformBias(bias_lo, bias_hi) if bias_mode == "biased" else NoBias()
    stations = tuple(
        BsProfile(
            i + 1,
            (hex_circumradius * math.cos(math.radians(a)), hex_circumradius * math.sin(math.radians(a)), bs_height),
            sigma_d, math.radians(sigma_az_deg), math.radians(sigma_el_deg), kappa, bias,
        )
        for i, a in enumerate(bs_azimuths_deg)
    )
    return Scenario(stations, hex_circumradius, bs_height, target_height, bias_mode, **kwargs)


@dataclass(frozen=True)
class MethodSpec:
    """One estimator to run per trial.

    ``columns`` selects pool columns (None means the single-station estimate),
    ``optimal`` selects solved versus equal weights.
    """

    label: str
    columns: tuple | None
    optimal: bool = True
    sampler: str = IMPORTANCE
    num_samples: int | None = None
    stream: int = 2
    bs_index: int = 0


def method_plan(labels: Iterable[str], k: int) -> list[MethodSpec]:
    everything = tuple(range(2 * k))
    toa, aoa = tuple(toa_columns(k)), tuple(aoa_columns(k))
    table = {
        OW_HYBRID: MethodSpec(OW_HYBRID, everything, True, stream=2),
        EW_HYBRID: MethodSpec(EW_HYBRID, everything, False),
        OW_TOA: MethodSpec(OW_TOA, toa, True, stream=3),
        EW_TOA: MethodSpec(EW_TOA, toa, False),
        OW_AOA: MethodSpec(OW_AOA, aoa, True, stream=4),
        EW_AOA: MethodSpec(EW_AOA, aoa, False),
        SINGLE_BS: MethodSpec(SINGLE_BS, None),
    }
    plan = []
    for lab in labels:
        if lab not in table:
            raise ValueError(f"unknown method {lab!r}; choose from {', '.join(METHODS)}")
        plan.append(table[lab])
    return plan


@dataclass
class TrialRecord:
    trial_id: int
    true_position: Position3
    observations: list
    estimates: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    solver_iters: dict = field(default_factory=dict)
    converged: dict = field(default_factory=dict)
    flagged: bool = False
    messages: list = field(default_factory=list)

    @property
    def weights_ow(self):
        return self.weights.get(OW_HYBRID)


@dataclass(frozen=True)
class CdfSummary:
    method: str
    errors: tuple
    percentiles: dict
    mean: float

    def percentile(self, p) -> float:
        return order_statistic(self.errors, p)


def trial_rng(master_seed: int, trial_id: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial_id, stream)))


def sample_in_polygon(vertices: np.ndarray, z: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform point inside a convex polygon by rejection from its bounding box."""
    lo, hi = vertices.min(axis=0), vertices.max(axis=0)
    while True:
        xy = lo + (hi - lo) * rng.random(2)
        if points_in_convex_polygon(xy, vertices)[0]:
            return np.array([xy[0], xy[1], z])


def _fixed_biases(scn: Scenario):
    rng = trial_rng(scn.master_seed, 0, _STREAM_FIXED_BIAS)
    return [bs.bias.sample(rng) for bs in scn.bs_profiles]


def _error(est: PositionEstimate, truth: np.ndarray, dims: int) -> float:
    d = np.asarray(est.position)[:dims] - truth[:dims]
    return float(math.sqrt(float(d @ d)))


def _run_trial(scn: Scenario, cfg: IsConfig, plan: Sequence[MethodSpec], region: SearchRegion, trial_id: int, fixed_bias) -> TrialRecord:
    truth = sample_in_polygon(scn.hexagon, scn.target_height, trial_rng(scn.master_seed, trial_id, _STREAM_TARGET))
    obs_rng = trial_rng(scn.master_seed, trial_id, _STREAM_OBS)
    observations = [
        observe(bs, truth, obs_rng, None if fixed_bias is None else fixed_bias[i])
        for i, bs in enumerate(scn.bs_profiles)
    ]
    rec = TrialRecord(trial_id, Position3(*truth.tolist()), observations)
    pool = None
    if any(spec.columns is not None for spec in plan):
        pool = grid_pool(build_pool_fields(scn.bs_profiles, observations, scn.aoa_normalizer), region)

    for spec in plan:
        if spec.columns is None:
            est = estimate_single_bs(scn.bs_profiles[spec.bs_index], observations[spec.bs_index])
            rec.solver_iters[spec.label] = 0
            rec.converged[spec.label] = True
        else:
            cols = list(spec.columns)
            w_sub = equal_weights(len(cols))
            iters, ok = 0, True
            if spec.optimal and len(cols) > 1:
                w_mask = np.zeros(pool.n_experts)
                w_mask[cols] = 1.0 / len(cols)
                psi = build_is_pdf(pool, w_mask) if spec.sampler == IMPORTANCE else uniform_pdf(pool)
                n = spec.num_samples or cfg.num_samples
                samples = draw_samples(psi, n, trial_rng(scn.master_seed, trial_id, spec.stream), columns=cols)
                try:
                    sol = solve_weights(samples, cfg)
                    w_sub, iters, ok = sol.w_star, sol.iterations, sol.converged
                except NonConvergence as exc:
                    rec.flagged = True
                    rec.messages.append(f"{spec.label}: {exc}")
                    ok = False
            w_full = np.zeros(pool.n_experts)
            w_full[cols] = w_sub
            est = estimate_p3(pool, w_full, region, spec.label)
            rec.weights[spec.label] = w_sub
            rec.solver_iters[spec.label] = iters
            rec.converged[spec.label] = ok
        rec.estimates[spec.label] = est
        rec.errors[spec.label] = _error(est, truth, scn.error_dims)
    return rec


def run_plan(scn: Scenario, plan: Sequence[MethodSpec], cfg: IsConfig, threads: int = 1) -> list[TrialRecord]:
    region = scn.search_region(cfg.grid_nx, cfg.grid_ny)
    fixed = _fixed_biases(scn) if scn.bias_fixed else None

    def one(tid):
        return _run_trial(scn, cfg, plan, region, tid, fixed)

    ids = range(scn.num_trials)
    if threads <= 1:
        return [one(t) for t in ids]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, ids))


def run_experiment(scn: Scenario, methods: Iterable[str], cfg: IsConfig, threads: int = 1) -> list[TrialRecord]:
    """Run every requested method on ``scn.num_trials`` independent trials."""
    return run_plan(scn, method_plan(methods, len(scn.bs_profiles)), cfg, threads)


def order_statistic(errors: Sequence[float], p) -> float:
    """The ``ceil(p/100 * N)``-th smallest error (1-based)."""
    xs = sorted(errors)
    if not xs:
        raise ValueError("no errors to summarize")
    rank = max(1, math.ceil(round(p * len(xs) / 100.0, 9)))
    return float(xs[min(rank, len(xs)) - 1])


def summarize(records: Sequence[TrialRecord], method: str, levels=(50, 80, 90)) -> CdfSummary:
    if not records:
        raise ValueError("no records to summarize")
    if any(method not in r.errors for r in records):
        raise ValueError(f"unknown method {method!r}")
    errs = tuple(sorted(r.errors[method] for r in records))
    return CdfSummary(method, errs, {p: order_statistic(errs, p) for p in levels}, float(np.mean(errs)))


def sampling_label(sampler: str, n: int) -> str:
    return f"{sampler}@{n}"


def sweep_plan(sample_counts: Sequence[int], samplers: Sequence[str], k: int) -> list[MethodSpec]:
    cols = tuple(range(2 * k))
    plan = []
    for si, sampler in enumerate(samplers):
        if sampler not in (IMPORTANCE, UNIFORM):
            raise ValueError(f"unknown sampler {sampler!r}")
        for n in sample_counts:
            plan.append(MethodSpec(sampling_label(sampler, n), cols, True, sampler, int(n), stream=10 + si))
    return plan


def sweep_sampling(scn: Scenario, sample_counts: Sequence[int], sampler="importance", cfg: IsConfig | None = None, threads: int = 1, records_out=None):
    """Mean OW hybrid positioning error per sample count.

    ``sampler`` may be a single name or a sequence; the result maps each sampler
    to its list of means aligned with ``sample_counts``.  All counts share the
    same targets and observations per trial.
    """
    cfg = cfg or IsConfig()
    if list(sample_counts) != sorted(sample_counts):
        raise ValueError("sample counts must be ascending")
    samplers = [sampler] if isinstance(sampler, str) else list(sampler)
    recs = run_plan(scn, sweep_plan(sample_counts, samplers, len(scn.bs_profiles)), cfg, threads)
    if records_out is not None:
        records_out.extend(recs)
    return {
        s: [float(np.mean([r.errors[sampling_label(s, n)] for r in recs])) for n in sample_counts]
        for s in samplers
    }


def subset_label(subset: Sequence[int]) -> str:
    return "OW-ToA-only[" + ",".join(str(i) for i in subset) + "]"


def subset_plan(scn: Scenario, subsets: Sequence[Sequence[int]]) -> list[MethodSpec]:
    ids = [bs.id for bs in scn.bs_profiles]
    plan = []
    for si, sub in enumerate(subsets):
        if not sub:
            raise ValueError("BS subsets must be non-empty")
        cols = tuple(2 * ids.index(i) for i in sub)
        plan.append(MethodSpec(subset_label(sub), cols, True, stream=100 + si))
    return plan


def sweep_bs_count(scn: Scenario, subsets: Sequence[Sequence[int]], cfg: IsConfig | None = None, threads: int = 1, records_out=None) -> dict:
    """ToA-only OW fusion for each subset of station ids, summarized as CDFs."""
    cfg = cfg or IsConfig()
    plan = subset_plan(scn, subsets)
    recs = run_plan(scn, plan, cfg, threads)
    if records_out is not None:
        records_out.extend(recs)
    return {tuple(sub): summarize(recs, spec.label) for sub, spec in zip(subsets, plan)}


def with_trials(scn: Scenario, n: int) -> Scenario:
    return replace(scn, num_trials=n)
