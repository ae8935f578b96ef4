"""Log-linear opinion pooling over discretized densities.

A :class:`DiscretePool` holds, for a set of points, the log of each pooled
density (one column per expert) and the log of the density the points were
drawn from.  Grid pools use ``log_psi = 0`` and carry the cell area as their
measure; importance-sampled pools carry ``1 / N_s``.  With that convention
``measure * sum(exp(log_pool - log_psi))`` estimates the pooled integral.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

LOG_FLOOR_SPAN = 700.0
SIMPLEX_TOL = 1e-9


def as_weights(w, size: int | None = None) -> np.ndarray:
    """Validate a weight vector on the probability simplex and return it as an array."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D sequence")
    if size is not None and w.size != size:
        raise ValueError(f"expected {size} weights, got {w.size}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def equal_weights(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)


def floor_log_columns(log_q: np.ndarray, span: float = LOG_FLOOR_SPAN) -> np.ndarray:
    """Clamp each column from below at ``column max - span``."""
    floor = log_q.max(axis=0) - span
    return np.maximum(log_q, floor[None, :])


@dataclass
class DiscretePool:
    log_q: np.ndarray
    log_psi: np.ndarray | None = None
    measure: float = 1.0
    points: np.ndarray | None = None
    cell_ids: np.ndarray | None = None
    floor: bool = field(default=True, repr=False)

    def __post_init__(self):
        lq = np.atleast_2d(np.asarray(self.log_q, dtype=np.float64))
        if lq.shape[0] == 0:
            raise ValueError("pool has no points")
        if self.floor:
            lq = floor_log_columns(lq)
        if not np.all(np.isfinite(lq)):
            raise ValueError("pool log-densities must be finite")
        self.log_q = np.ascontiguousarray(lq)
        if self.log_psi is None:
            self.log_psi = np.zeros(lq.shape[0])
        else:
            self.log_psi = np.ascontiguousarray(self.log_psi, dtype=np.float64)
            if self.log_psi.shape != (lq.shape[0],):
                raise ValueError("log_psi must align with the pool's points")
        if not self.measure > 0:
            raise ValueError("measure must be positive")

    @property
    def n_points(self) -> int:
        return self.log_q.shape[0]

    @property
    def n_experts(self) -> int:
        return self.log_q.shape[1]

    def select_columns(self, columns) -> "DiscretePool":
        cols = list(columns)
        if not cols:
            raise ValueError("empty column selection")
        return DiscretePool(
            self.log_q[:, cols], self.log_psi, self.measure, self.points, self.cell_ids, floor=False
        )

    def take(self, rows, log_psi, measure) -> "DiscretePool":
        """Sub-pool at the given rows with a new proposal density and measure."""
        rows = np.asarray(rows)
        return DiscretePool(
            self.log_q[rows],
            log_psi,
            measure,
            None if self.points is None else self.points[rows],
            None if self.cell_ids is None else self.cell_ids[rows],
            floor=False,
        )


def log_pool_unnormalized(pool: DiscretePool, w) -> np.ndarray:
    """Per-point ``sum_j w_j log q_j``."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (pool.n_experts,):
        raise ValueError(f"weight length {w.shape} does not match {pool.n_experts} pool columns")
    return pool.log_q @ w


def log_sampled_objective(pool: DiscretePool, w) -> float:
    return float(logsumexp(log_pool_unnormalized(pool, w) - pool.log_psi))


def sampled_objective(pool: DiscretePool, w) -> float:
    """``sum_i prod_j q_j^{w_j}(v_i) / psi(v_i)`` without the measure factor."""
    return float(np.exp(log_sampled_objective(pool, w)))


def gci(pool: DiscretePool, w) -> float:
    """Generalized Chernoff information ``-log integral prod_j q_j^{w_j}``."""
    return -(log_sampled_objective(pool, w) + np.log(pool.measure))


def _as_distribution(p, name):
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} must be a normalized non-negative distribution")
    return p


def discrete_kld(p, q) -> float:
    """``sum p log(p / q)`` in nats over a shared finite support."""
    p = _as_distribution(p, "p")
    q = _as_distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError("p and q must share a support")
    live = p > 0
    if np.any(q[live] <= 0):
        raise ValueError("q must be positive wherever p is")
    return float(np.sum(p[live] * (np.log(p[live]) - np.log(q[live]))))


def normalized_pool(experts, w) -> np.ndarray:
    """Normalized log-linear pool of discrete distributions (rows of ``experts``)."""
    log_e = np.log(np.asarray(experts, dtype=np.float64))
    lp = np.asarray(w, dtype=np.float64) @ log_e
    return np.exp(lp - logsumexp(lp))


def verify_decomposition(experts, w, p, constant: str = "exact") -> float:
    """Residual of ``D(q||p) = sum_k w_k D(q_k||p) + C - I_w(q)``.

    Divergences follow the ``D(a||b) = sum b log(b/a)`` convention.  ``experts``
    has one strictly positive distribution per row.  ``constant="exact"`` uses
    ``C = (1 - sum w) * sum p log p``, which is zero on the simplex;
    ``"printed"`` uses ``(K - 1) * sum p log p``.
    """
    experts = np.atleast_2d(np.asarray(experts, dtype=np.float64))
    w = np.asarray(w, dtype=np.float64)
    p = _as_distribution(p, "p")
    if experts.shape[0] != w.size or experts.shape[1] != p.size:
        raise ValueError("experts, weights and p must share dimensions")
    if np.any(experts <= 0):
        raise ValueError("experts must be strictly positive on the support")
    for row in experts:
        _as_distribution(row, "expert")
    live = p > 0
    neg_entropy = float(np.sum(p[live] * np.log(p[live])))

    q = normalized_pool(experts, w)
    lhs = discrete_kld(p, q)

    log_z = float(logsumexp(w @ np.log(experts)))
    i_w = -log_z
    per_expert = sum(wk * discrete_kld(p, ek) for wk, ek in zip(w, experts))
    if constant == "exact":
        c = (1.0 - w.sum()) * neg_entropy
    elif constant == "printed":
        c = (len(w) - 1) * neg_entropy
    else:
        raise ValueError(f"unknown constant convention {constant!r}")
    return abs(lhs - (per_expert + c - i_w))
