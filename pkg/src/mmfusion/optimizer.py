"""Importance-sampled estimation of the pooling objective and its minimization.

The proposal density is the equal-weight log-linear pool discretized on the
search grid.  Candidate points are drawn from it categorically, and the
weights minimizing ``sum_i prod_j q_j^{w_j}(v_i) / psi(v_i)`` over the
simplex are found by a damped Newton iteration followed by clamp-and-normalize.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .errors import NonConvergence
from .pooling import DiscretePool, equal_weights, gci

SampleSet = DiscretePool


@dataclass(frozen=True)
class IsConfig:
    num_samples: int = 1000
    grid_nx: int = 1000
    grid_ny: int = 1000
    epsilon: float = 1e-4
    max_iters: int = 100
    damping: float = 1.0
    hessian_ridge: float = 0.0
    step: str = "tangent"

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be positive")
        if self.grid_nx < 2 or self.grid_ny < 2:
            raise ValueError("grid_nx and grid_ny must be >= 2")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.hessian_ridge < 0:
            raise ValueError("hessian_ridge must be >= 0")
        if self.step not in ("tangent", "relaxed"):
            raise ValueError("step must be 'tangent' or 'relaxed'")


@dataclass
class WeightSolution:
    w_star: np.ndarray
    iterations: int
    gci_at_solution: float
    converged: bool
    history: list = field(default_factory=list)


@dataclass
class IsPdf:
    """Proposal density over the cells of a grid pool.

    ``log_density`` is normalized so that ``sum(exp(log_density)) * cell_area == 1``;
    ``prob`` is the matching categorical mass per cell.
    """

    grid: DiscretePool
    log_density: np.ndarray
    prob: np.ndarray


def _pdf_from_log_mass(grid: DiscretePool, log_mass: np.ndarray) -> IsPdf:
    log_prob = log_mass - logsumexp(log_mass)
    return IsPdf(grid, log_prob - math.log(grid.measure), np.exp(log_prob))


def build_is_pdf(grid: DiscretePool, w_is=None) -> IsPdf:
    """Discretized proposal ``prod_j q_j^{w_is_j}``; equal weights by default."""
    if grid.n_points == 0:
        raise ValueError("empty region")
    w = equal_weights(grid.n_experts) if w_is is None else np.asarray(w_is, dtype=np.float64)
    return _pdf_from_log_mass(grid, grid.log_q @ w)


def uniform_pdf(grid: DiscretePool) -> IsPdf:
    """Constant proposal over every cell of the grid."""
    return _pdf_from_log_mass(grid, np.zeros(grid.n_points))


def draw_samples(psi: IsPdf, n: int, rng: np.random.Generator, columns=None) -> SampleSet:
    """Draw ``n`` cell centers with replacement from the categorical ``psi``.

    ``columns`` restricts the returned pool to a subset of the grid's experts.
    """
    cdf = np.cumsum(psi.prob)
    u = rng.random(n) * cdf[-1]
    rows = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    # zero-mass cells can only be hit through the clamp above
    rows = np.where(psi.prob[rows] > 0, rows, np.argmax(psi.prob))
    samples = psi.grid.take(rows, psi.log_density[rows], 1.0 / n)
    return samples if columns is None else samples.select_columns(columns)


def objective_grad_hess(pool: DiscretePool, w):
    """Value, gradient and Hessian of ``sum_i exp(log_q[i] @ w - log_psi[i])``."""
    shift, value, grad, hess = kernels.objective_terms(pool.log_q, pool.log_psi, w)
    scale = math.exp(shift)
    return value * scale, grad * scale, hess * scale


_FLAT_TOL = 1e-10


def _log_objective(pool: DiscretePool, w) -> float:
    s = pool.log_q @ w - pool.log_psi
    top = s.max()
    return float(top + np.log(np.exp(s - top).sum()))


def _project(w: np.ndarray) -> np.ndarray:
    w = np.maximum(w, 0.0)
    s = w.sum()
    if s <= 0:
        return equal_weights(w.size)
    return w / s


def _solve_spd(h: np.ndarray, g: np.ndarray, ridge0: float, history) -> tuple[np.ndarray, float]:
    """Solve ``(h + ridge I) x = g`` by Cholesky, escalating the ridge on failure."""
    n = h.shape[0]
    tr = float(np.trace(h))
    ridge = max(ridge0, 1e-12 * tr / n if tr > 0 else 0.0, 1e-300)
    for _ in range(400):
        try:
            c = np.linalg.cholesky(h + ridge * np.eye(n))
        except np.linalg.LinAlgError:
            ridge *= 10.0
            continue
        if np.all(np.isfinite(c)):
            y = np.linalg.solve(c, g)
            return np.linalg.solve(c.T, y), ridge
        ridge *= 10.0
    raise NonConvergence("regularized Hessian is singular", history)


def _tangent_step(w, g, h, ridge0, history):
    """Newton step restricted to the simplex tangent space, with an active set at w_j = 0."""
    m = w.size
    free = np.ones(m, dtype=bool)
    ridge = 0.0
    while True:
        idx = np.flatnonzero(free)
        delta = np.zeros(m)
        if idx.size > 1:
            q, _ = np.linalg.qr(np.ones((idx.size, 1)), mode="complete")
            z = q[:, 1:]
            hz = z.T @ h[np.ix_(idx, idx)] @ z
            gz = z.T @ g[idx]
            # a tangent gradient at roundoff level means the free face is flat
            if np.linalg.norm(gz) > _FLAT_TOL * np.linalg.norm(g[idx]):
                x, ridge = _solve_spd(hz, gz, ridge0, history)
                delta[idx] = -(z @ x)
        blocked = free & (w <= 0.0) & (delta < 0.0)
        if not blocked.any():
            return delta, ridge
        free &= ~blocked


def solve_weights(pool: DiscretePool, cfg: IsConfig, w0=None) -> WeightSolution:
    """Minimize the sampled objective over the simplex by damped Newton iterations.

    Each iterate is clamped at zero and renormalized; a step is accepted only
    if the objective at the projected point does not increase.  Iteration
    stops once successive weights differ by less than ``cfg.epsilon``.
    """
    m = pool.n_experts
    w = equal_weights(m) if w0 is None else _project(np.asarray(w0, dtype=np.float64))
    history: list[dict] = []
    log_f = _log_objective(pool, w)
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        _, _, g, h = kernels.objective_terms(pool.log_q, pool.log_psi, w)
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
            raise NonConvergence("non-finite derivatives", history)
        if cfg.step == "tangent":
            delta, ridge = _tangent_step(w, g, h, cfg.hessian_ridge, history)
        else:
            x, ridge = _solve_spd(h, g, cfg.hessian_ridge, history)
            delta = -x
        alpha = cfg.damping
        w_new, log_new = w, log_f
        if np.any(delta != 0.0):
            while alpha >= 2.0**-50:
                cand = _project(w + alpha * delta)
                log_cand = _log_objective(pool, cand)
                if log_cand <= log_f:
                    w_new, log_new = cand, log_cand
                    break
                alpha *= 0.5
            else:
                alpha = 0.0
        else:
            alpha = 0.0
        step_norm = float(np.linalg.norm(w_new - w))
        history.append(
            {"iteration": it, "log_objective": log_new, "step_norm": step_norm, "alpha": alpha, "ridge": ridge}
        )
        w, log_f = w_new, log_new
        if step_norm < cfg.epsilon:
            converged = True
            break
    return WeightSolution(w, it, gci(pool, w), converged, history)
