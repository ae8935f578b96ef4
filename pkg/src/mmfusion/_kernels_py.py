"""Pure-numpy reference implementations of the hot kernels.

Signatures mirror the compiled ``_kernels`` module exactly.
"""
import numpy as np

_LOG_2PI = float(np.log(2.0 * np.pi))


def log_columns(points, bs_pos, d_hat, sigma_d, u_hat, kappa, log_norm_aoa):
    """Per-point ToA/AoA log-likelihood columns, ordered [ToA_1, AoA_1, ..., ToA_K, AoA_K].

    Returns ``(out, n_degenerate)`` where ``n_degenerate`` counts points that
    coincide with a station (their entries are left as nan).
    """
    points = np.asarray(points, dtype=np.float64)
    k = len(d_hat)
    out = np.empty((points.shape[0], 2 * k))
    n_bad = 0
    for j in range(k):
        diff = points - bs_pos[j]
        r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        bad = r == 0.0
        n_bad += int(bad.sum())
        r = np.where(bad, np.nan, r)
        s2 = sigma_d[j] * sigma_d[j]
        out[:, 2 * j] = -0.5 * (_LOG_2PI + np.log(s2)) - (d_hat[j] - r) ** 2 / (2.0 * s2)
        out[:, 2 * j + 1] = kappa[j] * (diff @ u_hat[j]) / r - log_norm_aoa[j]
    return out, n_bad


def weighted_argmax(log_q, w):
    """Index and value of the largest ``log_q @ w``; ties go to the lowest index."""
    s = np.asarray(log_q) @ np.asarray(w, dtype=np.float64)
    i = int(np.argmax(s))
    return i, float(s[i])


def objective_terms(log_q, log_psi, w):
    """Scaled sum, gradient and Hessian of ``sum_i exp(log_q[i] @ w - log_psi[i])``.

    Returns ``(shift, value, grad, hess)``; the true quantities are the
    returned ones multiplied by ``exp(shift)``.
    """
    log_q = np.asarray(log_q, dtype=np.float64)
    s = log_q @ np.asarray(w, dtype=np.float64) - np.asarray(log_psi, dtype=np.float64)
    shift = float(s.max())
    r = np.exp(s - shift)
    grad = log_q.T @ r
    hess = (log_q * r[:, None]).T @ log_q
    return shift, float(r.sum()), grad, hess
