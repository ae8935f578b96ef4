# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see ``_kernels_py`` for the contracts."""
import numpy as np

from libc.math cimport exp, log, sqrt, NAN, M_PI


def log_columns(const double[:, ::1] points, const double[:, ::1] bs_pos,
                const double[::1] d_hat, const double[::1] sigma_d,
                const double[:, ::1] u_hat, const double[::1] kappa,
                const double[::1] log_norm_aoa):
    cdef Py_ssize_t n = points.shape[0], k = d_hat.shape[0]
    out_arr = np.empty((n, 2 * k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, r, e, s2, c0
    cdef long n_bad = 0
    with nogil:
        for j in range(k):
            s2 = sigma_d[j] * sigma_d[j]
            c0 = -0.5 * (log(2.0 * M_PI) + log(s2))
            for i in range(n):
                dx = points[i, 0] - bs_pos[j, 0]
                dy = points[i, 1] - bs_pos[j, 1]
                dz = points[i, 2] - bs_pos[j, 2]
                r = sqrt(dx * dx + dy * dy + dz * dz)
                if r == 0.0:
                    n_bad += 1
                    out[i, 2 * j] = NAN
                    out[i, 2 * j + 1] = NAN
                    continue
                e = d_hat[j] - r
                out[i, 2 * j] = c0 - e * e / (2.0 * s2)
                out[i, 2 * j + 1] = kappa[j] * (dx * u_hat[j, 0] + dy * u_hat[j, 1]
                                                + dz * u_hat[j, 2]) / r - log_norm_aoa[j]
    return out_arr, n_bad


def weighted_argmax(const double[:, ::1] log_q, w):
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = log_q.shape[0], m = log_q.shape[1]
    cdef Py_ssize_t i, j, best_i = 0
    cdef double s, best = -1.0 / 0.0
    if n == 0:
        raise ValueError("empty pool")
    with nogil:
        for i in range(n):
            s = 0.0
            for j in range(m):
                s = s + wv[j] * log_q[i, j]
            if s > best:
                best = s
                best_i = i
    return best_i, best


def objective_terms(const double[:, ::1] log_q, log_psi, w):
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] lp = np.ascontiguousarray(log_psi, dtype=np.float64)
    cdef Py_ssize_t n = log_q.shape[0], m = log_q.shape[1]
    s_arr = np.empty(n, dtype=np.float64)
    grad_arr = np.zeros(m, dtype=np.float64)
    hess_arr = np.zeros((m, m), dtype=np.float64)
    cdef double[::1] s = s_arr
    cdef double[::1] g = grad_arr
    cdef double[:, ::1] h = hess_arr
    cdef Py_ssize_t i, j, l
    cdef double acc, shift = -1.0 / 0.0, total = 0.0, r
    with nogil:
        for i in range(n):
            acc = -lp[i]
            for j in range(m):
                acc = acc + wv[j] * log_q[i, j]
            s[i] = acc
            if acc > shift:
                shift = acc
        for i in range(n):
            r = exp(s[i] - shift)
            total = total + r
            for j in range(m):
                g[j] = g[j] + r * log_q[i, j]
                for l in range(j + 1):
                    h[j, l] = h[j, l] + r * log_q[i, j] * log_q[i, l]
        for j in range(m):
            for l in range(j):
                h[l, j] = h[j, l]
    return shift, total, grad_arr, hess_arr
