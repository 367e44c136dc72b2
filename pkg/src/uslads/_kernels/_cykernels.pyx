# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mixture-model inner loops; mirrors ``_pykernels``."""

import numpy as np

from libc.math cimport exp, log, sqrt

BACKEND = "cython"

cdef double LOG_2PI = 1.8378770664093454


cdef inline bint _inv2x2(double a, double b, double c,
                         double* ia, double* ib, double* ic,
                         double* logdet) noexcept nogil:
    cdef double det = a * c - b * b
    if det <= 0.0 or a <= 0.0 or c <= 0.0:
        return False
    ia[0] = c / det
    ib[0] = -b / det
    ic[0] = a / det
    logdet[0] = log(det)
    return True


def weighted_log_prob(const double[:, ::1] points, const double[::1] weights,
                      const double[:, ::1] means, const double[:, :, ::1] covs):
    """log(weight_k) + log N(point; mean_k, cov_k) for every point and k."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t k = weights.shape[0]
    out_arr = np.empty((n, k))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double ia = 0.0, ib = 0.0, ic = 0.0, logdet = 0.0
    cdef double dx, dy, base, mr, mc
    for j in range(k):
        if not _inv2x2(covs[j, 0, 0], covs[j, 0, 1], covs[j, 1, 1],
                       &ia, &ib, &ic, &logdet):
            raise np.linalg.LinAlgError("covariance is not positive definite")
        base = log(weights[j]) - LOG_2PI - 0.5 * logdet
        mr = means[j, 0]
        mc = means[j, 1]
        with nogil:
            for i in range(n):
                dx = points[i, 0] - mr
                dy = points[i, 1] - mc
                out[i, j] = base - 0.5 * (ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy)
    return out_arr


def estep(points, weights, means, covs):
    """Responsibilities and per-point log-likelihood under the mixture."""
    wlp_arr = weighted_log_prob(points, weights, means, covs)
    cdef double[:, ::1] wlp = wlp_arr
    cdef Py_ssize_t n = wlp.shape[0]
    cdef Py_ssize_t k = wlp.shape[1]
    resp_arr = np.empty((n, k))
    row_arr = np.empty(n)
    cdef double[:, ::1] resp = resp_arr
    cdef double[::1] row = row_arr
    cdef Py_ssize_t i, j
    cdef double top, acc, ll
    with nogil:
        for i in range(n):
            top = wlp[i, 0]
            for j in range(1, k):
                if wlp[i, j] > top:
                    top = wlp[i, j]
            acc = 0.0
            for j in range(k):
                acc += exp(wlp[i, j] - top)
            ll = top + log(acc)
            row[i] = ll
            for j in range(k):
                resp[i, j] = exp(wlp[i, j] - ll)
    return resp_arr, row_arr


cdef inline void _floor_spd(double a, double b, double c, double reg,
                            double* oa, double* ob, double* oc) noexcept nogil:
    # Floor the eigenvalues of symmetric [[a, b], [b, c]] at reg. This is
    # the exact maximizer of the EM objective over covariances with minimum
    # eigenvalue >= reg, so it never breaks the likelihood ascent.
    cdef double half_tr, half_gap, lo, hi, vx, vy, norm
    if b == 0.0:
        oa[0] = a if a > reg else reg
        ob[0] = 0.0
        oc[0] = c if c > reg else reg
        return
    half_tr = 0.5 * (a + c)
    half_gap = 0.5 * sqrt((a - c) * (a - c) + 4.0 * b * b)
    lo = half_tr - half_gap
    if lo >= reg:
        oa[0] = a
        ob[0] = b
        oc[0] = c
        return
    hi = half_tr + half_gap
    if hi < reg:
        hi = reg
    # Unit eigenvector for the large eigenvalue. Of the two equivalent
    # closed forms, take the one whose leading entry is hi minus the
    # smaller diagonal: it cannot cancel, so tiny b stays harmless.
    if a >= c:
        vx = hi - c
        vy = b
    else:
        vx = b
        vy = hi - a
    norm = sqrt(vx * vx + vy * vy)
    vx /= norm
    vy /= norm
    oa[0] = hi * vx * vx + reg * vy * vy
    ob[0] = (hi - reg) * vx * vy
    oc[0] = hi * vy * vy + reg * vx * vx


def mstep(const double[:, ::1] points, const double[:, ::1] resp, double reg):
    """Weights, means, and eigenvalue-floored covariances from ``resp``.

    Components with zero responsibility mass keep a placeholder denominator;
    the caller is expected to reinitialize them.
    """
    cdef Py_ssize_t n = resp.shape[0]
    cdef Py_ssize_t k = resp.shape[1]
    w_arr = np.empty(k)
    mu_arr = np.empty((k, 2))
    cov_arr = np.empty((k, 2, 2))
    cdef double[::1] w = w_arr
    cdef double[:, ::1] mu = mu_arr
    cdef double[:, :, ::1] cov = cov_arr
    cdef Py_ssize_t i, j
    cdef double nk, safe, sr, sc, r, dx, dy, a, b, c, rx
    cdef double fa = 0.0, fb = 0.0, fc = 0.0
    with nogil:
        for j in range(k):
            nk = 0.0
            sr = 0.0
            sc = 0.0
            for i in range(n):
                r = resp[i, j]
                nk += r
                sr += r * points[i, 0]
                sc += r * points[i, 1]
            safe = nk if nk > 0.0 else 1.0
            w[j] = nk / n
            mu[j, 0] = sr / safe
            mu[j, 1] = sc / safe
            a = 0.0
            b = 0.0
            c = 0.0
            for i in range(n):
                dx = points[i, 0] - mu[j, 0]
                dy = points[i, 1] - mu[j, 1]
                rx = resp[i, j] * dx
                a += rx * dx
                b += rx * dy
                c += (resp[i, j] * dy) * dy
            _floor_spd(a / safe, b / safe, c / safe, reg, &fa, &fb, &fc)
            cov[j, 0, 0] = fa
            cov[j, 0, 1] = fb
            cov[j, 1, 0] = fb
            cov[j, 1, 1] = fc
    return w_arr, mu_arr, cov_arr


def mahalanobis_batch(const double[:, ::1] points, const double[::1] mean, const double[:, ::1] cov):
    """sqrt((p - mean)^T cov^-1 (p - mean)) for each point."""
    cdef Py_ssize_t n = points.shape[0]
    cdef double ia = 0.0, ib = 0.0, ic = 0.0, logdet = 0.0
    if not _inv2x2(cov[0, 0], cov[0, 1], cov[1, 1], &ia, &ib, &ic, &logdet):
        raise np.linalg.LinAlgError("covariance is not positive definite")
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double dx, dy, q
    with nogil:
        for i in range(n):
            dx = points[i, 0] - mean[0]
            dy = points[i, 1] - mean[1]
            q = ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy
            out[i] = sqrt(q if q > 0.0 else 0.0)
    return out_arr
