"""NumPy implementations of the mixture-model inner loops.

The compiled variant in ``_cykernels`` mirrors these functions exactly; the
package ``__init__`` picks one backend at import time. All functions expect
C-contiguous float64 arrays: points ``(n, 2)``, weights ``(k,)``, means
``(k, 2)``, covariances ``(k, 2, 2)``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_LOG_2PI = float(np.log(2.0 * np.pi))


def _inv2x2(cov):
    a, b, c = cov[0, 0], cov[0, 1], cov[1, 1]
    det = a * c - b * b
    if det <= 0.0 or a <= 0.0 or c <= 0.0:
        raise np.linalg.LinAlgError("covariance is not positive definite")
    return c / det, -b / det, a / det, np.log(det)


def weighted_log_prob(points, weights, means, covs):
    """log(weight_k) + log N(point; mean_k, cov_k) for every point and k."""
    n = points.shape[0]
    k = weights.shape[0]
    out = np.empty((n, k))
    for j in range(k):
        ia, ib, ic, logdet = _inv2x2(covs[j])
        dx = points[:, 0] - means[j, 0]
        dy = points[:, 1] - means[j, 1]
        q = ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy
        out[:, j] = np.log(weights[j]) - _LOG_2PI - 0.5 * logdet - 0.5 * q
    return out


def estep(points, weights, means, covs):
    """Responsibilities and per-point log-likelihood under the mixture."""
    wlp = weighted_log_prob(points, weights, means, covs)
    top = wlp.max(axis=1)
    row_ll = top + np.log(np.exp(wlp - top[:, None]).sum(axis=1))
    resp = np.exp(wlp - row_ll[:, None])
    return resp, row_ll


def floor_spd(a, b, c, reg):
    """Floor the eigenvalues of symmetric [[a, b], [b, c]] at ``reg``.

    This is the exact maximizer of the EM objective over covariances with
    minimum eigenvalue >= reg, so the flooring never breaks the likelihood
    ascent (an additive diagonal bump would).
    """
    if b == 0.0:
        return max(a, reg), 0.0, max(c, reg)
    half_tr = 0.5 * (a + c)
    half_gap = 0.5 * np.sqrt((a - c) * (a - c) + 4.0 * b * b)
    lo = half_tr - half_gap
    if lo >= reg:
        return a, b, c
    hi = max(half_tr + half_gap, reg)
    # Unit eigenvector for the large eigenvalue. Of the two equivalent
    # closed forms, take the one whose leading entry is hi minus the
    # smaller diagonal: it cannot cancel, so tiny b stays harmless.
    if a >= c:
        vx = hi - c
        vy = b
    else:
        vx = b
        vy = hi - a
    norm = np.hypot(vx, vy)
    vx /= norm
    vy /= norm
    return (
        hi * vx * vx + reg * vy * vy,
        (hi - reg) * vx * vy,
        hi * vy * vy + reg * vx * vx,
    )


def mstep(points, resp, reg):
    """Weights, means, and eigenvalue-floored covariances from ``resp``.

    Components with zero responsibility mass keep a placeholder denominator;
    the caller is expected to reinitialize them.
    """
    n, k = resp.shape
    nk = resp.sum(axis=0)
    safe = np.where(nk > 0.0, nk, 1.0)
    weights = nk / n
    means = (resp.T @ points) / safe[:, None]
    covs = np.empty((k, 2, 2))
    for j in range(k):
        dx = points[:, 0] - means[j, 0]
        dy = points[:, 1] - means[j, 1]
        rx = resp[:, j] * dx
        a = float(rx @ dx) / safe[j]
        b = float(rx @ dy) / safe[j]
        c = float((resp[:, j] * dy) @ dy) / safe[j]
        a, b, c = floor_spd(a, b, c, reg)
        covs[j, 0, 0] = a
        covs[j, 0, 1] = b
        covs[j, 1, 0] = b
        covs[j, 1, 1] = c
    return weights, means, covs


def mahalanobis_batch(points, mean, cov):
    """sqrt((p - mean)^T cov^-1 (p - mean)) for each point."""
    ia, ib, ic, _ = _inv2x2(cov)
    dx = points[:, 0] - mean[0]
    dy = points[:, 1] - mean[1]
    q = ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy
    return np.sqrt(np.maximum(q, 0.0))
