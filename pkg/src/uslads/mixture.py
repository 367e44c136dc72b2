"""Two-dimensional Gaussian mixtures: seeded EM, BIC order selection, hard
assignment, and Mahalanobis distances.

Fits use full 2x2 covariances whose eigenvalues are floored at
``1e-4 * max(mean data variance, 1e-4)`` after every M-step. The floor
keeps matrices positive definite even for collinear inputs (thin skeleton
arms produce exactly those), and flooring is the exact constrained M-step,
so the likelihood ascent property survives it. Means are seeded k-means++
style from the data, covariances start at the (floored) pooled data
covariance, and weights start uniform. EM stops when the relative
log-likelihood improvement drops below 1e-6 or after 200 iterations; the
likelihood must never decrease from one iteration to the next (checked to
1e-8 relative, except across a dead-component reinitialization).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels._pykernels import floor_spd

EM_MAX_ITERATIONS = 200
EM_REL_TOLERANCE = 1e-6
MONOTONE_REL_TOLERANCE = 1e-8
COV_REG_SCALE = 1e-4
COV_REG_VAR_FLOOR = 1e-4
DEAD_COMPONENT_WEIGHT = 1e-10


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class GmmModel:
    """A fitted mixture: parallel arrays over components.

    ``log_likelihood`` is the total (summed over points) training
    log-likelihood of the final parameters; ``loglik_history`` holds one
    entry per EM iteration. ``reg`` is the eigenvalue floor applied to
    every covariance, so all covariance eigenvalues are >= reg.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    log_likelihood: float
    n_points: int
    reg: float
    loglik_history: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.weights.size < 1:
            raise ValueError("model must have at least one component")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValueError("component weights must sum to 1")
        for arr in (self.weights, self.means, self.covariances):
            arr.flags.writeable = False

    @property
    def n_components(self) -> int:
        return int(self.weights.size)

    @property
    def components(self) -> list[GaussianComponent]:
        return [
            GaussianComponent(float(w), m.copy(), c.copy())
            for w, m, c in zip(self.weights, self.means, self.covariances)
        ]


def _as_points(points) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array of (row, col) pairs")
    return pts


def _candidate_seed(seed: int, k: int) -> int:
    ss = np.random.SeedSequence([int(seed), int(k)])
    return int(ss.generate_state(1, np.uint64)[0])


def _kmeanspp_means(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    means = np.empty((k, 2))
    means[0] = points[rng.integers(n)]
    if k == 1:
        return means
    d2 = ((points - means[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            means[j] = points[rng.integers(n)]
        else:
            means[j] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((points - means[j]) ** 2).sum(axis=1))
    return means


def fit_gmm(points, k: int, seed: int) -> GmmModel:
    """Fit a k-component full-covariance 2-D GMM by EM; deterministic per seed."""
    pts = _as_points(points)
    n = pts.shape[0]
    if k < 1:
        raise ValueError("component count must be at least 1")
    if n < k:
        raise ValueError(f"{n} points cannot support {k} components")

    rng = np.random.default_rng(seed)
    reg = COV_REG_SCALE * max(float(pts.var(axis=0).mean()), COV_REG_VAR_FLOOR)
    centered = pts - pts.mean(axis=0)
    scatter = centered.T @ centered / n
    a, b, c = floor_spd(scatter[0, 0], scatter[0, 1], scatter[1, 1], reg)
    pooled = np.array([[a, b], [b, c]])

    means = _kmeanspp_means(pts, k, rng)
    covs = np.repeat(pooled[None, :, :], k, axis=0)
    weights = np.full(k, 1.0 / k)

    history: list[float] = []
    prev = -math.inf
    check_monotone = True
    ll = -math.inf
    for it in range(EM_MAX_ITERATIONS + 1):
        resp, row_ll = _kernels.estep(pts, weights, means, covs)
        ll = float(row_ll.sum())
        history.append(ll)
        if check_monotone and ll < prev - MONOTONE_REL_TOLERANCE * abs(prev):
            raise RuntimeError(f"EM log-likelihood decreased: {prev} -> {ll}")
        if it > 0 and abs(ll - prev) < EM_REL_TOLERANCE * max(abs(prev), 1e-12):
            break
        if it == EM_MAX_ITERATIONS:
            break
        prev = ll
        check_monotone = True
        weights, means, covs = _kernels.mstep(pts, resp, reg)
        dead = np.flatnonzero(weights < DEAD_COMPONENT_WEIGHT)
        if dead.size:
            # Reseed starved components on the worst-explained points; the
            # likelihood bound does not apply across this jump.
            worst = np.argsort(row_ll)
            for slot, j in enumerate(dead):
                means[j] = pts[worst[min(slot, n - 1)]]
                covs[j] = pooled
                weights[j] = 1.0 / n
            weights = weights / weights.sum()
            check_monotone = False
            prev = -math.inf

    return GmmModel(
        weights=np.asarray(weights, dtype=np.float64).copy(),
        means=np.asarray(means, dtype=np.float64).copy(),
        covariances=np.asarray(covs, dtype=np.float64).copy(),
        log_likelihood=ll,
        n_points=n,
        reg=reg,
        loglik_history=tuple(history),
    )


def bic(model: GmmModel, n: int) -> float:
    """-2 * logL + p * ln(n) with p = 6k - 1 free parameters; lower is better.

    A k-component full-covariance 2-D mixture has k - 1 free weights, 2k
    mean entries, and 3k distinct covariance entries.
    """
    if n < 1:
        raise ValueError("point count must be at least 1")
    if n != model.n_points:
        raise ValueError(f"n = {n} does not match the fitted point count {model.n_points}")
    p = 6 * model.n_components - 1
    return -2.0 * model.log_likelihood + p * math.log(n)


def select_model(points, n_max: int, seed: int) -> GmmModel:
    """Pick the component count in [1, n_max] with the lowest BIC and refit.

    Candidates are scanned only when the point count exceeds n_max
    (all-or-nothing guard); smaller sets fall back to a single component.
    The linear scan is deliberate: BIC over k is not guaranteed unimodal.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("select_model requires at least one point")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    best_k = 1
    if n > n_max:
        scores = [
            bic(fit_gmm(pts, k, _candidate_seed(seed, k)), n)
            for k in range(1, n_max + 1)
        ]
        best_k = int(np.argmin(scores)) + 1
    return fit_gmm(pts, best_k, _candidate_seed(seed, best_k))


def predict(model: GmmModel, points) -> np.ndarray:
    """Hard assignment: argmax of weight_k * N(p; mean_k, cov_k), ties to the
    lowest component index."""
    pts = _as_points(points)
    if pts.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    wlp = _kernels.weighted_log_prob(pts, model.weights, model.means, model.covariances)
    return wlp.argmax(axis=1)


def mahalanobis_many(points, mean, cov) -> np.ndarray:
    """Mahalanobis distance of each point to (mean, cov)."""
    pts = _as_points(points)
    mean = np.ascontiguousarray(mean, dtype=np.float64)
    cov = np.ascontiguousarray(cov, dtype=np.float64)
    return _kernels.mahalanobis_batch(pts, mean, cov)


def mahalanobis(point, mean, cov) -> float:
    """sqrt((p - mean)^T cov^-1 (p - mean)) for a single 2-D point."""
    return float(mahalanobis_many(np.asarray(point, dtype=np.float64)[None, :], mean, cov)[0])
