"""PSNR and SSIM against unreconstructed sampled images, plus the
uniform-random sampling baseline.

SSIM recipe (fixed so independent implementations can agree): mean local
SSIM over all 8x8 windows at stride 1, uniform window weights, plain moment
estimators (var = E[x^2] - E[x]^2), C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from time import perf_counter

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .imaging import Image, Location, MeasurementSet, measure, sampled_image

PEAK = 255.0
SSIM_WINDOW = 8
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityReport:
    ratio: float
    psnr_db: float
    ssim: float
    elapsed: float


def _check_dims(reference: Image, test: Image) -> None:
    if (reference.height, reference.width) != (test.height, test.width):
        raise ValueError(
            f"dimension mismatch: {reference.width}x{reference.height} "
            f"vs {test.width}x{test.height}"
        )


def mse(reference: Image, test: Image) -> float:
    _check_dims(reference, test)
    diff = reference.pixels.astype(np.float64) - test.pixels.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(reference: Image, test: Image) -> float:
    """10 * log10(255^2 / MSE); +inf when the images are identical."""
    err = mse(reference, test)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)


def _window_means(arr: np.ndarray) -> np.ndarray:
    return sliding_window_view(arr, (SSIM_WINDOW, SSIM_WINDOW)).mean(axis=(-2, -1))


def ssim(reference: Image, test: Image) -> float:
    """Mean local SSIM over 8x8 sliding windows with uniform weights."""
    _check_dims(reference, test)
    if reference.height < SSIM_WINDOW or reference.width < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    x = reference.pixels.astype(np.float64)
    y = test.pixels.astype(np.float64)
    mx = _window_means(x)
    my = _window_means(y)
    var_x = _window_means(x * x) - mx * mx
    var_y = _window_means(y * y) - my * my
    cov_xy = _window_means(x * y) - mx * my
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    score = ((2.0 * mx * my + c1) * (2.0 * cov_xy + c2)) / (
        (mx * mx + my * my + c1) * (var_x + var_y + c2)
    )
    return float(score.mean())


def random_baseline(image: Image, ratio: float, seed: int) -> tuple[MeasurementSet, QualityReport]:
    """Uniform random mask at floor(ratio * N) locations, scored without
    reconstruction.

    The mask is a prefix of one seeded permutation, so masks for increasing
    ratios under the same seed are nested.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio {ratio} outside (0, 1]")
    start = perf_counter()
    n = image.size
    count = int(math.floor(ratio * n + 1e-9))
    chosen = np.random.default_rng(seed).permutation(n)[:count]
    ms = MeasurementSet(image.height, image.width)
    for linear in chosen:
        loc = Location(int(linear) // image.width, int(linear) % image.width)
        ms.add(loc, measure(image, loc))
    sampled = sampled_image(image, ms)
    report = QualityReport(
        ratio=len(ms) / n,
        psnr_db=psnr(image, sampled),
        ssim=ssim(image, sampled),
        elapsed=perf_counter() - start,
    )
    return ms, report
