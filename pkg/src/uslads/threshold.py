"""Otsu threshold selection over 8-bit intensity histograms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Threshold:
    """Lower bound of the foreground class; foreground is intensity >= value."""

    value: int

    def __post_init__(self) -> None:
        if not 0 <= self.value <= 255:
            raise ValueError(f"threshold {self.value} outside [0, 255]")


def otsu_threshold(intensities) -> Threshold:
    """Threshold maximizing between-class variance on the 256-bin histogram.

    For each candidate t in [1, 255] the split is {< t} vs {>= t} and the
    score is w0 * w1 * (mu0 - mu1)^2; candidates leaving a class empty score
    zero. Ties pick the smallest t. A single distinct input value v returns
    v itself so the >= predicate keeps everything as foreground.
    """
    values = np.asarray(intensities)
    if values.size == 0:
        raise ValueError("otsu_threshold requires at least one intensity")
    if np.any(values < 0) or np.any(values > 255):
        raise ValueError("intensities outside [0, 255]")
    ints = values.astype(np.int64)
    if np.any(ints != values):
        raise ValueError("intensities must be integers")

    hist = np.bincount(ints.ravel(), minlength=256)
    nonzero = np.flatnonzero(hist)
    if nonzero.size == 1:
        return Threshold(int(nonzero[0]))

    # Exact integer comparison: sigma_b(t) is proportional to
    # (s0*n1 - s1*n0)^2 / (n0*n1), so cross-multiplying keeps mathematically
    # tied candidates tied and the smallest-t rule deterministic. Float
    # scores would order exact ties (empty-gap or symmetric splits) by
    # rounding noise instead.
    counts = hist.tolist()
    total_n = int(hist.sum())
    total_s = int((hist * np.arange(256, dtype=np.int64)).sum())
    best_t = 1
    best_num, best_den = -1, 1
    n0 = s0 = 0
    for t in range(1, 256):
        n0 += counts[t - 1]
        s0 += (t - 1) * counts[t - 1]
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        gap = s0 * n1 - (total_s - s0) * n0
        num = gap * gap
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return Threshold(best_t)
