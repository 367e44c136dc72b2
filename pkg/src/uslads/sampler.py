"""Adaptive sampling driver: seeded random initialization, layer-wise
mixture refinement, and the hierarchical region queue.

The driver measures a hidden image one pixel at a time. Each run starts
with a uniformly random sample, then repeatedly refines regions pulled from
a FIFO queue. One refinement iteration on a region thresholds its measured
intensities (Otsu), fits a BIC-selected Gaussian mixture to the bright
measured locations, predicts a cluster for every unmeasured location, and
acquires the unmeasured locations closest to each cluster center in
Mahalanobis distance (at most ``epsilon`` per cluster). After ``maxiter``
iterations a region whose final model has a single component is finished;
a multi-component region splits into one child per component and the
children rejoin the queue. The run stops when the measured fraction
exceeds ``stop_ratio`` or the queue empties.

All randomness is derived from one seed through named substreams, so traces
are reproducible bit for bit on the same build.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from time import perf_counter
from typing import Iterator, NamedTuple

import numpy as np

from .imaging import Image, Location, MeasurementSet, measure
from .mixture import GmmModel, fit_gmm, mahalanobis_many, predict, select_model
from .threshold import Threshold, otsu_threshold

log = logging.getLogger(__name__)

# Substream tags: every random draw is seeded from (master seed, tag, ...).
INIT_SAMPLE_STREAM = 1
GMM_STREAM = 2
BASELINE_STREAM = 3

# Bright measured points needed before a covariance is worth fitting.
_MIN_FOREGROUND = 3


def derive_seed(master: int, *key: int) -> int:
    """Deterministic child seed for a named substream of ``master``."""
    ss = np.random.SeedSequence([int(master), *(int(part) for part in key)])
    return int(ss.generate_state(1, np.uint64)[0])


def gmm_seed_stream(master: int) -> Iterator[int]:
    """Infinite stream of fit seeds, one per model-selection call."""
    counter = 0
    while True:
        yield derive_seed(master, GMM_STREAM, counter)
        counter += 1


def _floor_count(ratio: float, n: int) -> int:
    # floor(ratio * n) robust to float artifacts like 0.29 * 100 = 28.999...
    return int(math.floor(ratio * n + 1e-9))


def _points_of(linear: np.ndarray, width: int) -> np.ndarray:
    pts = np.empty((linear.size, 2))
    pts[:, 0] = linear // width
    pts[:, 1] = linear % width
    return pts


@dataclass(frozen=True)
class SamplerConfig:
    """Run parameters; validated on construction.

    ``stop_ratio`` is the sampling budget as a fraction of all pixels,
    ``initial_ratio`` the random-seeding fraction, ``maxiter`` the number of
    refinement iterations per region layer, ``epsilon`` the measurement
    allowance per cluster per iteration, and ``max_clusters`` the BIC search
    bound.
    """

    stop_ratio: float
    initial_ratio: float = 0.05
    maxiter: int = 10
    epsilon: int = 10
    max_clusters: int = 10
    seed: int = 0
    snapshot_every: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 < self.initial_ratio < self.stop_ratio <= 1.0:
            raise ValueError(
                f"need 0 < initial_ratio ({self.initial_ratio}) < "
                f"stop_ratio ({self.stop_ratio}) <= 1"
            )
        if self.maxiter < 1 or self.epsilon < 1 or self.max_clusters < 1:
            raise ValueError("maxiter, epsilon, and max_clusters must be at least 1")
        if not 0.0 < self.snapshot_every <= 1.0:
            raise ValueError("snapshot_every must be in (0, 1]")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


class TraceEntry(NamedTuple):
    step: int
    row: int
    col: int
    intensity: int
    depth: int


@dataclass
class Snapshot:
    """State captured when the measured fraction crosses a schedule target."""

    target_ratio: float
    ratio: float
    mask: np.ndarray
    elapsed: float


@dataclass
class SamplingTrace:
    """Ordered measurement log, snapshot states, and finished-region records."""

    entries: list[TraceEntry] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    finished_regions: list["Region"] = field(default_factory=list)


class Region:
    """A sub-image: a pixel-index subset with its own measured bookkeeping.

    ``measured_idx``/``measured_val`` preserve acquisition order;
    ``unmeasured_idx`` stays sorted ascending so that distance ties resolve
    to the lowest linear index.
    """

    __slots__ = ("height", "width", "depth", "measured_idx", "measured_val", "unmeasured_idx")

    def __init__(self, height, width, depth, measured_idx, measured_val, unmeasured_idx):
        self.height = height
        self.width = width
        self.depth = depth
        self.measured_idx: list[int] = list(measured_idx)
        self.measured_val: list[int] = list(measured_val)
        self.unmeasured_idx = np.asarray(unmeasured_idx, dtype=np.int64)

    @property
    def n_measured(self) -> int:
        return len(self.measured_idx)

    @property
    def n_members(self) -> int:
        return len(self.measured_idx) + int(self.unmeasured_idx.size)

    def measured_values(self) -> np.ndarray:
        return np.asarray(self.measured_val, dtype=np.int64)

    def measured_index_array(self) -> np.ndarray:
        return np.asarray(self.measured_idx, dtype=np.int64)

    def measured_points(self) -> np.ndarray:
        return _points_of(self.measured_index_array(), self.width)

    def record(self, linear_idx: np.ndarray, values: list[int]) -> None:
        self.measured_idx.extend(int(i) for i in linear_idx)
        self.measured_val.extend(values)
        self.unmeasured_idx = np.setdiff1d(self.unmeasured_idx, linear_idx, assume_unique=True)


def construct_region(parent: Region, member_locations) -> Region:
    """Child region restricted to ``member_locations`` (linear indices or
    (row, col) pairs); measured members keep their intensities."""
    members = np.asarray(member_locations)
    if members.ndim == 2 and members.shape[1] == 2:
        members = members[:, 0] * parent.width + members[:, 1]
    members = np.unique(members.astype(np.int64))
    if members.size == 0:
        raise ValueError("region membership is empty")
    midx = parent.measured_index_array()
    parent_all = np.union1d(midx, parent.unmeasured_idx)
    if not np.isin(members, parent_all).all():
        raise ValueError("member locations must lie within the parent region")
    keep = np.isin(midx, members)
    vals = parent.measured_values()[keep]
    return Region(
        parent.height,
        parent.width,
        parent.depth + 1,
        midx[keep],
        vals.tolist(),
        parent.unmeasured_idx[np.isin(parent.unmeasured_idx, members)],
    )


class Acquisition:
    """Measurement front end: truth image, global record, trace, snapshots.

    Every pixel acquisition in a run funnels through :meth:`measure_linear`,
    which enforces the never-measure-twice invariant and records snapshot
    states when the measured fraction crosses each schedule target.
    """

    def __init__(self, image: Image, snapshot_every: float, t0: float | None = None):
        self.image = image
        self.ms = MeasurementSet(image.height, image.width)
        self.trace = SamplingTrace()
        self.t0 = perf_counter() if t0 is None else t0
        targets = []
        k = 1
        while (target := k * snapshot_every) <= 1.0 + 1e-9:
            targets.append(min(target, 1.0))
            k += 1
        self._targets = targets
        self._next_target = 0

    def ratio(self) -> float:
        return self.ms.ratio()

    def measure_linear(self, linear: int, depth: int) -> int:
        loc = Location(int(linear) // self.image.width, int(linear) % self.image.width)
        if loc in self.ms:
            raise RuntimeError(f"duplicate measurement at {loc}")
        value = measure(self.image, loc)
        self.ms.add(loc, value)
        self.trace.entries.append(TraceEntry(len(self.ms) - 1, loc.row, loc.col, value, depth))
        self._record_crossings()
        return value

    def _record_crossings(self) -> None:
        ratio = self.ratio()
        snaps = self.trace.snapshots
        while self._next_target < len(self._targets) and ratio >= self._targets[self._next_target] - 1e-12:
            if not snaps or ratio > snaps[-1].ratio:
                snaps.append(
                    Snapshot(
                        target_ratio=self._targets[self._next_target],
                        ratio=ratio,
                        mask=self.ms.mask.copy(),
                        elapsed=perf_counter() - self.t0,
                    )
                )
            self._next_target += 1


def initial_random_sample(image: Image, ratio: float, seed: int) -> MeasurementSet:
    """Measure exactly floor(ratio * N) distinct uniform locations."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"initial ratio {ratio} outside (0, 1)")
    n = image.size
    chosen = np.random.default_rng(seed).permutation(n)[: _floor_count(ratio, n)]
    ms = MeasurementSet(image.height, image.width)
    for linear in chosen:
        loc = Location(int(linear) // image.width, int(linear) % image.width)
        ms.add(loc, measure(image, loc))
    return ms


def segment(ms: MeasurementSet, threshold: Threshold | int) -> list[Location]:
    """Measured locations with intensity >= threshold, in measurement order."""
    t = threshold.value if isinstance(threshold, Threshold) else int(threshold)
    return [loc for loc, value in ms.entries if value >= t]


def layer_gmm(
    region: Region,
    cfg: SamplerConfig,
    acq: Acquisition,
    seeds: Iterator[int],
) -> tuple[Region, GmmModel]:
    """Run up to ``cfg.maxiter`` refinement iterations on one region.

    Returns the region (updated in place) and the model that drove the last
    iteration. Degenerate exits (region fully measured, or fewer than three
    bright measured points) return a fresh single-component fit over the
    measured locations so the caller files the region as finished.
    """
    if region.n_measured == 0:
        raise ValueError("region has no measurements")
    model: GmmModel | None = None
    finished = False
    for _ in range(cfg.maxiter):
        if acq.ratio() > cfg.stop_ratio:
            break
        if region.unmeasured_idx.size == 0:
            finished = True
            break
        values = region.measured_values()
        tau = otsu_threshold(values).value
        foreground = region.measured_index_array()[values >= tau]
        if foreground.size < _MIN_FOREGROUND:
            finished = True
            break
        model = select_model(_points_of(foreground, region.width), cfg.max_clusters, next(seeds))
        unmeasured = region.unmeasured_idx
        labels = predict(model, _points_of(unmeasured, region.width))
        chosen: list[np.ndarray] = []
        for k in range(model.n_components):
            candidates = unmeasured[labels == k]
            if candidates.size == 0:
                continue
            distances = mahalanobis_many(
                _points_of(candidates, region.width), model.means[k], model.covariances[k]
            )
            order = np.argsort(distances, kind="stable")[: cfg.epsilon]
            chosen.append(candidates[order])
        if not chosen:
            break
        newly = np.concatenate(chosen)
        values_new = [acq.measure_linear(linear, region.depth) for linear in newly]
        region.record(newly, values_new)
    if finished or model is None:
        model = fit_gmm(region.measured_points(), 1, next(seeds))
    return region, model


def _split_region(region: Region, model: GmmModel) -> list[Region]:
    """One child per component: bright measured members plus unmeasured
    members, both grouped by predicted label. Dark measured pixels stay with
    the global record only."""
    values = region.measured_values()
    tau = otsu_threshold(values).value
    midx = region.measured_index_array()
    foreground = midx[values >= tau]
    unmeasured = region.unmeasured_idx
    fg_labels = predict(model, _points_of(foreground, region.width))
    un_labels = predict(model, _points_of(unmeasured, region.width))
    children = []
    for k in range(model.n_components):
        members = np.concatenate([foreground[fg_labels == k], unmeasured[un_labels == k]])
        if members.size == 0:
            continue
        children.append(construct_region(region, members))
    return children


def run_uslads(image: Image, cfg: SamplerConfig) -> tuple[MeasurementSet, SamplingTrace]:
    """Full adaptive run; returns the global measurement set and its trace."""
    t0 = perf_counter()
    acq = Acquisition(image, cfg.snapshot_every, t0)

    n = image.size
    init_order = np.random.default_rng(derive_seed(cfg.seed, INIT_SAMPLE_STREAM)).permutation(n)
    for linear in init_order[: _floor_count(cfg.initial_ratio, n)]:
        acq.measure_linear(int(linear), depth=0)
    log.info("seeded %d of %d pixels", len(acq.ms), n)

    measured = np.asarray([loc.row * image.width + loc.col for loc, _ in acq.ms.entries], dtype=np.int64)
    root = Region(
        image.height,
        image.width,
        depth=1,
        measured_idx=measured,
        measured_val=[value for _, value in acq.ms.entries],
        unmeasured_idx=np.setdiff1d(np.arange(n, dtype=np.int64), measured),
    )

    seeds = gmm_seed_stream(cfg.seed)
    queue: deque[Region] = deque([root])
    while queue:
        if acq.ratio() > cfg.stop_ratio:
            break
        region = queue.popleft()
        region, model = layer_gmm(region, cfg, acq, seeds)
        if model.n_components == 1:
            acq.trace.finished_regions.append(region)
        else:
            for child in _split_region(region, model):
                if child.n_measured > 0:
                    queue.append(child)
                else:
                    # No intensity support to threshold or cluster on.
                    acq.trace.finished_regions.append(child)
        log.debug(
            "region depth=%d members=%d -> components=%d, global ratio %.4f",
            region.depth,
            region.n_members,
            model.n_components,
            acq.ratio(),
        )
    log.info("run finished at ratio %.4f with %d snapshots", acq.ratio(), len(acq.trace.snapshots))
    return acq.ms, acq.trace
