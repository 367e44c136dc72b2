import numpy as np
import pytest

from uslads import (
    Image,
    Location,
    MeasurementSet,
    SamplerConfig,
    Threshold,
    construct_region,
    initial_random_sample,
    layer_gmm,
    predict,
    run_uslads,
    segment,
)
from uslads.sampler import Acquisition, Region, _split_region, gmm_seed_stream


def lin(loc, width):
    return loc[0] * width + loc[1]


def blob_image(size=16):
    """Dark field with one bright blob; intensities depend only on position."""
    px = np.full((size, size), 10, dtype=np.uint8)
    for r, c in [(5, 5), (5, 6), (6, 5), (6, 6), (5, 7)]:
        px[r, c] = 220
    return Image(px)


def make_setup(truth, measured, unmeasured, **cfg_kw):
    kw = dict(stop_ratio=0.99, initial_ratio=0.01, maxiter=1, epsilon=10,
              max_clusters=10, seed=0)
    kw.update(cfg_kw)
    cfg = SamplerConfig(**kw)
    acq = Acquisition(truth, snapshot_every=1.0)
    idx, vals = [], []
    for loc in measured:
        i = lin(loc, truth.width)
        vals.append(acq.measure_linear(i, depth=0))
        idx.append(i)
    unm = np.sort(np.array([lin(u, truth.width) for u in unmeasured], dtype=np.int64))
    region = Region(truth.height, truth.width, 1, idx, vals, unm)
    return cfg, acq, region


BLOB_MEASURED = [(5, 5), (5, 6), (6, 5), (6, 6), (5, 7), (0, 0), (0, 1), (15, 15)]


# -- config ------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(stop_ratio=0.05, initial_ratio=0.05)
    with pytest.raises(ValueError):
        SamplerConfig(stop_ratio=1.2, initial_ratio=0.05)
    with pytest.raises(ValueError):
        SamplerConfig(stop_ratio=0.4, initial_ratio=0.05, maxiter=0)
    with pytest.raises(ValueError):
        SamplerConfig(stop_ratio=0.4, initial_ratio=0.05, epsilon=0)
    SamplerConfig(stop_ratio=1.0, initial_ratio=0.5)


# -- initial random sampling -------------------------------------------------


def test_initial_sample_count():
    img = Image(np.zeros((10, 10), dtype=np.uint8))
    assert len(initial_random_sample(img, 0.05, seed=0)) == 5


def test_initial_sample_128(dendrite128):
    assert len(initial_random_sample(dendrite128, 0.05, seed=1)) == 819


def test_initial_sample_deterministic(dendrite64):
    a = initial_random_sample(dendrite64, 0.07, seed=9)
    b = initial_random_sample(dendrite64, 0.07, seed=9)
    assert a.entries == b.entries


def test_initial_sample_ratio_validation(dendrite64):
    with pytest.raises(ValueError):
        initial_random_sample(dendrite64, 0.0, seed=0)
    with pytest.raises(ValueError):
        initial_random_sample(dendrite64, 1.0, seed=0)


# -- segment -----------------------------------------------------------------


def test_segment_filters_by_threshold():
    ms = MeasurementSet(2, 2)
    ms.add(Location(0, 0), 10)
    ms.add(Location(0, 1), 200)
    assert segment(ms, Threshold(100)) == [Location(0, 1)]
    assert segment(ms, Threshold(0)) == [Location(0, 0), Location(0, 1)]
    assert segment(ms, 201) == []


def test_segment_preserves_measurement_order():
    ms = MeasurementSet(4, 4)
    order = [Location(3, 2), Location(0, 0), Location(1, 3), Location(2, 1)]
    for loc in order:
        ms.add(loc, 255)
    assert segment(ms, 0) == order


# -- layer_gmm ---------------------------------------------------------------


def test_layer_measures_all_when_fewer_than_epsilon():
    truth = blob_image()
    unmeasured = [(4, 5), (6, 7), (7, 6), (3, 3)]
    cfg, acq, region = make_setup(truth, BLOB_MEASURED, unmeasured)
    before = len(acq.ms)
    region, model = layer_gmm(region, cfg, acq, gmm_seed_stream(0))
    assert len(acq.ms) - before == 4
    assert region.unmeasured_idx.size == 0
    assert model.n_components == 1


def test_layer_selects_epsilon_closest():
    truth = blob_image()
    rng = np.random.default_rng(2)
    pool = [(r, c) for r in range(16) for c in range(16)
            if (r, c) not in BLOB_MEASURED]
    unmeasured = [pool[i] for i in rng.choice(len(pool), size=25, replace=False)]
    cfg, acq, region = make_setup(truth, BLOB_MEASURED, unmeasured)
    candidates = region.unmeasured_idx.copy()
    before = set(tuple(loc) for loc, _ in acq.ms.entries)
    region, model = layer_gmm(region, cfg, acq, gmm_seed_stream(0))
    newly = {tuple(loc) for loc, _ in acq.ms.entries} - before
    assert len(newly) == 10

    # independent ranking: plain inverse + quadratic form, stable order
    pts = np.column_stack([candidates // 16, candidates % 16]).astype(float)
    labels = predict(model, pts)
    expected = set()
    for k in range(model.n_components):
        sel = labels == k
        cand_k = candidates[sel]
        diff = pts[sel] - model.means[k]
        inv = np.linalg.inv(model.covariances[k])
        d = np.sqrt(np.einsum("ni,ij,nj->n", diff, inv, diff))
        top = cand_k[np.argsort(d, kind="stable")[: cfg.epsilon]]
        expected.update((int(i) // 16, int(i) % 16) for i in top)
    assert newly == expected


def test_layer_on_fully_measured_region_is_noop():
    truth = blob_image()
    cfg, acq, region = make_setup(truth, BLOB_MEASURED, [])
    before = len(acq.ms)
    region, model = layer_gmm(region, cfg, acq, gmm_seed_stream(0))
    assert len(acq.ms) == before
    assert model.n_components == 1


def test_layer_requires_measurements():
    truth = blob_image()
    cfg, acq, _ = make_setup(truth, BLOB_MEASURED, [])
    empty = Region(16, 16, 1, [], [], np.array([0, 1], dtype=np.int64))
    with pytest.raises(ValueError):
        layer_gmm(empty, cfg, acq, gmm_seed_stream(0))


# -- construct_region --------------------------------------------------------


def test_construct_region_identity():
    truth = blob_image()
    _, _, region = make_setup(truth, BLOB_MEASURED, [(4, 5), (6, 7)])
    members = np.concatenate([region.measured_index_array(), region.unmeasured_idx])
    child = construct_region(region, members)
    assert child.measured_idx == region.measured_idx
    assert child.measured_val == region.measured_val
    assert np.array_equal(child.unmeasured_idx, region.unmeasured_idx)
    assert child.depth == region.depth + 1


def test_construct_region_single_measured_member():
    truth = blob_image()
    cfg, acq, region = make_setup(truth, BLOB_MEASURED, [(4, 5)])
    child = construct_region(region, np.array([lin((5, 5), 16)]))
    assert child.n_measured == 1
    assert child.unmeasured_idx.size == 0
    before = len(acq.ms)
    child, model = layer_gmm(child, cfg, acq, gmm_seed_stream(0))
    assert len(acq.ms) == before
    assert model.n_components == 1


def test_construct_region_validation():
    truth = blob_image()
    _, _, region = make_setup(truth, BLOB_MEASURED, [(4, 5)])
    with pytest.raises(ValueError):
        construct_region(region, np.array([], dtype=np.int64))
    with pytest.raises(ValueError):
        construct_region(region, np.array([lin((9, 9), 16)]))  # not a member


def test_split_partitions_unmeasured():
    px = np.full((24, 24), 12, dtype=np.uint8)
    px[4:7, 4:7] = 230
    px[17:20, 17:20] = 230
    truth = Image(px)
    measured = [(r, c) for r in range(4, 7) for c in range(4, 7)]
    measured += [(r, c) for r in range(17, 20) for c in range(17, 20)]
    measured += [(0, 23), (23, 0)]
    unmeasured = [(r, c) for r in range(0, 24, 3) for c in range(1, 24, 5)
                  if (r, c) not in measured]
    cfg, acq, region = make_setup(truth, measured, unmeasured, max_clusters=3)
    from uslads import select_model
    model = select_model(region.measured_points()[region.measured_values() >= 100],
                         cfg.max_clusters, seed=1)
    assert model.n_components == 2
    children = _split_region(region, model)
    got = np.sort(np.concatenate([c.unmeasured_idx for c in children]))
    assert np.array_equal(got, region.unmeasured_idx)
    for i, a in enumerate(children):
        for b in children[i + 1:]:
            assert not np.intersect1d(a.unmeasured_idx, b.unmeasured_idx).size


# -- run_uslads --------------------------------------------------------------


def test_run_stops_right_after_seeding(dendrite64):
    cfg = SamplerConfig(stop_ratio=0.052, initial_ratio=0.05, seed=1)
    ms, trace = run_uslads(dendrite64, cfg)
    n = dendrite64.size
    assert ms.ratio() >= int(0.05 * n) / n
    assert ms.ratio() <= 0.052 + (cfg.max_clusters * cfg.epsilon) / n


def test_run_deterministic(dendrite64):
    cfg = SamplerConfig(stop_ratio=0.15, seed=4)
    ms1, tr1 = run_uslads(dendrite64, cfg)
    ms2, tr2 = run_uslads(dendrite64, cfg)
    assert tr1.entries == tr2.entries
    assert len(tr1.snapshots) == len(tr2.snapshots)
    for a, b in zip(tr1.snapshots, tr2.snapshots):
        assert a.ratio == b.ratio
        assert np.array_equal(a.mask, b.mask)


def test_run_measures_truthfully(dendrite64):
    cfg = SamplerConfig(stop_ratio=0.15, seed=2)
    ms, trace = run_uslads(dendrite64, cfg)
    assert len(ms) == int(ms.mask.sum())  # no duplicates by construction
    for entry in trace.entries:
        assert entry.intensity == int(dendrite64.pixels[entry.row, entry.col])


def test_run_snapshot_ratios_strictly_increase(dendrite64):
    cfg = SamplerConfig(stop_ratio=0.30, seed=6)
    _, trace = run_uslads(dendrite64, cfg)
    ratios = [s.ratio for s in trace.snapshots]
    assert ratios == sorted(ratios)
    assert len(set(ratios)) == len(ratios)
    counts = [int(s.mask.sum()) for s in trace.snapshots]
    assert counts == sorted(counts)


def test_run_reaches_stop_ratio(dendrite64):
    cfg = SamplerConfig(stop_ratio=0.40, seed=0)
    ms, _ = run_uslads(dendrite64, cfg)
    n = dendrite64.size
    assert 0.40 <= ms.ratio() <= 0.40 + (cfg.max_clusters * cfg.epsilon) / n


def test_run_survives_blank_image():
    img = Image(np.full((48, 48), 77, dtype=np.uint8))
    cfg = SamplerConfig(stop_ratio=0.2, initial_ratio=0.05, seed=0)
    ms, trace = run_uslads(img, cfg)
    n = img.size
    assert int(0.05 * n) <= len(ms)
    assert ms.ratio() <= 0.2 + (cfg.max_clusters * cfg.epsilon) / n


def test_run_trace_depths_start_at_zero(dendrite64):
    cfg = SamplerConfig(stop_ratio=0.10, seed=3)
    ms, trace = run_uslads(dendrite64, cfg)
    seeded = int(0.05 * dendrite64.size)
    assert all(e.depth == 0 for e in trace.entries[:seeded])
    assert all(e.depth >= 1 for e in trace.entries[seeded:])
