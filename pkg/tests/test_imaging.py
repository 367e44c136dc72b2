import numpy as np
import pytest

from uslads import (
    Image,
    Location,
    MeasurementSet,
    PgmDataError,
    PgmDepthError,
    PgmFormatError,
    PgmHeaderError,
    generate_dendrite,
    load_image,
    measure,
    otsu_threshold,
    sampled_image,
    save_image,
    save_mask,
)


def make_2x2():
    return Image(np.array([[0, 64], [128, 255]], dtype=np.uint8))


# -- PGM codec ---------------------------------------------------------------


def test_load_p2_ascii(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P2\n2 2\n255\n0 64 128 255\n")
    img = load_image(p)
    assert (img.width, img.height) == (2, 2)
    assert img.pixels.tolist() == [[0, 64], [128, 255]]


def test_load_p5_binary(tmp_path):
    p = tmp_path / "b.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 64, 128, 255]))
    assert load_image(p) == make_2x2()


def test_load_p2_with_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P2\n# a comment\n2 2 # inline\n255\n0 64 128 255")
    assert load_image(p) == make_2x2()


def test_load_color_rejected(tmp_path):
    p = tmp_path / "c.ppm"
    p.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(PgmFormatError):
        load_image(p)


def test_load_not_pnm(tmp_path):
    p = tmp_path / "junk.pgm"
    p.write_bytes(b"hello world")
    with pytest.raises(PgmFormatError):
        load_image(p)


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.pgm")


def test_load_malformed_header(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P5\ntwo two\n255\n")
    with pytest.raises(PgmHeaderError):
        load_image(p)


def test_load_16bit_rejected(tmp_path):
    p = tmp_path / "deep.pgm"
    p.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
    with pytest.raises(PgmDepthError):
        load_image(p)


def test_load_truncated_p5(tmp_path):
    p = tmp_path / "short.pgm"
    p.write_bytes(b"P5\n2 2\n255\n\x00\x01")
    with pytest.raises(PgmDataError):
        load_image(p)


def test_load_truncated_p2(tmp_path):
    p = tmp_path / "short2.pgm"
    p.write_bytes(b"P2\n2 2\n255\n0 1")
    with pytest.raises(PgmDataError):
        load_image(p)


def test_roundtrip_save_load(tmp_path, dendrite64):
    p = tmp_path / "round.pgm"
    save_image(dendrite64, p)
    assert load_image(p) == dendrite64


def test_save_mask_counts_bytes(tmp_path):
    ms = MeasurementSet(4, 4)
    for loc in (Location(0, 0), Location(1, 2), Location(3, 3)):
        ms.add(loc, 7)
    p = tmp_path / "mask.pgm"
    save_mask(ms, p)
    payload = p.read_bytes().split(b"255\n", 1)[1]
    assert payload.count(b"\xff") == 3
    assert len(payload) == 16


def test_save_mask_empty_all_black(tmp_path):
    p = tmp_path / "empty.pgm"
    save_mask(MeasurementSet(3, 3), p)
    img = load_image(p)
    assert int(img.pixels.sum()) == 0


# -- measurement oracle ------------------------------------------------------


def test_measure_lookups():
    img = make_2x2()
    assert measure(img, Location(1, 1)) == 255
    assert measure(img, Location(0, 0)) == 0


def test_measure_out_of_bounds():
    with pytest.raises(IndexError):
        measure(make_2x2(), Location(5, 5))


def test_measure_is_pure():
    img = make_2x2()
    assert all(measure(img, Location(0, 1)) == 64 for _ in range(5))


def test_measurement_set_rejects_duplicates():
    ms = MeasurementSet(2, 2)
    ms.add(Location(0, 0), 5)
    with pytest.raises(ValueError):
        ms.add(Location(0, 0), 5)


def test_sampled_image_empty_and_full():
    img = make_2x2()
    empty = MeasurementSet(2, 2)
    assert int(sampled_image(img, empty).pixels.sum()) == 0
    full = MeasurementSet(2, 2)
    for r in range(2):
        for c in range(2):
            full.add(Location(r, c), measure(img, Location(r, c)))
    assert sampled_image(img, full) == img


def test_sampled_image_single_measurement():
    img = Image(np.full((2, 2), 200, dtype=np.uint8))
    ms = MeasurementSet(2, 2)
    ms.add(Location(0, 0), 200)
    out = sampled_image(img, ms)
    assert out.pixels[0, 0] == 200
    assert int(out.pixels.sum()) == 200


def test_sampled_image_domain_mismatch():
    with pytest.raises(ValueError):
        sampled_image(make_2x2(), MeasurementSet(3, 3))


# -- dendrite generator ------------------------------------------------------


def test_generate_deterministic():
    a = generate_dendrite(128, 128, 4, 0.1, 2, seed=7)
    b = generate_dendrite(128, 128, 4, 0.1, 2, seed=7)
    assert a == b


def test_generate_foreground_fraction():
    img = generate_dendrite(128, 128, 4, 0.1, 2, seed=7)
    tau = otsu_threshold(img.pixels.ravel()).value
    frac = float((img.pixels >= tau).mean())
    assert 0.02 <= frac <= 0.30


def test_generate_value_bands():
    img = generate_dendrite(64, 64, seed=1)
    px = img.pixels
    assert np.all((px <= 30) | (px >= 200))


def test_generate_single_arm_is_a_line():
    thickness = 2
    img = generate_dendrite(64, 64, n_primary_arms=1, secondary_arm_rate=0.0,
                            arm_thickness=thickness, seed=11)
    rows, cols = np.nonzero(img.pixels >= 200)
    pts = np.column_stack([rows, cols]).astype(float)
    center = np.array([(img.height - 1) / 2.0, (img.width - 1) / 2.0])
    rel = pts - center
    # principal direction of the foreground approximates the arm direction
    _, vecs = np.linalg.eigh(rel.T @ rel)
    direction = vecs[:, -1]
    perp = rel - np.outer(rel @ direction, direction)
    assert float(np.hypot(perp[:, 0], perp[:, 1]).max()) <= thickness


def test_generate_connected_to_center():
    ndimage = pytest.importorskip("scipy.ndimage")
    img = generate_dendrite(128, 128, seed=5)
    fg = img.pixels >= otsu_threshold(img.pixels.ravel()).value
    labels, count = ndimage.label(fg, structure=np.ones((3, 3)))
    assert count == 1
    assert fg[img.height // 2, img.width // 2]


def test_generate_rejects_degenerate():
    with pytest.raises(ValueError):
        generate_dendrite(8, 8, seed=0)
    with pytest.raises(ValueError):
        generate_dendrite(64, 64, n_primary_arms=0, seed=0)


def test_image_validation():
    with pytest.raises(ValueError):
        Image(np.array([1.5]))
    with pytest.raises(ValueError):
        Image(np.array([[300]]))
    with pytest.raises(ValueError):
        Image(np.array([[0.5]]))
