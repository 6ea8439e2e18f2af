import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays

from quickshift_scale.pixels import (LabelMap, LabelOverflowError, PPMHeaderError,
                                     PPMMaxvalError, PPMTruncatedError, Region, check_image,
                                     cielab_to_rgb, load_field_csv, load_image_lab,
                                     load_lab_csv, load_labels_csv, load_pgm16, load_ppm,
                                     rgb_to_cielab, save_field_csv, save_lab_csv, save_labels,
                                     write_ppm)


def test_lab_reference_points():
    lab = rgb_to_cielab(np.array([[[255, 255, 255], [0, 0, 0], [255, 0, 0]]], dtype=np.uint8))
    assert np.allclose(lab[0, 0], [100, 0, 0], atol=1e-6)
    assert np.allclose(lab[0, 1], [0, 0, 0], atol=1e-9)
    # sRGB red, D65
    assert np.allclose(lab[0, 2], [53.2408, 80.0925, 67.2032], atol=5e-3)


def test_lab_matches_skimage():
    skcolor = pytest.importorskip("skimage.color")
    rgb = np.random.default_rng(0).integers(0, 256, size=(40, 40, 3), dtype=np.uint8)
    ours = rgb_to_cielab(rgb)
    ref = skcolor.rgb2lab(rgb.astype(float) / 255.0)
    # skimage rounds the D65 white to 5 digits; we use the matrix row sums
    assert np.abs(ours - ref).max() < 1e-2


@settings(max_examples=50, deadline=None)
@given(arrays(np.uint8, (4, 5, 3)))
def test_lab_roundtrip(rgb):
    assert np.array_equal(cielab_to_rgb(rgb_to_cielab(rgb)), rgb)


def test_lab_to_rgb_clamps():
    out = cielab_to_rgb(np.array([[[150.0, 200.0, -200.0], [-20.0, 0.0, 0.0]]]))
    assert out.dtype == np.uint8
    assert out[0, 1].tolist() == [0, 0, 0]


def test_ppm_roundtrip_and_comments(tmp_path):
    rgb = np.random.default_rng(1).integers(0, 256, size=(7, 9, 3), dtype=np.uint8)
    p = tmp_path / "a.ppm"
    write_ppm(p, rgb)
    assert np.array_equal(load_ppm(p), rgb)
    q = tmp_path / "b.ppm"
    q.write_bytes(b"P6\n# a comment\n9 7 # trailing\n255\n" + rgb.tobytes())
    assert np.array_equal(load_ppm(q), rgb)


@pytest.mark.parametrize("data,exc", [
    (b"P3\n2 2\n255\n" + bytes(12), PPMHeaderError),
    (b"P6\n2 2\n65535\n" + bytes(24), PPMMaxvalError),
    (b"P6\n2 2\n255\n" + bytes(11), PPMTruncatedError),
    (b"P6\n2 x\n255\n" + bytes(12), PPMHeaderError),
    (b"P6\n0 2\n255\n", PPMHeaderError),
    (b"P6\n2 2", PPMHeaderError),
])
def test_ppm_errors(tmp_path, data, exc):
    p = tmp_path / "bad.ppm"
    p.write_bytes(data)
    with pytest.raises(exc):
        load_ppm(p)


def test_labels_csv_and_pgm(tmp_path):
    lab = LabelMap(np.arange(12).reshape(3, 4) % 5, 5)
    save_labels(lab, tmp_path / "l.csv")
    assert np.array_equal(load_labels_csv(tmp_path / "l.csv"), lab.labels)
    save_labels(lab, tmp_path / "l.pgm", "pgm16")
    raw = (tmp_path / "l.pgm").read_bytes()
    assert raw.startswith(b"P5\n4 3\n65535\n")
    assert np.array_equal(load_pgm16(tmp_path / "l.pgm"), lab.labels)


def test_pgm_overflow(tmp_path):
    lab = LabelMap(np.zeros((1, 1), dtype=np.int64), 70000)
    with pytest.raises(LabelOverflowError):
        save_labels(lab, tmp_path / "l.pgm", "pgm16")
    with pytest.raises(ValueError):
        save_labels(lab, tmp_path / "l.x", "tiff")


def test_lab_csv_exact_roundtrip(tmp_path):
    img = np.random.default_rng(2).normal(size=(5, 6, 3)) * 30
    save_lab_csv(img, tmp_path / "i.csv")
    assert (tmp_path / "i.csv").read_text().startswith("i,j,L,a,b\n")
    assert np.array_equal(load_lab_csv(tmp_path / "i.csv"), img)
    assert np.array_equal(load_image_lab(tmp_path / "i.csv"), img)


def test_field_csv_roundtrip(tmp_path):
    f = np.random.default_rng(3).random((4, 7)) * 1e3
    save_field_csv(f, tmp_path / "f.csv")
    assert np.array_equal(load_field_csv(tmp_path / "f.csv"), f)


def test_region():
    r = Region.centered((100, 80), 30)
    assert (r.top, r.left, r.height, r.width) == (30, 30, 40, 20)
    assert Region.centered((50, 50), 30).area == 0
    r.check((100, 80))
    with pytest.raises(ValueError):
        Region(90, 0, 20, 5).check((100, 80))


def test_check_image():
    with pytest.raises(ValueError):
        check_image(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        check_image(np.full((2, 2, 3), np.nan))
