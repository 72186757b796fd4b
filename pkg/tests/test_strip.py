import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from striprefine.geometry import eval_normal, eval_point, perturb_curve
from striprefine.losses import compose_selection
from striprefine.strip import (
    StripConfig, StripMask, bilinear_sample, choose_strip_width, crop_strip, make_strip,
    _nearest_sample, rasterize_gt_strip_mask, strip_components, strip_index,
)

from conftest import circle_curve, disk_mask

H = 80


def single_component_spanning(mask):
    comps = strip_components(mask)
    return len(comps) == 1 and len(np.unique(comps[0][:, 1])) == mask.shape[1]


def test_config_validation():
    for bad in (dict(height=5), dict(height=2), dict(width=4), dict(dt=0)):
        with pytest.raises(ValueError):
            StripConfig(**bad)


def test_constant_image_gives_constant_strip():
    img = np.full((100, 100, 3), (0.1, 0.5, 0.9))
    strip, _ = make_strip(img, circle_curve((50, 50), 30), StripConfig(height=20, width=64))
    assert strip.shape == (20, 64, 3)
    np.testing.assert_allclose(strip, np.broadcast_to((0.1, 0.5, 0.9), strip.shape), atol=1e-6)


def test_radial_field_rows_are_column_independent():
    size, c, r, norm = 400, 200.0, 100.0, 300.0
    yy, xx = np.mgrid[:size, :size]
    img = np.hypot(xx - c, yy - c) / norm
    strip, _ = make_strip(img, circle_curve((c, c), r), StripConfig(height=H, width=256))
    expected = (r + (np.arange(H) - H / 2)) / norm
    np.testing.assert_allclose(strip, np.broadcast_to(expected[:, None], strip.shape), atol=0.01)


def test_geometry_matches_point_plus_offset_normal():
    curve = circle_curve((100, 100), 50)
    cfg = StripConfig(height=16, width=100, dt=0.5)
    _, geom = make_strip(np.zeros((200, 200)), curve, cfg)
    k = np.arange(100) * geom.dk
    t = (np.arange(16) - 8) * 0.5
    want = eval_point(curve, k)[None] + t[:, None, None] * eval_normal(curve, k)[None]
    np.testing.assert_allclose(geom.coords, want, atol=1e-6)
    assert geom.dk == pytest.approx(curve.total_length / 100)
    # the wrap column k = W * dk coincides with column 0
    wrap = eval_point(curve, 100 * geom.dk) + t[:, None] * eval_normal(curve, 100 * geom.dk)
    np.testing.assert_allclose(geom.coords[:, 0], wrap, atol=1e-6)


def test_floor_dk_flag():
    curve = circle_curve((100, 100), 50)
    _, geom = make_strip(np.zeros((200, 200)), curve, StripConfig(height=8, width=100, floor_dk=True))
    assert geom.dk == math.floor(curve.total_length / 100)


def test_oversampled_strip_rejected():
    curve = circle_curve((50, 50), 1.0, 16)
    with pytest.raises(ValueError, match="oversampled strip"):
        make_strip(np.zeros((100, 100)), curve, StripConfig(height=8, width=int(8 * curve.total_length) + 1))


def test_make_strip_deterministic():
    rng = np.random.default_rng(0)
    img = rng.random((128, 128, 3))
    curve = circle_curve((64, 64), 40)
    a, ga = make_strip(img, curve, StripConfig(height=16, width=200))
    b, gb = make_strip(img, curve, StripConfig(height=16, width=200))
    assert a.tobytes() == b.tobytes()
    assert ga.coords.tobytes() == gb.coords.tobytes()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 19), st.integers(0, 14), st.integers(0, 10_000))
def test_bilinear_exact_at_integer_coordinates(x, y, seed):
    img = np.random.default_rng(seed).random((15, 20))
    assert bilinear_sample(img, np.array([[x, y]], dtype=float))[0] == pytest.approx(img[y, x], abs=1e-12)


def test_bilinear_clamps_outside_image():
    img = np.arange(12.0).reshape(3, 4)
    out = bilinear_sample(img, np.array([[-5.0, -5.0], [10.0, 1.0], [1.5, 0.0]]))
    np.testing.assert_allclose(out, [img[0, 0], img[1, 3], 1.5])


def test_reconstruction_consistency():
    # radius 150 exceeds H everywhere, so the strip cannot fold on itself
    curve = circle_curve((200, 200), 150)
    _, geom = make_strip(np.zeros((400, 400)), curve, StripConfig(height=H, width=600))
    idx = strip_index(geom.coords.reshape(-1, 2), curve, geom)
    ii, jj = np.mgrid[:H, :600]
    ok = (idx[:, 0] == ii.ravel()) & (idx[:, 1] == jj.ravel())
    assert ok.mean() >= 0.99


# --- ground-truth strip mask --------------------------------------------------

def disk_setup(shift=0.0, r=150.0, height=H, width=400):
    size = 512
    c = size / 2
    gt = disk_mask(size, (c, c), r)
    curve = circle_curve((c, c), r + shift)
    _, geom = make_strip(np.zeros((size, size)), curve, StripConfig(height=height, width=width))
    return gt, geom


def test_gt_on_interface_gives_center_rows():
    gt, geom = disk_setup()
    y = rasterize_gt_strip_mask(gt, geom)
    assert np.all(y.mask.sum(axis=0) == 1)
    assert np.all(np.abs(y.rows - H / 2) <= 1)
    assert not y.border.any()
    assert single_component_spanning(y.mask)


def test_gt_inside_foreground_labels_last_row():
    gt, geom = disk_setup(shift=-2 * H, r=220)
    y = rasterize_gt_strip_mask(gt, geom)
    assert np.all(y.rows == H - 1)
    assert y.border.all()
    assert single_component_spanning(y.mask)


def test_gt_outside_labels_first_row():
    gt, geom = disk_setup(shift=H, r=100)
    y = rasterize_gt_strip_mask(gt, geom)
    assert np.all(y.rows == 0)


def test_gt_two_interfaces_keeps_nearest_component():
    size, c = 512, 256
    # annulus: foreground between radii 140 and 165; strip centered at 162 spans both
    gt = disk_mask(size, (c, c), 165) & ~disk_mask(size, (c, c), 140)
    curve = circle_curve((c, c), 162)
    _, geom = make_strip(np.zeros((size, size)), curve, StripConfig(height=H, width=400))
    sampled = _nearest_sample(gt, geom.coords)
    raw = np.zeros(sampled.shape, dtype=np.uint8)
    raw[:-1][sampled[:-1] != sampled[1:]] = 1
    assert len(strip_components(raw)) == 2

    y = rasterize_gt_strip_mask(gt, geom)
    assert len(strip_components(y.mask)) == 1
    # outer interface sits 3 px outward of the center row, inner one 22 px inward
    assert np.all(np.abs(y.rows - (H / 2 + 3)) <= 1)


def test_empty_ground_truth_rejected():
    _, geom = disk_setup()
    with pytest.raises(ValueError, match="empty ground truth"):
        rasterize_gt_strip_mask(np.zeros((512, 512), bool), geom)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1000), st.floats(0, 12), st.floats(-30, 30))
def test_gt_mask_single_component_on_perturbed_curves(seed, amp, shift):
    size, c = 400, 200
    gt = disk_mask(size, (c, c), 110)
    curve = perturb_curve(circle_curve((c, c), 110 + shift, 64), amp, seed)
    _, geom = make_strip(np.zeros((size, size)), curve, StripConfig(height=40, width=300))
    y = rasterize_gt_strip_mask(gt, geom)
    assert single_component_spanning(y.mask)
    assert np.all(y.mask.any(axis=0))


# --- cropping ---------------------------------------------------------------

def test_crop_keeps_center_rows():
    arr = np.arange(H)[:, None] * np.ones((1, 5))
    out = crop_strip(arr, 40)
    np.testing.assert_array_equal(out[:, 0], np.arange(20, 60))


def test_crop_composition():
    arr = np.random.default_rng(1).random((H, 7))
    np.testing.assert_array_equal(crop_strip(crop_strip(arr, 60), 40), crop_strip(arr, 40))
    pred = compose_selection(arr, arr)
    twice = crop_strip(crop_strip(pred, 60), 40)
    once = crop_strip(pred, 40)
    np.testing.assert_array_equal(twice.s, once.s)
    np.testing.assert_array_equal(twice.logits, once.logits)
    assert twice.row_offset == once.row_offset == 20


def test_crop_rejects_bad_heights():
    arr = np.zeros((H, 4))
    for bad in (80, 100, 39):
        with pytest.raises(ValueError):
            crop_strip(arr, bad)


def test_crop_mask_drops_far_label_then_rasterizing_readapts():
    gt, geom = disk_setup(shift=35)  # boundary 35 rows inward, at row 5
    y = rasterize_gt_strip_mask(gt, geom)
    assert np.all(np.abs(y.rows - 5) <= 1)
    cropped = crop_strip(y, 40)
    assert isinstance(cropped, StripMask)
    assert cropped.row_offset == 20
    assert not cropped.mask.any()          # crop itself does not adapt
    redo = rasterize_gt_strip_mask(gt, crop_strip(geom, 40))
    assert redo.border.all()
    assert np.all(redo.rows == 0)          # the kept rows are all background


def test_choose_strip_width():
    assert choose_strip_width(200, 16, StripConfig()) == 4800
    assert choose_strip_width(200, 4, StripConfig(width_factor=1.0)) == 800
    assert choose_strip_width(1, 2, StripConfig()) == 8
